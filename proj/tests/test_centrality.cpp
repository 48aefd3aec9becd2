#include <thermoflow/centrality.hpp>
#include <thermoflow/oracles.hpp>

#include <gtest/gtest.h>

using namespace thermoflow;

namespace {

double relative_spread(const std::vector<double>& values) {
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return (*hi - *lo) / *hi;
}

std::vector<double> edge_values(const Graph& g, const Eigen::MatrixXd& m) {
  std::vector<double> out;
  for (NodeId i = 0; i < g.size(); ++i)
    for (NodeId j = 0; j < g.size(); ++j)
      if (g.has_arc(i, j)) out.push_back(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
  return out;
}

}  // namespace

TEST(Centrality, TwoNodeGraph) {
  Eigen::MatrixXd w(2, 2);
  w << 0, 1, 1, 0;
  const CentralityTable t = mean_flow_centrality(validate_graph(w, Eigen::MatrixXd::Ones(2, 2)), 1.0);
  EXPECT_DOUBLE_EQ(t.mean_flow(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(t.grand_total, 1.0);
  EXPECT_DOUBLE_EQ(t.closeness_out(0), 1.0);
}

TEST(Centrality, MatchesPairwiseSolves) {
  const Graph g = oracles::random_connected_graph(7, 0.5, 11);
  const double beta = 0.8;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(7, 7);
  Eigen::MatrixXd net = Eigen::MatrixXd::Zero(7, 7);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(7);
  for (NodeId s = 0; s < 7; ++s)
    for (NodeId t = 0; t < 7; ++t) {
      if (s == t) continue;
      const Flow f = solve_linear_flow(g, {s, t, beta}).flow;
      sum += f.x;
      net += net_flow(f).nu;
      out(static_cast<Eigen::Index>(s)) += f.total_time();
    }
  const CentralityTable table = mean_flow_centrality(g, beta);
  EXPECT_LT((table.mean_flow - sum / 42.0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((table.mean_net_flow - net / 42.0).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((table.closeness_out - out / 6.0).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_NEAR(table.rel_mean_flow.sum(), 1.0, 1e-12);
  EXPECT_NEAR(table.closeness_out.sum(), table.closeness_in.sum(), 1e-10);
}

TEST(Centrality, ConstantEdgeFlowAtZeroBeta) {
  for (const Graph& g : {make_graph_A(), make_graph_B(), make_graph_C()}) {
    const CentralityTable t = mean_flow_centrality(g, 0.0);
    EXPECT_LT(relative_spread(edge_values(g, t.mean_flow)), 1e-8);
    const Eigen::VectorXd ratio = t.node_mean_flow.cwiseQuotient(degrees(g));
    EXPECT_LT((ratio.maxCoeff() - ratio.minCoeff()) / ratio.maxCoeff(), 1e-8);
  }
}

TEST(Centrality, BridgesCarryMoreNetFlow) {
  const Graph b = make_graph_B();
  const CentralityTable t = mean_flow_centrality(b, 0.0);
  const double bridge = std::min(t.mean_net_flow(0, 4), t.mean_net_flow(1, 5));
  for (NodeId i = 0; i < 8; ++i)
    for (NodeId j = 0; j < 8; ++j)
      if (b.has_arc(i, j) && (i < 4) == (j < 4))
        EXPECT_GT(bridge, t.mean_net_flow(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
}

TEST(Centrality, ThreadCountDoesNotChangeResult) {
  const Graph g = make_graph_C();
  CentralityOptions one, three;
  three.threads = 3;
  const CentralityTable a = mean_flow_centrality(g, 0.5, 1.0, one);
  const CentralityTable b = mean_flow_centrality(g, 0.5, 1.0, three);
  EXPECT_LT((a.mean_flow - b.mean_flow).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(mean_flow_centrality(g, 0.5, 1.0, one).mean_flow, a.mean_flow);
}

TEST(Centrality, PowerExponentUsesFixedPoint) {
  const Graph g = path_graph(4);
  const CentralityTable t = mean_flow_centrality(g, 1.0, 2.0);
  // A path has a single route; flow on each arc is forced at every temperature.
  EXPECT_GT(t.mean_flow(0, 1), 0.0);
  EXPECT_NEAR(t.closeness_out.sum(), t.closeness_in.sum(), 1e-8);
}

TEST(Centrality, ErrorsNamePair) {
  SolverOptions tight;
  tight.exponent_limit = 1.0;
  CentralityOptions opts;
  opts.solver = tight;
  try {
    mean_flow_centrality(path_graph(3), 5.0, 1.0, opts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnderflowGuardTripped);
    EXPECT_NE(std::string(e.what()).find("t="), std::string::npos);
  }
  EXPECT_THROW(mean_flow_centrality(path_graph(3), -1.0), Error);
}

TEST(Commute, ZeroBetaIsResistanceDistance) {
  // Commute time = 2|E| R_eff; on a path of 4 nodes between the ends R_eff = 3.
  EXPECT_NEAR(commute_time(path_graph(4), 0, 3, 0.0), 2.0 * 3.0 * 3.0, 1e-10);
}

TEST(Pearson, DefinedAndDegenerate) {
  Eigen::VectorXd a(4), b(4), c(4);
  a << 1, 2, 3, 4;
  b << 2, 4, 6, 8;
  c << 5, 5, 5, 5;
  EXPECT_NEAR(*pearson(a, b), 1.0, 1e-15);
  EXPECT_NEAR(*pearson(a, -b), -1.0, 1e-15);
  EXPECT_FALSE(pearson(a, c).has_value());
}

TEST(Correlation, EndsCorrelatePerfectlyWithThemselves) {
  const CorrelationSweep sweep = centrality_correlation(make_graph_B(), log_grid(0.01, 20.0, 5));
  ASSERT_EQ(sweep.points.size(), 5u);
  EXPECT_NEAR(*sweep.points.front().corr_low, 1.0, 1e-12);
  EXPECT_NEAR(*sweep.points.back().corr_high, 1.0, 1e-12);
  EXPECT_THROW(centrality_correlation(make_graph_B(), {1.0}), Error);
}

TEST(Correlation, DegenerateVarianceIsReported) {
  // Every node of a cycle is equivalent: no variance across nodes.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) a(i, (i + 1) % 5) = a((i + 1) % 5, i) = 1.0;
  const CorrelationSweep sweep = centrality_correlation(simple_symmetric_graph(a), {0.1, 1.0});
  EXPECT_EQ(sweep.points[0].status, ErrorCode::DegenerateVariance);
  EXPECT_FALSE(sweep.points[0].sum().has_value());
}

TEST(LogGrid, Endpoints) {
  const auto grid = log_grid(1e-3, 50.0, 40);
  EXPECT_EQ(grid.size(), 40u);
  EXPECT_DOUBLE_EQ(grid.front(), 1e-3);
  EXPECT_DOUBLE_EQ(grid.back(), 50.0);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), Error);
}

TEST(Sensitivity, RandomWalkIgnoresResistances) {
  EXPECT_NEAR(trip_duration_sensitivity(make_graph_B(), 0.0, 0, 4, 1e-3), 0.0, 1e-8);
  EXPECT_TRUE(std::isfinite(trip_duration_sensitivity(make_graph_B(), 1.0, 0, 4, 1e-4)));
  EXPECT_THROW(trip_duration_sensitivity(path_graph(4), 1.0, 0, 2, 1e-4), Error);
  EXPECT_THROW(trip_duration_sensitivity(path_graph(4), 1.0, 0, 1, 2.0), Error);
}
