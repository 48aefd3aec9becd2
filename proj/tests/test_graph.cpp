#include <thermoflow/graph.hpp>

#include <gtest/gtest.h>

using namespace thermoflow;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(Graph, TwoNodeGraph) {
  Eigen::MatrixXd w(2, 2);
  w << 0, 1, 1, 0;
  const Graph g = validate_graph(w, Eigen::MatrixXd::Ones(2, 2));
  EXPECT_EQ(g.size(), 2u);
  EXPECT_EQ(g.arc_count(), 2u);
  EXPECT_TRUE(g.has_arc(0, 1));
  EXPECT_FALSE(g.has_arc(0, 0));
  EXPECT_EQ(g.label(1), "1");
}

TEST(Graph, RejectsRowSumsOffByMoreThanTolerance) {
  Eigen::MatrixXd w(2, 2);
  w << 0, 0.9, 1, 0;
  EXPECT_EQ(code_of([&] { validate_graph(w, Eigen::MatrixXd::Ones(2, 2)); }), ErrorCode::NotStochastic);
  w(0, 1) = 1.0 - 1e-13;
  EXPECT_NO_THROW(validate_graph(w, Eigen::MatrixXd::Ones(2, 2)));
}

TEST(Graph, RejectsNegativeAndOversizedEntries) {
  Eigen::MatrixXd w(2, 2);
  w << -0.5, 1.5, 1, 0;
  EXPECT_EQ(code_of([&] { validate_graph(w, Eigen::MatrixXd::Ones(2, 2)); }), ErrorCode::NegativeEntry);
}

TEST(Graph, RejectsBadResistanceOnArcsOnly) {
  Eigen::MatrixXd w(2, 2);
  w << 0, 1, 1, 0;
  Eigen::MatrixXd r = Eigen::MatrixXd::Ones(2, 2);
  r(0, 0) = -3.0;  // off the support: ignored
  EXPECT_NO_THROW(validate_graph(w, r));
  r(0, 1) = 0.0;
  EXPECT_EQ(code_of([&] { validate_graph(w, r); }), ErrorCode::ZeroOrNegativeResistanceOnEdge);
  r(0, 1) = std::numeric_limits<double>::infinity();
  EXPECT_EQ(code_of([&] { validate_graph(w, r); }), ErrorCode::ZeroOrNegativeResistanceOnEdge);
}

TEST(Graph, RejectsReducibleChain) {
  Eigen::MatrixXd w(3, 3);
  w << 0, 1, 0,
       1, 0, 0,
       0, 0.5, 0.5;  // node 2 is never entered
  EXPECT_EQ(code_of([&] { validate_graph(w, Eigen::MatrixXd::Ones(3, 3)); }), ErrorCode::NotIrreducible);
}

TEST(Graph, RejectsShapeMismatch) {
  EXPECT_EQ(code_of([] { validate_graph(Eigen::MatrixXd::Ones(2, 3), Eigen::MatrixXd::Ones(2, 3)); }),
            ErrorCode::InvalidArgument);
}

TEST(Graph, SimpleModelOnPath) {
  const Graph g = path_graph(3);
  EXPECT_DOUBLE_EQ(g.w(0, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.w(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.w(1, 2), 0.5);
  EXPECT_DOUBLE_EQ(g.w(2, 1), 1.0);
  EXPECT_DOUBLE_EQ(g.r(1, 2), 1.0);
}

TEST(Graph, SimpleModelErrors) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 1;
  EXPECT_EQ(code_of([&] { simple_symmetric_graph(a); }), ErrorCode::NotSymmetric);
  a(1, 0) = 1;
  EXPECT_EQ(code_of([&] { simple_symmetric_graph(a); }), ErrorCode::Disconnected);
}

TEST(Graph, WithResistanceRevalidates) {
  const Graph g = path_graph(3);
  const Graph h = g.with_resistance(0, 1, 2.5);
  EXPECT_DOUBLE_EQ(h.r(0, 1), 2.5);
  EXPECT_DOUBLE_EQ(h.r(1, 0), 1.0);
  EXPECT_FALSE(g == h);
  EXPECT_TRUE(g == path_graph(3));
  EXPECT_EQ(code_of([&] { g.with_resistance(0, 1, -1.0); }), ErrorCode::ZeroOrNegativeResistanceOnEdge);
  EXPECT_EQ(code_of([&] { g.r(7, 0); }), ErrorCode::InvalidArgument);
}

TEST(Generators, GridLayout) {
  const Graph g = make_graph_A();
  ASSERT_EQ(g.size(), 49u);
  EXPECT_EQ(g.arc_count(), 2u * 2u * 7u * 6u);
  EXPECT_TRUE(g.has_arc(0, 1));
  EXPECT_TRUE(g.has_arc(0, 7));
  EXPECT_FALSE(g.has_arc(6, 7));
  EXPECT_EQ(g.label(48), "r6c6");
  const Eigen::VectorXd d = degrees(g);
  EXPECT_EQ(d(0), 2.0);
  EXPECT_EQ(d(8), 4.0);
}

TEST(Generators, GraphB) {
  const Graph g = make_graph_B();
  ASSERT_EQ(g.size(), 8u);
  EXPECT_EQ(g.arc_count(), 2u * (6u + 6u + 2u));
  EXPECT_TRUE(g.has_arc(0, 4));
  EXPECT_TRUE(g.has_arc(1, 5));
  EXPECT_FALSE(g.has_arc(2, 6));
  const auto b = builtin_B();
  EXPECT_FALSE(b.graph.has_arc(b.source, 4));
  EXPECT_LT(b.source, 4u);
  EXPECT_GE(b.target, 4u);
}

TEST(Generators, GraphC) {
  const Graph g = make_graph_C();
  ASSERT_EQ(g.size(), 15u);
  EXPECT_DOUBLE_EQ(g.max_resistance(), 10.0);
  EXPECT_DOUBLE_EQ(g.r(1, 14), 10.0);
  EXPECT_DOUBLE_EQ(g.r(14, 6), 10.0);
  EXPECT_DOUBLE_EQ(g.r(12, 13), 1.0);
  EXPECT_DOUBLE_EQ(g.w(14, 1), 0.5);
  EXPECT_DOUBLE_EQ(g.w(0, 10), 1.0 / 5.0);
  EXPECT_EQ(g.label(14), "h1");
  const auto c = builtin_C();
  for (NodeId bridge : {0u, 1u, 5u, 6u}) {
    EXPECT_NE(c.source, bridge);
    EXPECT_NE(c.target, bridge);
  }
}

TEST(Generators, RejectTooSmall) {
  EXPECT_THROW(grid_graph(1), Error);
  EXPECT_THROW(path_graph(1), Error);
  EXPECT_THROW(two_cliques(2), Error);
}
