#include <thermoflow/io.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace thermoflow;

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(io::format_number(2.0), "2");
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(1.0 / 3.0), "0.3333333333333333");
  EXPECT_EQ(io::format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  const double tricky = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::format_number(tricky)), tricky);
}

TEST(GraphJson, RoundTrip) {
  const Graph c = make_graph_C();
  const Graph back = io::graph_from_json(io::graph_to_json(c));
  EXPECT_TRUE(back == c);
  EXPECT_EQ(back.label(14), "h1");
}

TEST(GraphJson, Errors) {
  EXPECT_THROW(io::graph_from_json(nlohmann::json{{"n", 2}}), Error);
  const auto bad = nlohmann::json::parse(R"({"n":2,"edges":[{"from":0,"to":1,"w":1,"r":1}]})");
  try {
    io::graph_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotStochastic);
  }
}

TEST(EdgeCsv, SimpleModelWithHeader) {
  std::istringstream in("i,j,r\n0,1,1\n1,2,2.5\n");
  const Graph g = io::graph_from_edge_csv(in);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g.w(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(g.r(2, 1), 2.5);
}

TEST(EdgeCsv, BadNumberIsParseError) {
  std::istringstream in("0,1,abc\n");
  try {
    io::graph_from_edge_csv(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(FlowCsv, WriteAndReadBack) {
  const Graph g = path_graph(3);
  const Flow f = solve_linear_flow(g, {0, 2, 0.0}).flow;
  std::ostringstream out;
  io::write_flow_csv(out, g, f);
  EXPECT_EQ(out.str(), "i,j,x,net\n0,1,2,1\n1,0,1,1\n1,2,1,1\n2,1,0,1\n");
  std::istringstream in(out.str());
  const Flow back = io::read_flow_csv(in, 3, 0, 2);
  EXPECT_EQ(back.x, f.x);
}

TEST(Diagnostics, JsonHasOneEntryPerNode) {
  const FlowSolution sol = solve_linear_flow(path_graph(3), {0, 2, 1.0});
  const auto doc = io::diagnostics_to_json(sol.flow, sol.diagnostics);
  EXPECT_EQ(doc.at("z").size(), 3u);
  EXPECT_EQ(doc.at("z")[2].get<double>(), 1.0);
  EXPECT_EQ(doc.at("lambda").size(), 3u);
  EXPECT_DOUBLE_EQ(doc.at("F").get<double>(), sol.diagnostics.free_energy);
}

TEST(Tables, HeadersAndRows) {
  const Graph g = make_graph_B();
  const CentralityTable table = mean_flow_centrality(g, 0.0);
  std::ostringstream edges, nodes;
  io::write_edge_table(edges, g, table);
  io::write_node_table(nodes, table);
  EXPECT_EQ(edges.str().rfind("i,j,mean_flow,rel_mean_flow,mean_net_flow\n", 0), 0u);
  EXPECT_EQ(nodes.str().rfind("i,mean_flow,rel,mean_net_flow,closeness_out,closeness_in\n", 0), 0u);
  const std::string e = edges.str(), n = nodes.str();
  EXPECT_EQ(std::count(e.begin(), e.end(), '\n'), 1 + static_cast<long>(g.arc_count()));
  EXPECT_EQ(std::count(n.begin(), n.end(), '\n'), 9);
}

TEST(Tables, CorrelationWritesNanForUndefined) {
  CorrelationSweep sweep;
  sweep.points.push_back({0.5, 0.25, std::nullopt, ErrorCode::DegenerateVariance});
  std::ostringstream out;
  io::write_correlation_csv(out, sweep);
  EXPECT_EQ(out.str(), "beta,corr0,corr_inf,sum\n0.5,0.25,nan,nan\n");
}

TEST(Calibration, JsonFields) {
  EnergyCalibration c;
  c.temperature = 2.0;
  c.beta = 0.5;
  c.pinned = BracketPin::Upper;
  const auto doc = io::calibration_to_json(c);
  EXPECT_EQ(doc.at("T_hat").get<double>(), 2.0);
  EXPECT_EQ(doc.at("bracket").size(), 2u);
  EXPECT_EQ(doc.at("pinned").get<std::string>(), "upper");
  EXPECT_TRUE(doc.at("monotone").get<bool>());
}

TEST(Dot, GreyRampAndMarkers) {
  EXPECT_EQ(io::grey_for(1.0, 1.0), "gray0");
  EXPECT_EQ(io::grey_for(0.0, 1.0), "gray90");
  const Graph g = path_graph(3);
  const Flow f = solve_linear_flow(g, {0, 2, 0.0}).flow;
  std::ostringstream out;
  io::write_dot(out, g, f.x, "flow", 0, 2);
  const std::string dot = out.str();
  EXPECT_EQ(dot.rfind("graph \"flow\" {", 0), 0u);
  EXPECT_NE(dot.find("0 -- 1 [color=gray0"), std::string::npos);
  EXPECT_NE(dot.find("1 -- 2 [color=gray40"), std::string::npos);
  EXPECT_NE(dot.find("fillcolor=black"), std::string::npos);
  EXPECT_EQ(dot.back(), '\n');
}
