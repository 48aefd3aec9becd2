#include "cli.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

namespace {

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "thermoflow");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int status = thermoflow::cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("thermoflow_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(Cli, FlowOnPath) {
  const Result r = run({"flow", "--graph", "path:3", "--s", "0", "--t", "2", "--beta", "0"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "i,j,x,net\n0,1,2,1\n1,0,1,1\n1,2,1,1\n2,1,0,1\n");
}

TEST(Cli, FlowOnGraphCFollowsUnitPath) {
  const Result r = run({"flow", "--graph", "C", "--beta", "50"});
  ASSERT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("\n11,12,0.99999"), std::string::npos);
  EXPECT_NE(r.out.find("\n1,14,0,0\n"), std::string::npos);
}

TEST(Cli, FlowWritesSideFiles) {
  const std::string csv = temp_path("flow.csv"), dot = temp_path("flow.dot"), net = temp_path("net.dot"),
                    diag = temp_path("diag.json");
  const Result r = run({"flow", "--graph", "B", "--beta", "1", "--out", csv, "--dot", dot, "--dot-net", net,
                        "--diagnostics", diag});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(csv).rfind("i,j,x,net\n", 0), 0u);
  EXPECT_EQ(slurp(dot).rfind("graph \"flow\"", 0), 0u);
  EXPECT_EQ(slurp(net).rfind("graph \"net_flow\"", 0), 0u);
  EXPECT_EQ(nlohmann::json::parse(slurp(diag)).at("z").size(), 8u);
  const Result again = run({"flow", "--graph", "B", "--beta", "1"});
  EXPECT_EQ(again.out, slurp(csv));
  for (const auto& p : {csv, dot, net, diag}) std::remove(p.c_str());
}

TEST(Cli, AbacusIsNonIncreasing) {
  const Result r = run({"abacus", "--graph", "A", "--betas", "0.01:50:8"});
  ASSERT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "beta,total_time");
  double previous = std::numeric_limits<double>::infinity();
  int rows = 0;
  while (std::getline(in, line)) {
    const double t = std::stod(line.substr(line.find(',') + 1));
    EXPECT_LE(t, previous * (1 + 1e-12));
    previous = t;
    ++rows;
  }
  EXPECT_EQ(rows, 8);
}

TEST(Cli, CentralityTables) {
  const std::string nodes = temp_path("nodes.csv");
  const Result r = run({"centrality", "--graph", "cliques:3", "--beta", "0.5", "--nodes", nodes, "--threads", "2"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out.rfind("i,j,mean_flow,rel_mean_flow,mean_net_flow\n", 0), 0u);
  EXPECT_EQ(slurp(nodes).rfind("i,mean_flow,rel,mean_net_flow,closeness_out,closeness_in\n", 0), 0u);
  std::remove(nodes.c_str());
  EXPECT_EQ(run({"centrality", "--graph", "B", "--s", "1"}).status, 2);
}

TEST(Cli, CalibrateRoundTrip) {
  const std::string observed = temp_path("observed.csv");
  ASSERT_EQ(run({"flow", "--graph", "B", "--beta", "1", "--out", observed}).status, 0);
  const Result r = run({"calibrate", "--graph", "B", "--observed", observed});
  ASSERT_EQ(r.status, 0) << r.err;
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_NEAR(doc.at("T_hat").get<double>(), 1.0, 1e-4);
  EXPECT_TRUE(doc.at("monotone").get<bool>());
  std::remove(observed.c_str());

  const Result t = run({"calibrate", "--graph", "B", "--observed-time", "1e9"});
  EXPECT_EQ(t.status, 1);
  EXPECT_EQ(t.err.rfind("ERROR OUTSIDE_CURVE_RANGE: ", 0), 0u);
}

TEST(Cli, CorrelateAndGenerate) {
  const Result c = run({"correlate", "--graph", "B", "--betas", "0.01,1,20"});
  ASSERT_EQ(c.status, 0) << c.err;
  EXPECT_EQ(c.out.rfind("beta,corr0,corr_inf,sum\n", 0), 0u);
  const Result g = run({"generate", "--graph", "grid:3x3"});
  ASSERT_EQ(g.status, 0);
  EXPECT_TRUE(thermoflow::io::graph_from_json(nlohmann::json::parse(g.out)) == thermoflow::grid_graph(3));
}

TEST(Cli, GraphFiles) {
  const std::string path = temp_path("graph.csv");
  {
    std::ofstream out(path);
    out << "i,j,r\n0,1,1\n1,2,1\n";
  }
  const Result r = run({"flow", "--graph", path, "--s", "0", "--t", "2"});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(run({"flow", "--graph", path}).status, 2);
  std::remove(path.c_str());
  const Result missing = run({"flow", "--graph", temp_path("missing.json"), "--s", "0", "--t", "1"});
  EXPECT_EQ(missing.status, 1);
  EXPECT_EQ(missing.err.rfind("ERROR PARSE_ERROR: ", 0), 0u);
}

TEST(Cli, Describe) {
  const Result r = run({"flow", "--graph", "C", "--describe"});
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("14,h1,2"), std::string::npos);
}

TEST(Cli, ErrorsAreSingleLine) {
  const Result bad_flag = run({"flow", "--graph", "B", "--bogus"});
  EXPECT_EQ(bad_flag.status, 2);
  const Result bad_graph = run({"flow", "--graph", "hexagon:4"});
  EXPECT_EQ(bad_graph.status, 2);
  const Result module = run({"flow", "--graph", "B", "--p", "0.5"});
  EXPECT_EQ(module.status, 1);
  EXPECT_EQ(module.err.rfind("ERROR INVALID_ARGUMENT: ", 0), 0u);
  EXPECT_EQ(std::count(module.err.begin(), module.err.end(), '\n'), 1);
}

TEST(Cli, Crosscheck) {
  const Result r = run({"crosscheck", "--graph", "B", "--beta", "0.5", "--walks", "20000"});
  EXPECT_EQ(r.status, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}
