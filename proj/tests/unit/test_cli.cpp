#include <algorithm>
#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "motdual/io.hpp"
#include "tree_paths.hpp"

using namespace motdual;
using Json = nlohmann::json;

namespace {

struct Outcome {
  int code;
  std::string out, err;
  Json json() const { return Json::parse(out); }
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "motdual");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string scratch(const std::string& name) {
  std::filesystem::path dir = std::filesystem::path(MOTDUAL_TEST_SCRATCH_DIR) / "cli";
  std::filesystem::create_directories(dir);
  return (dir / name).string();
}

const std::string kTwoPoint = std::string(MOTDUAL_TEST_DATA_DIR) + "/twopoint.csv";

}  // namespace

TEST(Cli, PricesVanilla) {
  auto r = run({"price", "--claim", "vanilla", "--K", "1", "--marginal", kTwoPoint, "--N", "2", "--m", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_EQ(j["command"], "price");
  EXPECT_EQ(j["result"]["status"], "optimal");
  EXPECT_NEAR(j["result"]["value"].get<double>(), 0.25, 1e-9);
  EXPECT_TRUE(j["result"]["residuals"]["measure_ok"].get<bool>());
  EXPECT_TRUE(j.contains("rng"));
  EXPECT_FALSE(j.contains("timings"));
}

TEST(Cli, DualitySuiteLookback) {
  auto r = run({"duality-suite", "--claim", "lookback", "--marginal", kTwoPoint, "--N", "2", "--m", "4", "--J", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  ASSERT_EQ(j["result"]["instances"].size(), 1u);
  EXPECT_NEAR(j["result"]["instances"][0]["primal"].get<double>(), 1.25, 1e-9);
  EXPECT_NEAR(j["result"]["instances"][0]["dual"].get<double>(), 1.25, 1e-9);
  EXPECT_TRUE(j["result"]["all_strong"].get<bool>());
}

TEST(Cli, RandomDualitySuite) {
  auto r = run({"duality-suite", "--random-instances", "5", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_EQ(j["result"]["instances"].size(), 5u);
  EXPECT_TRUE(j["result"]["all_weak"].get<bool>());
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({"price", "--claim", "vanilla"}).code, 1);
  EXPECT_EQ(run({"price", "--claim", "digital", "--marginal", kTwoPoint}).code, 1);
  EXPECT_EQ(run({"price", "--marginal", scratch("nope.csv")}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"price", "--marginal", kTwoPoint, "--N", "2", "--m", "1", "--B", "1.1"}).code, 1);

  // Mean one but with mass outside what the tree reaches.
  std::string far = scratch("far.csv");
  write_text_file(far, "x,weight\n3.0,0.25\n0.3333333333333333,0.75\n");
  auto r = run({"price", "--claim", "lookback", "--marginal", far, "--N", "2", "--m", "1", "--J", "1"});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_EQ(r.json()["result"]["status"], "infeasible");
  EXPECT_FALSE(r.err.empty());

  auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_FALSE(v.out.empty());
}

TEST(Cli, ReportsAreByteStable) {
  std::vector<std::string> args{"hedge", "--claim", "asian", "--marginal", kTwoPoint, "--N", "2", "--m", "2", "--J", "2"};
  auto a = run(args), b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  std::vector<std::string> lift{"lift", "--N", "2", "--m", "2", "--J", "2", "--samples", "2000", "--seed", "9"};
  auto c = run(lift), d = run(lift);
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out, d.out);
}

TEST(Cli, ConfigFileMatchesFlags) {
  std::string ini = scratch("price.ini");
  write_text_file(ini, "claim = lookback\nN = 2\nm = 2\nJ = 2\nmarginal = " + kTwoPoint +
                           "\n[price]\nmeasure-out = " + scratch("ini_measure.json") + "\n");
  auto a = run({"--config", ini, "price"});
  auto b = run({"price", "--claim", "lookback", "--N", "2", "--m", "2", "--J", "2", "--marginal", kTwoPoint,
                "--measure-out", scratch("ini_measure.json")});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(a.json()["result"], b.json()["result"]);
  EXPECT_EQ(a.json()["inputs"], b.json()["inputs"]);
}

TEST(Cli, OutFileAndTimings) {
  std::string file = scratch("price.json");
  auto r = run({"price", "--marginal", kTwoPoint, "--N", "2", "--m", "1", "--out", file, "--timings"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  Json j = Json::parse(read_text_file(file));
  EXPECT_TRUE(j.contains("timings"));
}

TEST(Cli, HedgeThenVerifyOnTreePaths) {
  std::string cert = scratch("cert.json");
  auto h = run({"hedge", "--claim", "lookback", "--marginal", kTwoPoint, "--N", "2", "--m", "2", "--J", "2",
                "--certificate-out", cert});
  ASSERT_EQ(h.code, 0) << h.err;

  StoredCertificate stored = read_certificate_json(cert);
  PathTree tree = PathTree::build(stored.tree);
  Rng rng(17);
  std::vector<SampledPath> paths;
  for (int v = 0; v < tree.size(); ++v)
    paths.push_back(oracle::realize_leaf(tree, v, tree.node(v).level == 0 ? 0.5 : 0.7, &rng));
  std::string file = scratch("tree_paths.csv");
  write_paths_csv(file, paths);

  auto r = run({"verify-hedge", "--claim", "lookback", "--certificate", cert, "--paths", file, "--penalized"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_EQ(j["result"]["paths"].get<std::size_t>(), paths.size());
  EXPECT_TRUE(j["result"]["ok"].get<bool>());
  EXPECT_TRUE(j["result"]["out_of_tree"].empty());

  // A path that runs away from the tree cannot be hedged.
  std::string away = scratch("away.csv");
  write_paths_csv(away, {SampledPath({{0.0, 1.0}, {1.0, 4.0}})});
  auto bad = run({"verify-hedge", "--claim", "lookback", "--certificate", cert, "--paths", away});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(bad.json()["result"]["out_of_tree"].size(), 1u);
}

TEST(Cli, AlphaHedgeOnGeneratedPaths) {
  auto r = run({"verify-hedge", "--alpha", "--N", "8", "--K", "2", "--generate", "200", "--volatility", "0.5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.json()["result"]["ok"].get<bool>());
}

TEST(Cli, ReportWritesCsv) {
  std::string csv = scratch("refine.csv");
  auto r = run({"report", "--claim", "lookback", "--marginal", kTwoPoint, "--schedule", "2:1:1,2:2:2", "--csv", csv});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.json()["result"]["rows"].size(), 2u);
  std::string text = read_text_file(csv);
  EXPECT_EQ(text.substr(0, 6), "N,m,J,");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(run({"report", "--marginal", kTwoPoint, "--schedule", "2:1"}).code, 1);
}

TEST(Cli, LiftStoredMeasure) {
  std::string measure = scratch("lift_measure.json");
  auto p = run({"price", "--claim", "lookback", "--marginal", kTwoPoint, "--N", "2", "--m", "2", "--J", "2",
                "--measure-out", measure});
  ASSERT_EQ(p.code, 0) << p.err;
  auto r = run({"lift", "--measure", measure, "--samples", "5000", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  Json j = r.json();
  EXPECT_TRUE(j["result"]["measure_ok"].get<bool>());
  EXPECT_TRUE(j["result"]["z_identity"]["ok"].get<bool>());
  EXPECT_TRUE(j["result"]["accepted"].get<bool>());
}

TEST(Cli, DiscretizeGeneratedPaths) {
  std::string input = scratch("gbm.csv");
  PathGeneratorConfig cfg;
  cfg.volatility = 0.4;
  write_paths_csv(input, generate_paths(cfg, 10));
  std::string grid = scratch("grid.csv");
  auto r = run({"discretize", "--input", input, "--N", "4", "--grid-out", grid});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_grid_paths_csv(grid).size(), 10u);
}
