#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = sas::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sas_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, GenerateIsDeterministic) {
  ASSERT_EQ(cli({"generate", "--graphon", "1", "--n", "10", "--seed", "1", "--out", path("a.txt")}).code, 0);
  ASSERT_EQ(cli({"generate", "--graphon", "1", "--n", "10", "--seed", "1", "--out", path("b.txt")}).code, 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
  EXPECT_NE(slurp(path("a.txt")).find("# Nodes: 10"), std::string::npos);
  const CliRun stdout_run = cli({"generate", "--graphon", "1", "--n", "10", "--seed", "1"});
  EXPECT_EQ(stdout_run.out, slurp(path("a.txt")));
}

TEST_F(CliTest, EstimateFromEdgeListWritesPgm) {
  ASSERT_EQ(cli({"generate", "--graphon", "4", "--n", "300", "--seed", "3", "--out", path("g.txt")}).code, 0);
  const CliRun r = cli({"estimate", "--input", path("g.txt"), "--symmetrize", "--out", path("w.pgm")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string pgm = slurp(path("w.pgm"));
  // k = floor(n' / 6) where n' <= 300 is the number of nodes with an edge.
  EXPECT_EQ(pgm.substr(0, 3), "P5\n");
  std::istringstream header(pgm.substr(3));
  std::size_t cols = 0, rows = 0, maxval = 0;
  header >> cols >> rows >> maxval;
  EXPECT_EQ(cols, rows);
  EXPECT_EQ(maxval, 255u);
  EXPECT_GE(cols, 45u);
  EXPECT_LE(cols, 50u);
}

TEST_F(CliTest, EstimateFullCsvFromGraphon) {
  const CliRun r = cli({"estimate", "--graphon", "2", "--n", "60", "--seed", "5", "--full", "--out", path("w.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const sas::Grid g = sas::parse_grid_csv(slurp(path("w.csv")));
  EXPECT_EQ(g.rows(), 60);
  const sas::SampledGraph s = sas::sample_graph(sas::catalog_graphon(2), 60, 5);
  EXPECT_EQ(g, sas::sas_estimate(s.graph, sas::SasConfig{}).estimate);
}

TEST_F(CliTest, EstimateHonoursSolverFlagsAndEstimators) {
  ASSERT_EQ(cli({"estimate", "--graphon", "5", "--n", "100", "--mu", "1e7", "--out", path("tv.csv")}).code, 0);
  ASSERT_EQ(cli({"estimate", "--graphon", "5", "--n", "100", "--estimators", "hist", "--out", path("h.csv")}).code, 0);
  const sas::Grid tv = sas::parse_grid_csv(slurp(path("tv.csv")));
  const sas::Grid hist = sas::parse_grid_csv(slurp(path("h.csv")));
  ASSERT_EQ(tv.rows(), hist.rows());
  EXPECT_LT((tv - hist).cwiseAbs().maxCoeff(), 1e-4);
  ASSERT_EQ(cli({"estimate", "--graphon", "5", "--n", "100", "--estimators", "usvt", "--out", path("u.csv")}).code, 0);
  EXPECT_EQ(sas::parse_grid_csv(slurp(path("u.csv"))).rows(), 100);
}

TEST_F(CliTest, EstimateBoundaryFlag) {
  ASSERT_EQ(cli({"estimate", "--graphon", "1", "--n", "80", "--boundary", "periodic", "--out", path("p.csv")}).code, 0);
  ASSERT_EQ(cli({"estimate", "--graphon", "1", "--n", "80", "--out", path("n.csv")}).code, 0);
  const sas::SampledGraph s = sas::sample_graph(sas::catalog_graphon(1), 80, 1);
  sas::SasConfig cfg;
  cfg.tv.boundary = sas::Boundary::Periodic;
  EXPECT_EQ(sas::parse_grid_csv(slurp(path("p.csv"))), sas::sas_estimate(s.graph, cfg).smoothed);
  EXPECT_NE(slurp(path("p.csv")), slurp(path("n.csv")));
  EXPECT_EQ(cli({"estimate", "--graphon", "1", "--n", "80", "--boundary", "mirror", "--out", path("x.csv")}).code, 1);
}

TEST_F(CliTest, EstimateShuffleKeepsDegreeSortedResultForDirectedDistinctDegrees) {
  // Node i points to nodes 0..i-1, so out-degrees are all distinct.
  std::ofstream f(path("d.txt"));
  for (int i = 1; i < 12; ++i)
    for (int j = 0; j < i; ++j) f << i << ' ' << j << '\n';
  f.close();
  ASSERT_EQ(cli({"estimate", "--input", path("d.txt"), "--h", "2", "--out", path("a.csv")}).code, 0);
  ASSERT_EQ(cli({"estimate", "--input", path("d.txt"), "--h", "2", "--shuffle", "--seed", "9", "--out", path("b.csv")})
                .code,
            0);
  EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
}

TEST_F(CliTest, BenchWritesCsvAndJson) {
  const CliRun r = cli({"bench", "--graphon", "1,6", "--n", "60", "--trials", "3", "--seed", "7", "--estimators",
                     "sas,usvt,hist", "--out", path("t.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Average"), std::string::npos);
  const std::string csv = slurp(path("t.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), sas::kSummaryCsvHeader);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);

  ASSERT_EQ(cli({"bench", "--graphon", "2", "--n", "60", "--trials", "2", "--out", path("t.json")}).code, 0);
  const auto j = nlohmann::json::parse(slurp(path("t.json")));
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["trials"], 2);

  // Same arguments, same bytes, regardless of worker count.
  ASSERT_EQ(cli({"bench", "--graphon", "1,6", "--n", "60", "--trials", "3", "--seed", "7", "--estimators",
                 "sas,usvt,hist", "--threads", "1", "--out", path("t1.csv")})
                .code,
            0);
  auto strip_time = [](const std::string& text) {
    std::string out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) out += line.substr(0, line.rfind(',')) + '\n';
    return out;
  };
  EXPECT_EQ(strip_time(slurp(path("t1.csv"))), strip_time(csv));
}

TEST_F(CliTest, BenchMuSweepAddsColumn) {
  const CliRun r =
      cli({"bench", "--graphon", "3", "--n", "50", "--trials", "2", "--mu", "5,20", "--out", path("sweep.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = slurp(path("sweep.csv"));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), std::string(sas::kSummaryCsvHeader) + ",mu");
  EXPECT_NE(csv.find(",5\n"), std::string::npos);
  EXPECT_NE(csv.find(",20\n"), std::string::npos);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST_F(CliTest, RuntimeCsv) {
  const CliRun r = cli({"runtime", "--graphon", "1", "--n", "50,80", "--trials", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), "n,estimator,mean_wall_ms");
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 5);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"frobnicate"}).code, 1);
  EXPECT_EQ(cli({"generate", "--graphon", "11", "--n", "10"}).code, 1);
  EXPECT_EQ(cli({"generate", "--n", "10"}).code, 1);
  EXPECT_EQ(cli({"estimate", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(cli({"estimate", "--graphon", "1", "--out", path("x.csv")}).code, 1);
  EXPECT_EQ(cli({"bench", "--graphon", "zero"}).code, 1);
  EXPECT_EQ(cli({"bench", "--estimators", "sba"}).code, 1);
  const CliRun r = cli({"bench", "--format", "xml"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST_F(CliTest, RuntimeFailuresExitTwo) {
  std::ofstream(path("bad.txt")) << "0 1\nnot an edge\n";
  const CliRun parse = cli({"estimate", "--input", path("bad.txt"), "--out", path("x.csv")});
  EXPECT_EQ(parse.code, 2);
  EXPECT_NE(parse.err.find("line 2"), std::string::npos);

  std::ofstream(path("tiny.txt")) << "0 1\n1 2\n";
  EXPECT_EQ(cli({"estimate", "--input", path("tiny.txt"), "--out", path("x.csv")}).code, 2);

  std::ofstream(path("ok.txt")) << "0 1\n1 2\n2 3\n3 4\n";
  const CliRun cap = cli({"estimate", "--input", path("ok.txt"), "--memory-cap-mb", "0", "--out", path("x.csv")});
  EXPECT_EQ(cap.code, 2);
  EXPECT_NE(cap.err.find("memory cap"), std::string::npos);

  EXPECT_EQ(cli({"estimate", "--graphon", "1", "--n", "20", "--out", path("missing/dir/x.csv")}).code, 2);
}
