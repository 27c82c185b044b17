#include "sas/graphon.hpp"
#include "sas/io.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

using namespace sas;

TEST(ParseEdgeList, CommentsAndCompaction) {
  const EdgeList e = parse_edge_list("# comment\n0 1\n1 2\n");
  EXPECT_EQ(e.n, 3u);
  EXPECT_EQ(e.edges, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}}));

  const EdgeList sparse = parse_edge_list("100 7\n7\t42\n\n  # indented comment\n42 100\r\n");
  EXPECT_EQ(sparse.n, 3u);
  EXPECT_EQ(sparse.edges, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 2}, {2, 0}}));
}

TEST(ParseEdgeList, DropsSelfLoopsAndDuplicates) {
  const EdgeList e = parse_edge_list("0 0\n0 1\n0 1\n1 0\n");
  EXPECT_EQ(e.edges, (std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {1, 0}}));
}

TEST(ParseEdgeList, ErrorsCarryLineNumbers) {
  try {
    parse_edge_list("0 1\n# ok\n2 x\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& err) {
    EXPECT_EQ(err.line(), 3u);
    EXPECT_NE(std::string(err.what()).find("line 3"), std::string::npos);
  }
  EXPECT_THROW(parse_edge_list("0 1 2\n"), ParseError);
  EXPECT_THROW(parse_edge_list("-1 2\n"), ParseError);
  EXPECT_THROW(parse_edge_list("# only comments\n"), InputError);
  EXPECT_THROW(parse_edge_list("3 3\n"), InputError);
}

TEST(ToAdjacency, DirectedAndSymmetrized) {
  EdgeList e;
  e.n = 2;
  e.edges = {{0, 1}};
  const AdjacencyMatrix sym = to_adjacency(e, true);
  EXPECT_TRUE(sym(0, 1) && sym(1, 0));
  const AdjacencyMatrix dir = to_adjacency(e, false);
  EXPECT_TRUE(dir(0, 1));
  EXPECT_FALSE(dir(1, 0));
}

TEST(ToAdjacency, MemoryCapIsNamed) {
  EdgeList e;
  e.n = 100000;
  e.edges = {{0, 1}};
  try {
    to_adjacency(e, true, 1 << 20);
    FAIL() << "expected a resource error";
  } catch (const ResourceError& err) {
    EXPECT_NE(std::string(err.what()).find(std::to_string(1 << 20)), std::string::npos);
  }
  // 7.5e4 nodes fit comfortably in bit-packed storage.
  EXPECT_LT(AdjacencyMatrix::storage_bytes(75000), std::size_t{800} << 20);
}

TEST(EdgeListRoundTrip, SymmetricAndDirected) {
  for (const bool symmetric : {true, false}) {
    const AdjacencyMatrix g = oracle::random_graph(50, 0.2, 3, symmetric);
    std::ostringstream out;
    write_edge_list(g, out, "round trip");
    // Every node of this graph has an edge, so compaction keeps 50 nodes;
    // relabel through the first-appearance order to compare.
    const EdgeList e = parse_edge_list(out.str(), !symmetric);
    ASSERT_EQ(e.n, 50u);
    const AdjacencyMatrix back = to_adjacency(e, symmetric);
    std::vector<std::size_t> first(50);
    std::istringstream in(out.str());
    std::string line;
    std::vector<bool> seen(50, false);
    std::size_t next = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::size_t a, b;
      ls >> a >> b;
      for (const std::size_t v : {a, b})
        if (!seen[v]) {
          seen[v] = true;
          first[next++] = v;
        }
    }
    EXPECT_EQ(apply_permutation(g, Permutation(first)), back);
  }
}

TEST(Shuffle, PreservesEdgesAndDegreesDeterministically) {
  const AdjacencyMatrix g = sample_graph(catalog_graphon(3), 90, 4).graph;
  const AdjacencyMatrix s = shuffle_nodes(g, 17);
  EXPECT_EQ(s, shuffle_nodes(g, 17));
  EXPECT_NE(s, shuffle_nodes(g, 18));
  EXPECT_EQ(s.ones(), g.ones());
  auto d1 = empirical_degrees(g), d2 = empirical_degrees(s);
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  EXPECT_EQ(d1, d2);
}

TEST(RandomPermutation, RoughlyUniform) {
  // Position of element 0 over many seeds should be close to uniform on 0..4.
  std::vector<int> counts(5, 0);
  for (std::uint64_t seed = 0; seed < 5000; ++seed) {
    const Permutation p = random_permutation(5, seed);
    counts[std::find(p.map().begin(), p.map().end(), 0u) - p.map().begin()]++;
  }
  for (const int c : counts) EXPECT_NEAR(c, 1000, 4 * std::sqrt(1000 * 0.8));
}

TEST(ExportGrid, PgmPixels) {
  Grid half(1, 1);
  half << 0.5;
  EXPECT_EQ(export_grid(half, GridFormat::Pgm), std::string("P5\n1 1\n255\n") + static_cast<char>(128));
  Grid cross(2, 2);
  cross << 0, 1, 1, 0;
  const std::string pgm = export_grid(cross, GridFormat::Pgm);
  EXPECT_EQ(pgm.substr(0, 11), "P5\n2 2\n255\n");
  EXPECT_EQ(pgm.substr(11), std::string("\x00\xff\xff\x00", 4));
  Grid bad(1, 1);
  bad << 1.2;
  EXPECT_THROW(export_grid(bad, GridFormat::Pgm), InputError);
}

TEST(ExportGrid, CsvRoundTrip) {
  const Grid g = oracle::random_grid(6, 12);
  const std::string csv = export_grid(g, GridFormat::Csv);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  const Grid back = parse_grid_csv(csv);
  EXPECT_EQ(back, g);  // shortest round-trip formatting is exact
  EXPECT_THROW(parse_grid_csv("1,2\n3\n"), ParseError);
  EXPECT_THROW(parse_grid_format("png"), std::invalid_argument);
}

TEST(SummaryFiles, CsvAndJsonShapes) {
  BenchmarkSummary s{{1, 200, Estimator::Sas, 50, 6.5e-4, 5e-5, 3.0}, {1, 200, Estimator::Usvt, 50, 1e-3, 1e-4, 9.0}};
  const std::string csv = summary_to_csv(s);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), kSummaryCsvHeader);
  EXPECT_NE(csv.find("1,200,SAS,50,0.00065,5e-05,3\n"), std::string::npos);
  const nlohmann::json j = summary_to_json(s);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[1]["estimator"], "USVT");
  EXPECT_EQ(j[0]["mean_mse"].get<double>(), 6.5e-4);
  EXPECT_EQ(j[0]["trials"].get<int>(), 50);
}
