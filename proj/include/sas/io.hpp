#pragma once

// Edge-list ingestion, grid export and benchmark report files.

#include "sas/adjacency.hpp"
#include "sas/bench.hpp"
#include "sas/errors.hpp"
#include "sas/grid.hpp"
#include "sas/permutation.hpp"
#include "sas/pipeline.hpp"
#include "sas/random.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace sas {

struct EdgeList {
  std::size_t n = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  bool directed = true;
};

// SNAP-style text: '#' comment lines, data lines of two whitespace-separated
// non-negative integers. Node ids are compacted to 0..n-1 in order of first
// appearance; duplicate pairs and self-loops are dropped.
inline EdgeList parse_edge_list(std::istream& in, bool directed = true) {
  EdgeList out;
  out.directed = directed;
  std::unordered_map<std::uint64_t, std::size_t> ids;
  std::unordered_set<std::uint64_t> seen_pairs;
  auto compact = [&](std::uint64_t raw) {
    auto [it, inserted] = ids.try_emplace(raw, ids.size());
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    const auto first = sv.find_first_not_of(" \t");
    if (first == std::string_view::npos) continue;
    sv.remove_prefix(first);
    if (sv.front() == '#') continue;

    std::uint64_t raw[2];
    const char* p = sv.data();
    const char* end = sv.data() + sv.size();
    for (int f = 0; f < 2; ++f) {
      while (p < end && (*p == ' ' || *p == '\t')) ++p;
      const auto [next, ec] = std::from_chars(p, end, raw[f]);
      if (ec != std::errc() || next == p)
        throw ParseError(line_no, "expected two non-negative integers, got '" + std::string(sv) + "'");
      p = next;
    }
    while (p < end && (*p == ' ' || *p == '\t')) ++p;
    if (p != end) throw ParseError(line_no, "trailing characters in '" + std::string(sv) + "'");

    const std::size_t a = compact(raw[0]);
    const std::size_t b = compact(raw[1]);
    if (a == b) continue;
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
    if (!seen_pairs.insert(key).second) continue;
    out.edges.emplace_back(a, b);
  }
  if (out.edges.empty()) throw InputError("edge list contains no edges");
  out.n = ids.size();
  return out;
}

inline EdgeList parse_edge_list(std::string_view text, bool directed = true) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in, directed);
}

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{8} << 30;  // 8 GiB

inline AdjacencyMatrix to_adjacency(const EdgeList& e, bool symmetrize, std::size_t memory_cap = kDefaultMemoryCap) {
  const std::size_t bytes = AdjacencyMatrix::storage_bytes(e.n);
  if (bytes > memory_cap)
    throw ResourceError("adjacency matrix for " + std::to_string(e.n) + " nodes needs " + std::to_string(bytes) +
                        " bytes, over the memory cap of " + std::to_string(memory_cap) + " bytes");
  AdjacencyMatrix g(e.n);
  for (const auto& [a, b] : e.edges) {
    if (a >= e.n || b >= e.n) throw InputError("edge endpoint outside node range");
    g.set(a, b);
    if (symmetrize) g.set(b, a);
  }
  return g;
}

// One "i j" line per one-entry; symmetric matrices list each edge once (i < j).
inline void write_edge_list(const AdjacencyMatrix& g, std::ostream& out, std::string_view comment = {}) {
  if (!comment.empty()) out << "# " << comment << '\n';
  const bool sym = g.is_symmetric();
  out << "# Nodes: " << g.size() << " Edges: " << (sym ? g.ones() / 2 : g.ones()) << '\n';
  for (std::size_t i = 0; i < g.size(); ++i)
    g.for_each_in_row(i, [&](std::size_t j) {
      if (!sym || i < j) out << i << ' ' << j << '\n';
    });
}

// Uniform random permutation (Fisher-Yates) for a given seed.
inline Permutation random_permutation(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::size_t> map(n);
  for (std::size_t i = 0; i < n; ++i) map[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(map[i - 1], map[rng.below(i)]);
  return Permutation(std::move(map));
}

inline AdjacencyMatrix shuffle_nodes(const AdjacencyMatrix& g, std::uint64_t seed) {
  return apply_permutation(g, random_permutation(g.size(), seed));
}

enum class GridFormat { Csv, Pgm };

inline GridFormat parse_grid_format(std::string_view s) {
  if (s == "csv" || s == "CSV") return GridFormat::Csv;
  if (s == "pgm" || s == "PGM") return GridFormat::Pgm;
  throw std::invalid_argument("unknown grid format '" + std::string(s) + "'");
}

// Shortest representation that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

// CSV: one line per row, comma separated, round-trip precision.
// PGM: binary P5, maxval 255, pixel = floor(255 v + 0.5), row-major.
inline std::string export_grid(const Grid& w, GridFormat format) {
  std::string out;
  if (format == GridFormat::Csv) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        if (j) out += ',';
        out += format_double(w(i, j));
      }
      out += '\n';
    }
    return out;
  }
  if (!all_in_unit(w) || !w.allFinite()) throw InputError("PGM export needs values in [0, 1]");
  out = "P5\n" + std::to_string(w.cols()) + " " + std::to_string(w.rows()) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(w.size()));
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      out += static_cast<char>(static_cast<unsigned char>(std::floor(255.0 * w(i, j) + 0.5)));
  return out;
}

inline Grid parse_grid_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      double v;
      const auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) throw ParseError(line_no, "bad number in grid CSV");
      row.push_back(v);
      p = next;
      if (p == end) break;
      if (*p != ',') throw ParseError(line_no, "expected ',' in grid CSV");
      ++p;
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw ParseError(line_no, "ragged grid CSV");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Grid();
  Grid g(idx(rows.size()), idx(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) g(idx(i), idx(j)) = rows[i][j];
  return g;
}

inline constexpr std::string_view kSummaryCsvHeader = "graphon_id,n,estimator,trials,mean_mse,std_mse,mean_wall_ms";

inline std::string summary_to_csv(const BenchmarkSummary& s) {
  std::string out(kSummaryCsvHeader);
  out += '\n';
  for (const SummaryRow& r : s) {
    out += std::to_string(r.graphon_id) + ',' + std::to_string(r.n) + ',' + std::string(to_string(r.estimator)) +
           ',' + std::to_string(r.trials) + ',' + format_double(r.mean_mse) + ',' + format_double(r.std_mse) + ',' +
           format_double(r.mean_wall_ms) + '\n';
  }
  return out;
}

inline nlohmann::json summary_to_json(const BenchmarkSummary& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const SummaryRow& r : s) {
    arr.push_back({{"graphon_id", r.graphon_id},
                   {"n", r.n},
                   {"estimator", std::string(to_string(r.estimator))},
                   {"trials", r.trials},
                   {"mean_mse", r.mean_mse},
                   {"std_mse", r.std_mse},
                   {"mean_wall_ms", r.mean_wall_ms}});
  }
  return arr;
}

}  // namespace sas
