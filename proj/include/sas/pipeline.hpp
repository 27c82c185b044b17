#pragma once

// Sorting-and-smoothing estimator: sort nodes by empirical degree, average
// the sorted adjacency matrix over h x h blocks, denoise the k x k histogram
// with total variation, and replicate each block back to n x n.

#include "sas/adjacency.hpp"
#include "sas/graphon.hpp"
#include "sas/grid.hpp"
#include "sas/permutation.hpp"
#include "sas/tv_admm.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace sas {

using DegreeVector = std::vector<std::size_t>;

inline DegreeVector empirical_degrees(const AdjacencyMatrix& g) {
  DegreeVector d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = g.row_sum(i);
  return d;
}

// Ascending by degree; equal degrees keep their original relative order.
inline Permutation sort_permutation(const DegreeVector& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  return Permutation(std::move(order));
}

// Result(i, j) = g(p[i], p[j]).
inline AdjacencyMatrix apply_permutation(const AdjacencyMatrix& g, const Permutation& p) {
  if (p.size() != g.size())
    throw std::invalid_argument("apply_permutation: permutation size " + std::to_string(p.size()) +
                                " does not match graph size " + std::to_string(g.size()));
  const Permutation inv = p.inverse();
  AdjacencyMatrix out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto row = out.row_words(i);
    g.for_each_in_row(p[i], [&](std::size_t j) {
      const std::size_t c = inv[j];
      row[c / 64] |= std::uint64_t{1} << (c % 64);
    });
  }
  return out;
}

// Means over disjoint h x h blocks of the top-left (k h) x (k h) submatrix,
// k = floor(n / h). Trailing n mod h rows and columns are discarded.
inline Grid block_histogram(const AdjacencyMatrix& a, std::size_t h) {
  const std::size_t n = a.size();
  if (h < 1 || h > n)
    throw std::invalid_argument("block_histogram: binwidth " + std::to_string(h) + " outside [1, " +
                                std::to_string(n) + "]");
  const std::size_t k = n / h;
  const std::size_t m = k * h;
  std::vector<double> counts(k * k, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    double* block_row = counts.data() + (i / h) * k;
    a.for_each_in_row(i, [&](std::size_t j) {
      if (j < m) block_row[j / h] += 1.0;
    });
  }
  Grid out(idx(k), idx(k));
  const double inv = 1.0 / static_cast<double>(h * h);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) out(idx(r), idx(c)) = counts[r * k + c] * inv;
  return out;
}

// Replicates each value of a k x k grid over an h x h tile; the n - k h
// trailing rows/columns repeat the last block row/column.
inline Grid kron_upsample(const Grid& w, std::size_t h, std::size_t n) {
  if (w.rows() != w.cols()) throw std::invalid_argument("kron_upsample needs a square grid");
  const auto k = static_cast<std::size_t>(w.rows());
  if (k < 1 || h < 1 || k * h > n || n >= (k + 1) * h)
    throw std::invalid_argument("kron_upsample: need k*h <= n < (k+1)*h, got k=" + std::to_string(k) +
                                " h=" + std::to_string(h) + " n=" + std::to_string(n));
  Grid out(idx(n), idx(n));
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t bj = std::min(j / h, k - 1);
    for (std::size_t i = 0; i < n; ++i) out(idx(i), idx(j)) = w(idx(std::min(i / h, k - 1)), idx(bj));
  }
  return out;
}

class BinwidthRule {
 public:
  // h = max(1, round(ln n)).
  static BinwidthRule log_n() { return BinwidthRule(0); }
  static BinwidthRule fixed(std::size_t h) {
    if (h < 1) throw std::invalid_argument("fixed binwidth must be >= 1");
    return BinwidthRule(h);
  }

  bool is_log_n() const noexcept { return fixed_ == 0; }

  std::size_t resolve(std::size_t n) const {
    std::size_t h = fixed_;
    if (is_log_n()) {
      const double ln = n > 0 ? std::log(static_cast<double>(n)) : 0.0;
      h = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(ln)));
    }
    if (h > n)
      throw std::invalid_argument("binwidth " + std::to_string(h) + " exceeds node count " + std::to_string(n));
    return h;
  }

 private:
  explicit BinwidthRule(std::size_t fixed) : fixed_(fixed) {}
  std::size_t fixed_;
};

// Default smoothing for the pipeline: mu = 10 with Neumann boundaries, which
// do not couple the low-degree and high-degree ends of the sorted grid.
inline AdmmParams default_sas_tv() {
  AdmmParams p = AdmmParams::with_mu(10.0);
  p.boundary = Boundary::Neumann;
  return p;
}

struct SasConfig {
  BinwidthRule binwidth = BinwidthRule::log_n();
  AdmmParams tv = default_sas_tv();
  bool truncate_remainder = true;  // the only supported remainder policy
  bool upsample = true;            // false leaves SasResult::estimate empty (large n)
};

struct SasResult {
  Grid estimate;     // n x n (empty when SasConfig::upsample is false)
  Grid smoothed;     // k x k TV solution, clipped to [0, 1]
  Grid histogram;    // k x k block means before smoothing
  Permutation permutation;
  std::size_t binwidth = 0;
  int admm_iterations = 0;
};

inline SasResult sas_estimate(const AdjacencyMatrix& g, const SasConfig& cfg) {
  const std::size_t n = g.size();
  if (n < 4) throw std::invalid_argument("sas_estimate needs n >= 4");
  if (!cfg.truncate_remainder) throw std::invalid_argument("only truncate_remainder = true is supported");
  const std::size_t h = cfg.binwidth.resolve(n);

  SasResult out;
  out.binwidth = h;
  out.permutation = sort_permutation(empirical_degrees(g));
  out.histogram = block_histogram(apply_permutation(g, out.permutation), h);
  AdmmResult tv = admm_solve(out.histogram, cfg.tv);
  out.admm_iterations = tv.iterations;
  out.smoothed = clip_unit(tv.solution);
  if (cfg.upsample) out.estimate = kron_upsample(out.smoothed, h, n);
  return out;
}

// Graph reordered by the true latent positions (simulation only).
inline AdjacencyMatrix oracle_sorted_graph(const AdjacencyMatrix& g, const LatentSample& latent) {
  if (latent.u.size() != g.size()) throw std::invalid_argument("oracle_sorted_graph: latent size mismatch");
  return apply_permutation(g, latent_order(latent));
}

}  // namespace sas
