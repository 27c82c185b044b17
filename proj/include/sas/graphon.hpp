#pragma once

#include "sas/adjacency.hpp"
#include "sas/grid.hpp"
#include "sas/permutation.hpp"
#include "sas/random.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sas {

// A measurable map [0,1]^2 -> [0,1].
struct Graphon {
  std::function<double(double, double)> evaluate;
  std::optional<int> id;
  bool symmetric = true;

  double operator()(double u, double v) const { return evaluate(u, v); }
};

inline constexpr int kCatalogSize = 10;

// The ten test graphons (ids 1..10) with low-rank (1-5) and full-rank (6-10)
// members.
inline Graphon catalog_graphon(int id) {
  using std::exp;
  using std::log;
  using std::max;
  using std::min;
  using std::pow;
  using std::sqrt;
  std::function<double(double, double)> f;
  switch (id) {
    case 1: f = [](double u, double v) { return u * v; }; break;
    case 2: f = [](double u, double v) { return exp(-(pow(u, 0.7) + pow(v, 0.7))); }; break;
    case 3: f = [](double u, double v) { return 0.25 * (u * u + v * v + sqrt(u) + sqrt(v)); }; break;
    case 4: f = [](double u, double v) { return 0.5 * (u + v); }; break;
    case 5: f = [](double u, double v) { return 1.0 / (1.0 + exp(-10.0 * (u * u + v * v))); }; break;
    case 6: f = [](double u, double v) { return std::abs(u - v); }; break;
    case 7:
      f = [](double u, double v) {
        const double hi = max(u, v), lo = min(u, v);
        return 1.0 / (1.0 + exp(-(hi * hi + lo * lo * lo * lo)));
      };
      break;
    case 8: f = [](double u, double v) { return exp(-pow(max(u, v), 0.75)); }; break;
    case 9: f = [](double u, double v) { return exp(-0.5 * (min(u, v) + sqrt(u) + sqrt(v))); }; break;
    case 10: f = [](double u, double v) { return log(1.0 + 0.5 * max(u, v)); }; break;
    default:
      throw std::invalid_argument("catalog graphon id must be in 1..10, got " + std::to_string(id));
  }
  return Graphon{std::move(f), id, true};
}

inline Graphon constant_graphon(double c) {
  if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("constant graphon value outside [0,1]");
  return Graphon{[c](double, double) { return c; }, std::nullopt, true};
}

struct LatentSample {
  std::vector<double> u;
  std::uint64_t seed = 0;
};

struct SampledGraph {
  AdjacencyMatrix graph;
  LatentSample latent;
};

// Two-stage exchangeable sampler: U_i ~ Uniform[0,1) iid, then each pair is an
// edge with probability w(U_i, U_j). Symmetric graphons fill the upper
// triangle (row-major) and mirror it; others draw every off-diagonal pair.
// The diagonal stays zero.
inline SampledGraph sample_graph(const Graphon& w, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("sample_graph needs n >= 2");
  Rng rng(seed);
  SampledGraph out{AdjacencyMatrix(n), LatentSample{std::vector<double>(n), seed}};
  for (double& u : out.latent.u) u = rng.uniform();

  const auto& u = out.latent.u;
  auto probability = [&](std::size_t i, std::size_t j) {
    const double p = w(u[i], u[j]);
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("graphon value outside [0,1] at (" + std::to_string(u[i]) + ", " +
                                  std::to_string(u[j]) + ")");
    return p;
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (w.symmetric) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (rng.uniform() < probability(i, j)) {
          out.graph.set(i, j);
          out.graph.set(j, i);
        }
      }
    } else {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        if (rng.uniform() < probability(i, j)) out.graph.set(i, j);
      }
    }
  }
  return out;
}

// Midpoint-rule discretisation: value (i, j) = w((i+0.5)/n, (j+0.5)/n).
inline Grid discretize(const Graphon& w, std::size_t n) {
  if (n < 1) throw std::invalid_argument("discretize needs n >= 1");
  Grid g(idx(n), idx(n));
  const double inv = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      g(idx(i), idx(j)) = w((static_cast<double>(i) + 0.5) * inv, (static_cast<double>(j) + 0.5) * inv);
  return g;
}

// Block means of an n x n grid over h x h tiles (k = floor(n/h) tiles per
// side; trailing n mod h rows and columns are ignored).
inline Grid step_approximation(const Grid& grid, std::size_t h) {
  if (grid.rows() != grid.cols()) throw std::invalid_argument("step_approximation needs a square grid");
  const auto n = static_cast<std::size_t>(grid.rows());
  if (h < 1 || h > n) throw std::invalid_argument("step_approximation needs 1 <= h <= n");
  const std::size_t k = n / h;
  Grid out(idx(k), idx(k));
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b)
      out(idx(a), idx(b)) = grid.block(idx(a * h), idx(b * h), idx(h), idx(h)).mean();
  return out;
}

// Degree function g(u) = integral over v of w(u, v), midpoint quadrature.
inline std::vector<double> degree_function(const Graphon& w, std::span<const double> u,
                                           std::size_t quadrature_points = 1024) {
  std::vector<double> g(u.size());
  const double inv = 1.0 / static_cast<double>(quadrature_points);
  for (std::size_t i = 0; i < u.size(); ++i) {
    double sum = 0.0;
    for (std::size_t q = 0; q < quadrature_points; ++q) sum += w(u[i], (static_cast<double>(q) + 0.5) * inv);
    g[i] = sum * inv;
  }
  return g;
}

// Oracle permutation sorting nodes by their latent position U_i.
inline Permutation latent_order(const LatentSample& latent) {
  std::vector<std::size_t> order(latent.u.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return latent.u[a] < latent.u[b]; });
  return Permutation(std::move(order));
}

// Oracle permutation sorting nodes by their expected degree g(U_i) (ties by
// U_i). This is the node order the degree sort converges to, i.e. the
// canonical representation's orientation.
inline Permutation canonical_order(const Graphon& w, const LatentSample& latent) {
  const auto g = degree_function(w, latent.u);
  std::vector<std::size_t> order(latent.u.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (g[a] != g[b]) return g[a] < g[b];
    return latent.u[a] < latent.u[b];
  });
  return Permutation(std::move(order));
}

// Edge probabilities w(U_p(i), U_p(j)) with p = canonical_order. Ground
// truth for the MSE of degree-sorted estimators.
inline Grid canonical_truth(const Graphon& w, const LatentSample& latent) {
  const Permutation p = canonical_order(w, latent);
  const std::size_t n = p.size();
  Grid out(idx(n), idx(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out(idx(i), idx(j)) = w(latent.u[p[i]], latent.u[p[j]]);
  return out;
}

// Count of singular values above max(rows, cols) * eps * sigma_max.
inline std::size_t numerical_rank(const Grid& m) {
  if (m.size() == 0) return 0;
  Eigen::VectorXd sv;
  if (m.rows() == m.cols() && m.isApprox(m.transpose(), 0.0)) {
    Eigen::SelfAdjointEigenSolver<Grid> es(m, Eigen::EigenvaluesOnly);
    sv = es.eigenvalues().cwiseAbs();
  } else {
    Eigen::BDCSVD<Grid> svd(m);
    sv = svd.singularValues();
  }
  const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                     std::numeric_limits<double>::epsilon() * sv.maxCoeff();
  return static_cast<std::size_t>((sv.array() > tol).count());
}

}  // namespace sas
