#pragma once

#include "sas/adjacency.hpp"
#include "sas/errors.hpp"
#include "sas/grid.hpp"
#include "sas/pipeline.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace sas {

// (1/n^2) * sum of squared differences.
inline double mse(const Grid& estimate, const Grid& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("mse: grid sizes differ");
  if (estimate.size() == 0) throw std::invalid_argument("mse: empty grids");
  return (estimate - truth).squaredNorm() / static_cast<double>(estimate.size());
}

struct UsvtParams {
  // Singular values above threshold_factor * sqrt(n) are kept.
  double threshold_factor = 2.02;
};

// Universal singular value thresholding on the degree-sorted graph.
// Symmetric inputs use a symmetric eigendecomposition (|eigenvalues| are the
// singular values); directed inputs use a full SVD.
inline Grid usvt_estimate(const AdjacencyMatrix& g, const UsvtParams& params = {}) {
  const std::size_t n = g.size();
  if (n < 4) throw std::invalid_argument("usvt_estimate needs n >= 4");
  const AdjacencyMatrix sorted = apply_permutation(g, sort_permutation(empirical_degrees(g)));
  const Grid a = sorted.to_dense();
  const double threshold = params.threshold_factor * std::sqrt(static_cast<double>(n));

  Grid estimate = Grid::Zero(a.rows(), a.cols());
  if (sorted.is_symmetric()) {
    Eigen::SelfAdjointEigenSolver<Grid> es(a);
    if (es.info() != Eigen::Success) throw NumericalFailure("usvt_estimate: eigendecomposition failed");
    const auto& vals = es.eigenvalues();
    const auto& vecs = es.eigenvectors();
    for (Eigen::Index i = 0; i < vals.size(); ++i)
      if (std::abs(vals(i)) > threshold) estimate.noalias() += vals(i) * vecs.col(i) * vecs.col(i).transpose();
  } else {
    Eigen::BDCSVD<Grid> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalFailure("usvt_estimate: SVD failed");
    const auto& sv = svd.singularValues();
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv(i) > threshold) estimate.noalias() += sv(i) * svd.matrixU().col(i) * svd.matrixV().col(i).transpose();
  }
  if (!estimate.allFinite()) throw NumericalFailure("usvt_estimate: non-finite reconstruction");
  return clip_unit(estimate);
}

// Sort -> histogram -> upsample, with no TV smoothing.
inline Grid hist_only_estimate(const AdjacencyMatrix& g, std::size_t h) {
  const std::size_t n = g.size();
  const Grid hist = block_histogram(apply_permutation(g, sort_permutation(empirical_degrees(g))), h);
  return kron_upsample(hist, h, n);
}

}  // namespace sas
