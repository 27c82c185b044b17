#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace sas {

// Dense square real grid: histograms, TV iterates, estimates, discretised
// graphons. Indexed (row, column).
using Grid = Eigen::MatrixXd;

inline Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

inline Grid clip_unit(const Grid& g) { return g.cwiseMax(0.0).cwiseMin(1.0); }

inline bool all_in_unit(const Grid& g) {
  return g.size() == 0 || (g.minCoeff() >= 0.0 && g.maxCoeff() <= 1.0);
}

}  // namespace sas
