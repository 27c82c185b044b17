#pragma once

// Isotropic total-variation denoising on a k x k grid,
//
//   minimise  mu/2 ||r - H||^2 + ||D r||_*,
//
// solved by ADMM with the splitting u = D r. Each iteration runs
//
//   r <- (mu + rho D^T D)^{-1} (mu H + rho D^T u - D^T z)   (spectral solve)
//   u <- shrink(D r + z / rho, 1 / rho)
//   z <- z - rho (u - D r)
//
// D stacks forward differences in both directions. With periodic boundaries
// they wrap around and D^T D is diagonalised by the DFT; with Neumann
// boundaries the difference across the last row/column is zero and D^T D is
// diagonalised by the 2-D DCT-II.

#include "sas/errors.hpp"
#include "sas/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace sas {

enum class Boundary { Periodic, Neumann };

inline std::string to_string(Boundary b) { return b == Boundary::Periodic ? "periodic" : "neumann"; }

inline Boundary parse_boundary(const std::string& name) {
  if (name == "periodic") return Boundary::Periodic;
  if (name == "neumann") return Boundary::Neumann;
  throw std::invalid_argument("unknown boundary '" + name + "' (expected periodic or neumann)");
}

// Horizontal (row index) and vertical (column index) forward differences.
struct DiffField {
  Grid gx;
  Grid gy;

  static DiffField zero(Eigen::Index k) { return {Grid::Zero(k, k), Grid::Zero(k, k)}; }

  double squared_norm() const { return gx.squaredNorm() + gy.squaredNorm(); }
};

struct AdmmParams {
  double mu = 10.0;
  double rho = 20.0;
  int max_iters = 500;
  double tol = 1e-6;
  Boundary boundary = Boundary::Periodic;

  // rho defaults to 2 * mu.
  static AdmmParams with_mu(double mu) {
    AdmmParams p;
    p.mu = mu;
    p.rho = 2.0 * mu;
    return p;
  }

  void validate() const {
    if (!(mu > 0.0)) throw std::invalid_argument("ADMM mu must be > 0");
    if (!(rho > 0.0)) throw std::invalid_argument("ADMM rho must be > 0");
    if (max_iters < 1) throw std::invalid_argument("ADMM max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("ADMM tol must be > 0");
  }
};

struct AdmmResult {
  Grid solution;
  int iterations = 0;
  double final_residual = 0.0;  // last relative change of r
  std::vector<double> objective_trace;
};

namespace detail {

// Index stencils for the forward difference at i and the adjoint at i.
template <bool Neumann>
struct Stencil {
  Eigen::Index k;
  // Forward neighbour of i; Neumann maps the last index to itself (zero
  // difference).
  Eigen::Index next(Eigen::Index i) const {
    if constexpr (Neumann) return i + 1 == k ? i : i + 1;
    else return i + 1 == k ? 0 : i + 1;
  }
  // Backward neighbour of i, or -1 when no difference enters from behind.
  Eigen::Index prev(Eigen::Index i) const {
    if constexpr (Neumann) return i == 0 ? -1 : i - 1;
    else return i == 0 ? k - 1 : i - 1;
  }
  // Whether the difference stored at i is structurally present.
  bool live(Eigen::Index i) const { return !Neumann || i + 1 < k; }
};

template <bool Neumann>
DiffField grad_impl(const Grid& r) {
  const Eigen::Index k = r.rows();
  const Stencil<Neumann> s{k};
  DiffField d{Grid(k, k), Grid(k, k)};
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index jn = s.next(j);
    for (Eigen::Index i = 0; i < k; ++i) {
      d.gx(i, j) = r(s.next(i), j) - r(i, j);
      d.gy(i, j) = r(i, jn) - r(i, j);
    }
  }
  return d;
}

template <bool Neumann>
Grid adjoint_impl(const DiffField& f) {
  const Eigen::Index k = f.gx.rows();
  const Stencil<Neumann> s{k};
  Grid out(k, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index jp = s.prev(j);
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index ip = s.prev(i);
      double v = 0.0;
      if (ip >= 0) v += f.gx(ip, j);
      if (s.live(i)) v -= f.gx(i, j);
      if (jp >= 0) v += f.gy(i, jp);
      if (s.live(j)) v -= f.gy(i, j);
      out(i, j) = v;
    }
  }
  return out;
}

}  // namespace detail

inline DiffField grad(const Grid& r, Boundary b = Boundary::Periodic) {
  return b == Boundary::Periodic ? detail::grad_impl<false>(r) : detail::grad_impl<true>(r);
}

// D^T f, the adjoint of grad under the Frobenius inner product. With Neumann
// boundaries the entries of f on the last row (gx) / column (gy) do not enter.
inline Grid adjoint_grad(const DiffField& f, Boundary b = Boundary::Periodic) {
  return b == Boundary::Periodic ? detail::adjoint_impl<false>(f) : detail::adjoint_impl<true>(f);
}

// Discrete divergence, -D^T f.
inline Grid divergence(const DiffField& f, Boundary b = Boundary::Periodic) { return -adjoint_grad(f, b); }

inline double tv_norm(const Grid& r, Boundary b = Boundary::Periodic) {
  const DiffField d = grad(r, b);
  return (d.gx.array().square() + d.gy.array().square()).sqrt().sum();
}

inline double tv_objective(const Grid& r, const Grid& h, double mu, Boundary b = Boundary::Periodic) {
  return 0.5 * mu * (r - h).squaredNorm() + tv_norm(r, b);
}

// Pointwise magnitude soft-threshold; zero vectors map to zero.
inline DiffField shrink(const Grid& v1, const Grid& v2, double threshold) {
  if (threshold < 0.0) throw std::invalid_argument("shrink threshold must be >= 0");
  DiffField out{Grid(v1.rows(), v1.cols()), Grid(v2.rows(), v2.cols())};
  for (Eigen::Index i = 0; i < v1.size(); ++i) {
    const double a = v1.data()[i];
    const double b = v2.data()[i];
    const double m = std::sqrt(a * a + b * b);
    const double scale = m > 0.0 ? std::max(m - threshold, 0.0) / m : 0.0;
    out.gx.data()[i] = scale * a;
    out.gy.data()[i] = scale * b;
  }
  return out;
}

namespace detail {

// FFTW's planner is not re-entrant; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct FftwPlanDestroy {
  void operator()(fftw_plan p) const {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(p);
  }
};

using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;

// norm / (mu + rho * lambda) per frequency, recomputed only when mu or rho
// change (ADMM keeps both fixed for a whole solve).
class SpectralScale {
 public:
  const std::vector<double>& get(double mu, double rho, double norm, const std::vector<double>& lambda) {
    if (values_.size() != lambda.size() || mu != mu_ || rho != rho_) {
      values_.resize(lambda.size());
      for (std::size_t i = 0; i < lambda.size(); ++i) values_[i] = norm / (mu + rho * lambda[i]);
      mu_ = mu;
      rho_ = rho;
    }
    return values_;
  }

 private:
  double mu_ = 0.0, rho_ = 0.0;
  std::vector<double> values_;
};

// Writes mu H + D^T (rho u - z) into out (column-major k x k). With Neumann
// boundaries the entries of u and z across the last row (gx) and column (gy)
// are structurally zero throughout ADMM (D r is zero there, so the u- and
// z-steps keep them at zero), and the wraparound stencil then yields the
// Neumann adjoint exactly; one loop serves both boundaries.
inline void assemble_rhs(const Grid& mu_h, double rho, const DiffField& u, const DiffField& z, double* out) {
  const Eigen::Index k = mu_h.rows();
  auto wx = [&](Eigen::Index i, Eigen::Index j) { return rho * u.gx(i, j) - z.gx(i, j); };
  auto wy = [&](Eigen::Index i, Eigen::Index j) { return rho * u.gy(i, j) - z.gy(i, j); };
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index jp = (j == 0) ? k - 1 : j - 1;
    for (Eigen::Index i = 0; i < k; ++i) {
      const Eigen::Index ip = (i == 0) ? k - 1 : i - 1;
      out[j * k + i] = mu_h(i, j) + wx(ip, j) - wx(i, j) + wy(i, jp) - wy(i, j);
    }
  }
}

// One fused pass of the u- and z-steps: with d = D r,
// u = shrink(d + z / rho, 1 / rho) and z -= rho (u - d).
template <bool Neumann = false>
void shrink_and_ascend(const Grid& r, double rho, DiffField& u, DiffField& z) {
  const Eigen::Index k = r.rows();
  const Stencil<Neumann> s{k};
  const double inv_rho = 1.0 / rho;
  for (Eigen::Index j = 0; j < k; ++j) {
    const Eigen::Index jn = s.next(j);
    for (Eigen::Index i = 0; i < k; ++i) {
      const double dx = r(s.next(i), j) - r(i, j);
      const double dy = r(i, jn) - r(i, j);
      const double a = dx + z.gx(i, j) * inv_rho;
      const double b = dy + z.gy(i, j) * inv_rho;
      const double m = std::sqrt(a * a + b * b);
      const double scale = m > 0.0 ? std::max(m - inv_rho, 0.0) / m : 0.0;
      u.gx(i, j) = scale * a;
      u.gy(i, j) = scale * b;
      z.gx(i, j) -= rho * (u.gx(i, j) - dx);
      z.gy(i, j) -= rho * (u.gy(i, j) - dy);
    }
  }
}

}  // namespace detail

// Solves (mu I + rho D^T D) r = rhs on a periodic k x k grid. The operator is
// diagonal in the 2-D DFT basis with eigenvalues mu + rho * lambda(p, q).
class PeriodicSolver {
 public:
  static constexpr std::size_t kMeasureThreshold = 512;

  explicit PeriodicSolver(std::size_t k)
      : k_(checked_size(k)),
        half_(k / 2 + 1),
        real_(static_cast<double*>(fftw_malloc(sizeof(double) * k * k))),
        spectrum_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * k * half_))),
        lambda_(k * half_) {
    if (!real_ || !spectrum_) throw std::bad_alloc();
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      const int n = static_cast<int>(k);
      // Measured plans cost seconds to build but halve execution time; only
      // large grids, which run hundreds of transforms, recover that cost.
      const unsigned flags = k >= kMeasureThreshold ? FFTW_MEASURE : FFTW_ESTIMATE;
      forward_.reset(fftw_plan_dft_r2c_2d(n, n, real_.get(), spectrum_.get(), flags));
      backward_.reset(fftw_plan_dft_c2r_2d(n, n, spectrum_.get(), real_.get(), flags));
    }
    if (!forward_ || !backward_) throw NumericalFailure("FFTW plan creation failed");
    for (std::size_t p = 0; p < k_; ++p)
      for (std::size_t q = 0; q < half_; ++q) lambda_[p * half_ + q] = eigenvalue(p, q, k_);
  }

  // Eigenvalue of D^T D for frequency (p, q): 4 (sin^2(pi p/k) + sin^2(pi q/k)).
  static double eigenvalue(std::size_t p, std::size_t q, std::size_t k) {
    const double sp = std::sin(std::numbers::pi * static_cast<double>(p) / static_cast<double>(k));
    const double sq = std::sin(std::numbers::pi * static_cast<double>(q) / static_cast<double>(k));
    return 4.0 * (sp * sp + sq * sq);
  }

  std::size_t size() const noexcept { return k_; }

  // The operator commutes with transposition, so a column-major grid can be
  // handed to FFTW (which reads it as the transpose) without reordering.
  Grid solve(const Grid& rhs, double mu, double rho) {
    const auto k = static_cast<Eigen::Index>(k_);
    if (rhs.rows() != k || rhs.cols() != k) throw std::invalid_argument("PeriodicSolver: rhs size mismatch");
    std::copy(rhs.data(), rhs.data() + rhs.size(), buffer());
    solve_in_place(mu, rho);
    Grid out(k, k);
    std::copy(buffer(), buffer() + out.size(), out.data());
    return out;
  }

  // Column-major k x k work buffer: write the right-hand side here, call
  // solve_in_place, read the solution back from the same place.
  double* buffer() noexcept { return real_.get(); }

  void solve_in_place(double mu, double rho) {
    fftw_execute(forward_.get());
    const std::vector<double>& scale = scale_.get(mu, rho, 1.0 / static_cast<double>(k_ * k_), lambda_);
    for (std::size_t i = 0; i < k_ * half_; ++i) {
      spectrum_.get()[i][0] *= scale[i];
      spectrum_.get()[i][1] *= scale[i];
    }
    fftw_execute(backward_.get());
  }

 private:
  static std::size_t checked_size(std::size_t k) {
    if (k < 1) throw std::invalid_argument("PeriodicSolver needs k >= 1");
    return k;
  }

  std::size_t k_;
  std::size_t half_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spectrum_;
  std::vector<double> lambda_;
  detail::SpectralScale scale_;
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
};

// Solves (mu I + rho D^T D) r = rhs with Neumann differences. The operator is
// diagonal in the 2-D DCT-II basis with eigenvalues mu + rho * lambda(p, q).
// The DCT is computed from one real 2-D FFT of the input with each axis
// reordered as (x0, x2, x4, ..., x5, x3, x1), which is about twice as fast as
// FFTW's strided r2r transforms on large grids; the inverse undoes the same
// steps.
class NeumannSolver {
 public:
  explicit NeumannSolver(std::size_t k)
      : k_(checked_size(k)),
        half_(k / 2 + 1),
        real_(static_cast<double*>(fftw_malloc(sizeof(double) * k * k))),
        work_(static_cast<double*>(fftw_malloc(sizeof(double) * k * k))),
        spectrum_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * k * half_))),
        coeff_(k * k),
        lambda_(k * k),
        order_(k),
        cos_(k),
        sin_(k) {
    if (!real_ || !work_ || !spectrum_) throw std::bad_alloc();
    {
      std::lock_guard lock(detail::fftw_planner_mutex());
      const int n = static_cast<int>(k);
      const unsigned flags = k >= PeriodicSolver::kMeasureThreshold ? FFTW_MEASURE : FFTW_ESTIMATE;
      forward_.reset(fftw_plan_dft_r2c_2d(n, n, work_.get(), spectrum_.get(), flags));
      backward_.reset(fftw_plan_dft_c2r_2d(n, n, spectrum_.get(), work_.get(), flags));
    }
    if (!forward_ || !backward_) throw NumericalFailure("FFTW plan creation failed");
    for (std::size_t p = 0; p < k_; ++p)
      for (std::size_t q = 0; q < k_; ++q) lambda_[p * k_ + q] = eigenvalue(p, q, k_);
    for (std::size_t m = 0; m < k_; ++m) {
      order_[m] = 2 * m < k_ ? 2 * m : 2 * (k_ - 1 - m) + 1;
      const double angle = -std::numbers::pi * static_cast<double>(m) / (2.0 * static_cast<double>(k_));
      cos_[m] = std::cos(angle);
      sin_[m] = std::sin(angle);
    }
  }

  // Eigenvalue of D^T D for frequency (p, q): 4 (sin^2(pi p/2k) + sin^2(pi q/2k)).
  static double eigenvalue(std::size_t p, std::size_t q, std::size_t k) {
    const double sp = std::sin(std::numbers::pi * static_cast<double>(p) / (2.0 * static_cast<double>(k)));
    const double sq = std::sin(std::numbers::pi * static_cast<double>(q) / (2.0 * static_cast<double>(k)));
    return 4.0 * (sp * sp + sq * sq);
  }

  std::size_t size() const noexcept { return k_; }

  Grid solve(const Grid& rhs, double mu, double rho) {
    const auto k = static_cast<Eigen::Index>(k_);
    if (rhs.rows() != k || rhs.cols() != k) throw std::invalid_argument("NeumannSolver: rhs size mismatch");
    std::copy(rhs.data(), rhs.data() + rhs.size(), buffer());
    solve_in_place(mu, rho);
    Grid out(k, k);
    std::copy(buffer(), buffer() + out.size(), out.data());
    return out;
  }

  // Same contract as PeriodicSolver::buffer.
  double* buffer() noexcept { return real_.get(); }

  void solve_in_place(double mu, double rho) {
    const std::size_t k = k_;
    double* x = real_.get();
    double* v = work_.get();
    const std::size_t evens = (k + 1) / 2;
    for (std::size_t a = 0; a < k; ++a) {
      const double* row = x + order_[a] * k;
      double* dst = v + a * k;
      for (std::size_t m = 0; m < evens; ++m) dst[m] = row[2 * m];
      for (std::size_t m = evens; m < k; ++m) dst[m] = row[2 * (k - m) - 1];
    }
    fftw_execute(forward_.get());

    // DCT-II coefficients (FFTW REDFT10 scaling) from the half-plane DFT,
    // divided by the operator's eigenvalues and by k^2 for the unnormalised
    // inverse FFT. Complex products are written out in real arithmetic.
    const fftw_complex* spec = spectrum_.get();
    const std::vector<double>& scale = scale_.get(mu, rho, 1.0 / static_cast<double>(k * k), lambda_);
    for (std::size_t a = 0; a < k; ++a) {
      const fftw_complex* here = spec + a * half_;
      const fftw_complex* mirror = spec + ((k - a) % k) * half_;
      // DFT value at (a, b) for any b in [0, k).
      auto dft = [&](std::size_t b, double& re, double& im) {
        if (b < half_) {
          re = here[b][0];
          im = here[b][1];
        } else {
          re = mirror[k - b][0];
          im = -mirror[k - b][1];
        }
      };
      const double ca = cos_[a], sa = sin_[a];
      double* out = coeff_.data() + a * k;
      const double* sc = scale.data() + a * k;
      for (std::size_t b = 0; b < k; ++b) {
        double r1, i1, r2, i2;
        dft(b, r1, i1);
        dft(b == 0 ? 0 : k - b, r2, i2);
        const double c = cos_[b], s = sin_[b];
        const double tr = c * (r1 + r2) + s * (i2 - i1);
        const double ti = c * (i1 + i2) + s * (r1 - r2);
        out[b] = 2.0 * (ca * tr - sa * ti) * sc[b];
      }
    }

    // Inverse: rebuild the half-plane DFT of the reordered solution.
    fftw_complex* dst = spectrum_.get();
    const double* z = coeff_.data();
    for (std::size_t a = 0; a < k; ++a) {
      const double* za = z + a * k;
      const double* zm = a == 0 ? nullptr : z + (k - a) * k;  // row k - a; row k is zero
      for (std::size_t b = 0; b < half_; ++b) {
        const double z00 = za[b];
        const double z01 = b == 0 ? 0.0 : za[k - b];
        const double z10 = zm ? zm[b] : 0.0;
        const double z11 = zm && b != 0 ? zm[k - b] : 0.0;
        const double wr = z00 - z11, wi = -(z10 + z01);
        const double pr = cos_[a] * cos_[b] - sin_[a] * sin_[b];
        const double pi = cos_[a] * sin_[b] + sin_[a] * cos_[b];
        dst[a * half_ + b][0] = 0.25 * (pr * wr + pi * wi);
        dst[a * half_ + b][1] = 0.25 * (pr * wi - pi * wr);
      }
    }
    fftw_execute(backward_.get());
    for (std::size_t a = 0; a < k; ++a) {
      double* row = x + order_[a] * k;
      const double* src = v + a * k;
      for (std::size_t m = 0; m < evens; ++m) row[2 * m] = src[m];
      for (std::size_t m = evens; m < k; ++m) row[2 * (k - m) - 1] = src[m];
    }
  }

 private:
  static std::size_t checked_size(std::size_t k) {
    if (k < 1) throw std::invalid_argument("NeumannSolver needs k >= 1");
    return k;
  }

  std::size_t k_;
  std::size_t half_;
  std::unique_ptr<double, detail::FftwFree> real_;
  std::unique_ptr<double, detail::FftwFree> work_;
  std::unique_ptr<fftw_complex, detail::FftwFree> spectrum_;
  std::vector<double> coeff_;
  std::vector<double> lambda_;
  detail::SpectralScale scale_;
  std::vector<std::size_t> order_;
  std::vector<double> cos_, sin_;  // twiddles exp(-i pi m / 2k)
  detail::FftwPlan forward_;
  detail::FftwPlan backward_;
};

// Exact minimiser of the quadratic r-subproblem.
inline Grid solve_r_subproblem(const Grid& h, const DiffField& u, const DiffField& z, double mu, double rho,
                               Boundary b = Boundary::Periodic) {
  if (!(mu > 0.0)) throw std::invalid_argument("r-subproblem needs mu > 0");
  if (rho < 0.0) throw std::invalid_argument("r-subproblem needs rho >= 0");
  if (rho == 0.0) return h;
  const Grid rhs = mu * h + rho * adjoint_grad(u, b) - adjoint_grad(z, b);
  const auto k = static_cast<std::size_t>(h.rows());
  if (b == Boundary::Neumann) return NeumannSolver(k).solve(rhs, mu, rho);
  return PeriodicSolver(k).solve(rhs, mu, rho);
}

namespace detail {

template <bool Neumann, class Solver>
void admm_iterate(const Grid& h, const AdmmParams& params, bool record_objective, AdmmResult& result) {
  const double mu = params.mu;
  const double rho = params.rho;
  const Eigen::Index k = h.rows();
  Solver solver(static_cast<std::size_t>(k));

  Grid r = h;
  DiffField u = grad(h, params.boundary);
  DiffField z = DiffField::zero(k);
  const Grid mu_h = mu * h;

  for (int t = 0; t < params.max_iters; ++t) {
    assemble_rhs(mu_h, rho, u, z, solver.buffer());
    solver.solve_in_place(mu, rho);

    // Copy r_{t+1} out while measuring ||r_{t+1} - r_t|| and ||r_t||.
    const double* next = solver.buffer();
    double diff2 = 0.0, norm2 = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double d = next[i] - r.data()[i];
      diff2 += d * d;
      norm2 += r.data()[i] * r.data()[i];
      r.data()[i] = next[i];
    }
    shrink_and_ascend<Neumann>(r, rho, u, z);

    const double change = std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-12);
    // A non-finite u or z reaches the next r through the FFT, so checking the
    // change catches it within one iteration.
    if (!std::isfinite(change))
      throw NumericalFailure("admm_solve: non-finite iterate at iteration " + std::to_string(t + 1));
    result.iterations = t + 1;
    result.final_residual = change;
    if (record_objective) result.objective_trace.push_back(tv_objective(r, h, mu, params.boundary));
    // The first r-step reproduces H (u0 = D H, z0 = 0), so its change is 0.
    if (t >= 1 && change < params.tol) break;
  }
  result.solution = std::move(r);
}

}  // namespace detail

inline AdmmResult admm_solve(const Grid& h, const AdmmParams& params, bool record_objective = false) {
  params.validate();
  if (h.rows() != h.cols() || h.rows() < 1) throw std::invalid_argument("admm_solve needs a non-empty square grid");
  if (!h.allFinite()) throw NumericalFailure("admm_solve: input histogram has non-finite values");

  AdmmResult result;
  // A grid with zero total variation already minimises the objective.
  if (tv_norm(h, params.boundary) == 0.0) {
    result.solution = h;
    result.iterations = 1;
    if (record_objective) result.objective_trace.push_back(0.0);
    return result;
  }
  if (params.boundary == Boundary::Neumann)
    detail::admm_iterate<true, NeumannSolver>(h, params, record_objective, result);
  else
    detail::admm_iterate<false, PeriodicSolver>(h, params, record_objective, result);
  return result;
}

}  // namespace sas
