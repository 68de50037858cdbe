/// @file gmres.hpp
/// @brief Restarted GMRES(m) with modified Gram-Schmidt Arnoldi and Givens
/// rotations, driving SpMV through a swappable executor.
///
/// One iteration is one Arnoldi step and costs one executor call. Each
/// restart (and the final solution) costs one more call to form the true
/// residual b - A x. The solver stops once that true residual satisfies
/// ||b - A x|| / ||b|| <= tol, or after max_iters iterations.

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cspmv/config.hpp"
#include "cspmv/matrix.hpp"
#include "cspmv/solve_report.hpp"

namespace cspmv {

struct GmresParams {
  int restart = 30;
  double tol = 1e-8;
  std::size_t max_iters = 10000;
  /// When set, callers building a right-hand side draw it uniformly from
  /// [-1, 1] with this seed instead of using A * ones.
  std::optional<std::uint64_t> seed;

  /// Throws std::invalid_argument unless restart >= 1 and 0 < tol < 1.
  void validate() const;
};

/// NaN/Inf in the iteration, or a breakdown that leaves the residual above tol.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The operator GMRES multiplies with. at_boundary() is the only point where
/// an implementation may change its kernel or matrix representation.
class SpmvExecutor {
 public:
  virtual ~SpmvExecutor() = default;
  virtual void apply(std::span<const double> x, std::span<double> y) = 0;
  /// Called after iteration `completed` (>= 1) and before the next one.
  virtual void at_boundary(std::size_t completed) { (void)completed; }
  virtual const SpmvConfig& active_config() const = 0;
};

using SharedMatrix = std::shared_ptr<const AnyMatrix>;

/// Runs one fixed configuration. The matrix must already be in cfg.format.
class FixedExecutor : public SpmvExecutor {
 public:
  FixedExecutor(SharedMatrix matrix, const SpmvConfig& cfg, int workers = 0);
  void apply(std::span<const double> x, std::span<double> y) override;
  const SpmvConfig& active_config() const override { return cfg_; }

 private:
  SharedMatrix matrix_;
  SpmvConfig cfg_;
  int workers_;
};

struct GmresResult {
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  double final_relative_residual = 0.0;
  std::vector<double> x;
};

/// Core iteration over an abstract executor of dimension n.
GmresResult gmres(std::size_t n, std::span<const double> b, const GmresParams& p,
                  SpmvExecutor& exec);

/// Solves with a single configuration; the timeline holds one entry.
SolveReport gmres_solve(SharedMatrix m, std::span<const double> b,
                        const GmresParams& p, const SpmvConfig& cfg = kDefaultConfig,
                        int workers = 0);

/// A * ones, or a seeded uniform [-1, 1] vector when p.seed is set.
std::vector<double> make_rhs(const CooMatrix& m, const GmresParams& p);

}  // namespace cspmv
