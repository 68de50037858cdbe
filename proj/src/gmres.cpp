#include "cspmv/gmres.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "cspmv/convert.hpp"
#include "cspmv/kernels.hpp"

namespace cspmv {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void require_finite(double v, const char* what, std::size_t iteration) {
  if (!std::isfinite(v)) {
    throw NumericalError(std::string("non-finite ") + what + " at iteration " +
                         std::to_string(iteration));
  }
}

}  // namespace

void GmresParams::validate() const {
  if (restart < 1) throw std::invalid_argument("restart must be >= 1");
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("tol must lie in (0, 1)");
}

FixedExecutor::FixedExecutor(SharedMatrix matrix, const SpmvConfig& cfg, int workers)
    : matrix_(std::move(matrix)), cfg_(cfg), workers_(workers) {
  KernelRegistry::instance().resolve(cfg_);
  if (format_of(*matrix_) != cfg_.format) {
    throw UnsupportedConfig("matrix is not stored as " +
                            std::string(to_string(cfg_.format)));
  }
}

void FixedExecutor::apply(std::span<const double> x, std::span<double> y) {
  execute_spmv(cfg_, *matrix_, x, y, workers_);
}

GmresResult gmres(std::size_t n, std::span<const double> b, const GmresParams& p,
                  SpmvExecutor& exec) {
  p.validate();
  if (b.size() != n) throw DimensionMismatch("right-hand side length differs from n");

  GmresResult out;
  out.x.assign(n, 0.0);
  const double beta0 = norm2(b);
  require_finite(beta0, "right-hand side norm", 0);
  if (beta0 == 0.0) {
    out.converged = true;
    return out;
  }
  out.final_relative_residual = 1.0;
  if (p.max_iters == 0) return out;

  const auto m = static_cast<std::size_t>(p.restart);
  std::vector<double> basis((m + 1) * n);
  std::vector<double> hess((m + 1) * m, 0.0);  // hess[i * m + j] = H(i, j)
  std::vector<double> cs(m), sn(m), g(m + 1), y(m);
  std::vector<double> r(b.begin(), b.end());
  std::vector<double> ax(n);
  auto column = [&](std::size_t i) { return std::span<double>(basis).subspan(i * n, n); };
  auto h = [&](std::size_t i, std::size_t j) -> double& { return hess[i * m + j]; };

  double beta = beta0;
  std::size_t it = 0;
  while (true) {
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;
    {
      auto v0 = column(0);
      for (std::size_t i = 0; i < n; ++i) v0[i] = r[i] / beta;
    }

    std::size_t used = 0;
    bool breakdown = false;
    for (std::size_t j = 0; j < m; ++j) {
      if (it > 0) exec.at_boundary(it);
      ++it;
      auto w = column(j + 1);
      exec.apply(column(j), w);
      const double w_norm = norm2(w);
      for (std::size_t i = 0; i <= j; ++i) {
        const double hij = dot(w, column(i));
        h(i, j) = hij;
        axpy(-hij, column(i), w);
      }
      const double next = norm2(w);
      require_finite(next, "Arnoldi norm", it);
      h(j + 1, j) = next;

      for (std::size_t i = 0; i < j; ++i) {
        const double a = h(i, j);
        const double c = h(i + 1, j);
        h(i, j) = cs[i] * a + sn[i] * c;
        h(i + 1, j) = -sn[i] * a + cs[i] * c;
      }
      const double a = h(j, j);
      const double c = h(j + 1, j);
      const double denom = std::hypot(a, c);
      cs[j] = denom == 0.0 ? 1.0 : a / denom;
      sn[j] = denom == 0.0 ? 0.0 : c / denom;
      h(j, j) = denom;
      h(j + 1, j) = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      const double estimate = std::abs(g[j + 1]) / beta0;
      require_finite(estimate, "residual estimate", it);
      out.residual_history.push_back(estimate);
      used = j + 1;

      breakdown = next <= std::numeric_limits<double>::epsilon() * w_norm;
      if (!breakdown) {
        for (double& wi : w) wi /= next;
      }
      if (estimate <= p.tol || breakdown || it >= p.max_iters) break;
    }

    for (std::size_t i = used; i-- > 0;) {
      double s = g[i];
      for (std::size_t k = i + 1; k < used; ++k) s -= h(i, k) * y[k];
      if (h(i, i) == 0.0) {
        throw NumericalError("singular least-squares system at iteration " +
                             std::to_string(it));
      }
      y[i] = s / h(i, i);
    }
    for (std::size_t i = 0; i < used; ++i) axpy(y[i], column(i), out.x);

    exec.apply(out.x, ax);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    beta = norm2(r);
    require_finite(beta, "residual norm", it);
    out.final_relative_residual = beta / beta0;
    out.iterations = it;
    if (out.final_relative_residual <= p.tol) {
      out.converged = true;
      break;
    }
    if (breakdown) {
      throw NumericalError("GMRES breakdown at iteration " + std::to_string(it) +
                           " with relative residual " +
                           std::to_string(out.final_relative_residual));
    }
    if (it >= p.max_iters) break;
  }
  return out;
}

SolveReport gmres_solve(SharedMatrix m, std::span<const double> b,
                        const GmresParams& p, const SpmvConfig& cfg, int workers) {
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  if (nrows_of(*m) != ncols_of(*m)) throw DimensionMismatch("matrix is not square");

  SolveReport report;
  report.mode = "default";
  double conversion = 0.0;
  if (format_of(*m) != cfg.format) {
    const auto t0 = Clock::now();
    m = std::make_shared<const AnyMatrix>(convert(*m, cfg.format));
    conversion = std::chrono::duration<double>(Clock::now() - t0).count();
    report.phase_seconds.emplace_back("conversion", conversion);
  }
  FixedExecutor exec(m, cfg, workers);
  const auto t0 = Clock::now();
  GmresResult r = gmres(static_cast<std::size_t>(nrows_of(*m)), b, p, exec);
  report.phase_seconds.emplace_back(
      "solve", std::chrono::duration<double>(Clock::now() - t0).count());

  report.converged = r.converged;
  report.iterations = r.iterations;
  report.residual_history = std::move(r.residual_history);
  report.final_relative_residual = r.final_relative_residual;
  report.solution = std::move(r.x);
  report.config_timeline.push_back({1, cfg, conversion, "initial"});
  report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return report;
}

std::vector<double> make_rhs(const CooMatrix& m, const GmresParams& p) {
  std::vector<double> b(static_cast<std::size_t>(m.nrows()), 0.0);
  if (p.seed) {
    std::mt19937_64 rng(*p.seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (double& v : b) v = dist(rng);
    return b;
  }
  for (std::size_t k = 0; k < m.nnz(); ++k) b[m.row_indices()[k]] += m.values()[k];
  return b;
}

}  // namespace cspmv
