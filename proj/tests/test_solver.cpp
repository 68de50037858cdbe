#include <cmath>

#include "cspmv/convert.hpp"
#include "cspmv/gmres.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspmv;

namespace {

SharedMatrix share(CooMatrix m) { return std::make_shared<const AnyMatrix>(std::move(m)); }

// Iteration count of the reference run for the 10x10 Poisson system below.
constexpr std::size_t kPoisson100Iterations = 15;

class NanExecutor : public SpmvExecutor {
 public:
  void apply(std::span<const double>, std::span<double> y) override {
    std::fill(y.begin(), y.end(), std::nan(""));
  }
  const SpmvConfig& active_config() const override { return kDefaultConfig; }
};

}  // namespace

TEST_CASE("identity converges in one iteration") {
  const std::vector<double> b{1, 2, 3};
  const SolveReport r = gmres_solve(share(oracle::identity(3)), b, {});
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  CHECK(oracle::max_abs_diff(r.solution, b) <= 1e-14);
  REQUIRE(r.config_timeline.size() == 1);
  CHECK(r.config_timeline[0].iteration == 1);
  CHECK(r.config_timeline[0].config == kDefaultConfig);
}

TEST_CASE("Poisson n=100 against a dense direct solve") {
  const CooMatrix a = oracle::poisson2d(10);
  GmresParams p;
  const std::vector<double> b = make_rhs(a, p);
  const SolveReport r = gmres_solve(share(a), b, p);
  CHECK(r.converged);
  CHECK(r.final_relative_residual <= 1e-8);
  CHECK(r.iterations == kPoisson100Iterations);
  CHECK(r.residual_history.size() == r.iterations);
  const auto direct = oracle::dense_solve(oracle::to_dense(a), b);
  CHECK(oracle::max_abs_diff(r.solution, direct) <= 1e-6);
  CHECK(oracle::max_abs_diff(r.solution, std::vector<double>(100, 1.0)) <= 1e-6);
}

TEST_CASE("every configuration solves the same system") {
  const CooMatrix a = oracle::poisson2d(12);
  GmresParams p;
  p.restart = 10;
  p.tol = 1e-10;
  const std::vector<double> b = make_rhs(a, p);
  const SolveReport base = gmres_solve(share(a), b, p);
  for (const SpmvConfig& cfg : enumerate_configs()) {
    const SolveReport r = gmres_solve(share(a), b, p, cfg);
    INFO(cfg.token());
    CHECK(r.converged);
    CHECK(oracle::rel_diff(r.solution, base.solution) <= 1e-6);
    CHECK(r.final_config() == cfg);
  }
}

TEST_CASE("restarts keep the residual decreasing") {
  const CooMatrix a = oracle::banded(400, 3);
  GmresParams p;
  p.restart = 5;
  p.tol = 1e-10;
  p.seed = 4;
  const SolveReport r = gmres_solve(share(a), make_rhs(a, p), p);
  CHECK(r.converged);
  CHECK(r.iterations > 5);
  for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
    CHECK(r.residual_history[i] <= r.residual_history[i - 1] * (1 + 1e-9));
  }
}

TEST_CASE("degenerate bounds and inputs") {
  const SharedMatrix eye = share(oracle::identity(4));
  GmresParams p;
  p.max_iters = 0;
  SolveReport r = gmres_solve(eye, std::vector<double>(4, 1.0), p);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 0);
  CHECK(r.residual_history.empty());
  CHECK(r.config_timeline.size() == 1);

  r = gmres_solve(eye, std::vector<double>(4, 0.0), GmresParams{});
  CHECK(r.converged);
  CHECK(r.solution == std::vector<double>(4, 0.0));

  p = {};
  p.max_iters = 3;
  const CooMatrix a = oracle::poisson2d(8);
  r = gmres_solve(share(a), make_rhs(a, p), p);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.residual_history.size() == 3);

  CHECK_THROWS_AS(gmres_solve(eye, std::vector<double>(3, 1.0), {}), DimensionMismatch);
  CHECK_THROWS_AS(gmres_solve(share(CooMatrix(2, 3, {}, {}, {})), std::vector<double>(2, 1.0), {}),
                  DimensionMismatch);
  GmresParams bad;
  bad.tol = 1.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.restart = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("numerical failures") {
  NanExecutor nan;
  CHECK_THROWS_AS(gmres(3, std::vector<double>{1, 1, 1}, GmresParams{}, nan), NumericalError);
  const SharedMatrix zero = share(CooMatrix(3, 3, {}, {}, {}));
  CHECK_THROWS_AS(gmres_solve(zero, std::vector<double>{1, 0, 0}, {}), NumericalError);
}

TEST_CASE("right-hand side") {
  const CooMatrix a = oracle::poisson2d(3);
  GmresParams p;
  const auto ones = make_rhs(a, p);
  CHECK(ones == oracle::dense_matvec(oracle::to_dense(a), std::vector<double>(9, 1.0)));
  p.seed = 42;
  const auto r1 = make_rhs(a, p);
  CHECK(r1 == make_rhs(a, p));
  for (double v : r1) CHECK(std::abs(v) <= 1.0);
  p.seed = 43;
  CHECK(r1 != make_rhs(a, p));
}

TEST_CASE("report JSON round trip") {
  SolveReport r;
  r.matrix_id = "m";
  r.mode = "async";
  r.converged = true;
  r.iterations = 9;
  r.residual_history = {0.5, 0.25, 1e-9};
  r.final_relative_residual = 1e-9;
  r.config_timeline = {{1, kDefaultConfig, 0.0, "initial"},
                       {4, SpmvConfig::parse("CSR-LibA-16"), 0.002, "lane_width"}};
  r.advisor_outcome = AdvisorOutcome::Completed;
  r.phase_seconds = {{"solve", 0.1}};
  r.wall_seconds = 0.125;
  r.advisor_work_after_cancel = 17;
  const SolveReport back = solve_report_from_json(to_json(r));
  CHECK(back.matrix_id == "m");
  CHECK(back.iterations == 9);
  CHECK(back.residual_history == r.residual_history);
  REQUIRE(back.config_timeline.size() == 2);
  CHECK(back.config_timeline[1].iteration == 4);
  CHECK(back.config_timeline[1].config.token() == "CSR-LibA-16");
  CHECK(back.config_timeline[1].source == "lane_width");
  CHECK(back.advisor_outcome == AdvisorOutcome::Completed);
  CHECK(back.phase_seconds == r.phase_seconds);
  CHECK(back.advisor_work_after_cancel == 17);
  CHECK_THROWS_AS(solve_report_from_json("{}"), std::invalid_argument);
  CHECK(parse_advisor_outcome("failed") == AdvisorOutcome::Failed);
}
