#include "cspmv/runtime.hpp"

#include <condition_variable>
#include <map>
#include <mutex>
#include <stop_token>
#include <thread>

#include "cspmv/convert.hpp"
#include "cspmv/features.hpp"
#include "cspmv/kernels.hpp"

namespace cspmv {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct AdvisorStopped {};

// State shared by the solver and advisor threads beyond the mailbox.
struct Rendezvous {
  std::mutex mu;
  std::condition_variable_any cv;
  std::size_t completed = 0;  // iterations the solver has finished
  std::size_t handled = 0;    // decisions the advisor has dealt with
  bool done = false;          // advisor exited
};

struct AdvisorResult {
  bool finished = false;
  bool failed = false;
  std::string error;
  double features_seconds = 0.0;
  double inference_seconds = 0.0;
  double conversion_seconds = 0.0;
  Clock::time_point exit_time;
};

SharedMatrix as_coo(SharedMatrix m) {
  if (format_of(*m) == Format::COO) return m;
  return std::make_shared<const AnyMatrix>(to_coo(*m));
}

}  // namespace

ConfigMailbox::~ConfigMailbox() { delete slot_.exchange(nullptr); }

bool ConfigMailbox::publish(ConfigUpdate update) {
  if (converged()) return false;
  auto* fresh = new ConfigUpdate(std::move(update));
  delete slot_.exchange(fresh, std::memory_order_acq_rel);
  published_.fetch_add(1);
  return true;
}

std::unique_ptr<ConfigUpdate> ConfigMailbox::take() {
  return std::unique_ptr<ConfigUpdate>(slot_.exchange(nullptr, std::memory_order_acq_rel));
}

SwappingExecutor::SwappingExecutor(SharedMatrix initial, const SpmvConfig& cfg,
                                   ConfigMailbox& mailbox, int workers)
    : matrix_(std::move(initial)), cfg_(cfg), mailbox_(mailbox), workers_(workers) {
  KernelRegistry::instance().resolve(cfg_);
  if (format_of(*matrix_) != cfg_.format) {
    throw UnsupportedConfig("matrix is not stored as " + std::string(to_string(cfg_.format)));
  }
  timeline_.push_back({1, cfg_, 0.0, "initial"});
}

void SwappingExecutor::apply(std::span<const double> x, std::span<double> y) {
  if (probe) probe(boundaries_, cfg_);
  execute_spmv(cfg_, *matrix_, x, y, workers_);
}

void SwappingExecutor::at_boundary(std::size_t completed) {
  ++boundaries_;
  if (before_poll) before_poll(completed);
  auto update = mailbox_.take();
  if (!update || update->config == cfg_) return;
  const auto t0 = Clock::now();
  matrix_ = std::move(update->matrix);
  cfg_ = update->config;
  timeline_.push_back({completed + 1, cfg_, update->conversion_seconds + seconds_since(t0),
                       std::string(to_string(update->stage))});
}

SolveReport async_solve(SharedMatrix m, std::span<const double> b, const GmresParams& p,
                        const CascadeModelSet& models, const AsyncOptions& options) {
  const auto start = Clock::now();
  if (nrows_of(*m) != ncols_of(*m)) throw DimensionMismatch("matrix is not square");
  p.validate();
  if (options.delay) {
    const auto& r = options.delay->release_after;
    for (std::size_t i = 1; i < r.size(); ++i) {
      if (r[i] < r[i - 1]) {
        throw std::invalid_argument("delay schedule must be non-decreasing");
      }
    }
  }
  const SharedMatrix coo = as_coo(std::move(m));
  const auto n = static_cast<std::size_t>(nrows_of(*coo));

  ConfigMailbox mailbox;
  Rendezvous rv;
  AdvisorResult advisor;
  std::atomic<std::size_t> progress{0};
  std::atomic<std::size_t> progress_at_stop{0};
  std::atomic<bool> stop_seen{false};
  Clock::time_point stop_time{};

  auto advise = [&](std::stop_token stop) {
    // Runs on the thread calling request_stop().
    std::stop_callback on_stop(stop, [&] {
      progress_at_stop.store(progress.load());
      stop_time = Clock::now();
      stop_seen.store(true);
    });
    std::map<Format, SharedMatrix> shadows{{Format::COO, coo}};
    SpmvConfig last = kDefaultConfig;
    std::size_t index = 0;

    auto hold = [&](std::size_t i) {
      if (!options.delay || i >= options.delay->release_after.size()) return;
      const std::size_t release = options.delay->release_after[i];
      std::unique_lock lock(rv.mu);
      if (!rv.cv.wait(lock, stop, [&] { return rv.completed >= release; })) {
        throw AdvisorStopped{};
      }
    };
    auto mark_handled = [&] {
      {
        std::lock_guard lock(rv.mu);
        ++rv.handled;
      }
      rv.cv.notify_all();
    };

    try {
      const auto t0 = Clock::now();
      const auto& src = std::get<CooMatrix>(*coo);
      auto csr = to_csr(src, stop, &progress, options.check_interval);
      if (!csr) throw AdvisorStopped{};
      FeatureOptions fo;
      fo.stop = stop;
      fo.check_interval = options.check_interval;
      fo.progress = &progress;
      const auto features = extract_features(*csr, fo);
      if (!features) throw AdvisorStopped{};
      shadows.emplace(Format::CSR, std::make_shared<const AnyMatrix>(std::move(*csr)));
      advisor.features_seconds = seconds_since(t0);

      auto sink = [&](const CascadeDecision& d) {
        advisor.inference_seconds += d.inference_seconds;
        if (stop.stop_requested()) throw AdvisorStopped{};
        hold(index++);
        if (d.config != last) {
          const auto c0 = Clock::now();
          auto it = shadows.find(d.config.format);
          if (it == shadows.end()) {
            auto converted = std::make_shared<const AnyMatrix>(convert(*coo, d.config.format));
            it = shadows.emplace(d.config.format, std::move(converted)).first;
          }
          const double conversion = seconds_since(c0);
          advisor.conversion_seconds += conversion;
          if (stop.stop_requested()) throw AdvisorStopped{};
          mailbox.publish({d.config, it->second, d.stage, conversion});
          last = d.config;
        }
        mark_handled();
      };
      cascade_predict(models, *features, sink);
      advisor.finished = true;
    } catch (const AdvisorStopped&) {
    } catch (const std::exception& e) {
      advisor.failed = true;
      advisor.error = e.what();
    }
    advisor.exit_time = Clock::now();
    {
      std::lock_guard lock(rv.mu);
      rv.done = true;
    }
    rv.cv.notify_all();
  };

  SwappingExecutor exec(coo, kDefaultConfig, mailbox, options.workers);
  exec.probe = options.probe;
  if (options.delay) {
    const DelayInjection& delay = *options.delay;
    exec.before_poll = [&](std::size_t completed) {
      std::size_t due = 0;
      while (due < delay.release_after.size() && delay.release_after[due] <= completed) ++due;
      std::unique_lock lock(rv.mu);
      rv.completed = completed;
      rv.cv.notify_all();
      rv.cv.wait_for(lock, delay.timeout, [&] { return rv.done || rv.handled >= due; });
    };
  }

  SolveReport report;
  report.mode = "async";
  GmresResult result;
  double solve_seconds = 0.0;
  {
    std::jthread worker(advise);
    const auto t0 = Clock::now();
    try {
      result = gmres(n, b, p, exec);
    } catch (...) {
      mailbox.mark_converged();
      worker.request_stop();
      throw;
    }
    solve_seconds = seconds_since(t0);
    mailbox.mark_converged();
    worker.request_stop();
  }

  report.converged = result.converged;
  report.iterations = result.iterations;
  report.residual_history = std::move(result.residual_history);
  report.final_relative_residual = result.final_relative_residual;
  report.solution = std::move(result.x);
  report.config_timeline = exec.timeline();

  if (advisor.failed) {
    report.advisor_outcome = AdvisorOutcome::Failed;
    report.advisor_error = advisor.error;
  } else if (!advisor.finished) {
    report.advisor_outcome = AdvisorOutcome::Cancelled;
  } else {
    report.advisor_outcome =
        exec.applied_updates() > 0 ? AdvisorOutcome::Completed : AdvisorOutcome::Unused;
  }
  if (stop_seen.load() && !advisor.finished && !advisor.failed) {
    report.advisor_work_after_cancel = progress.load() - progress_at_stop.load();
    report.advisor_stop_latency_seconds =
        std::chrono::duration<double>(advisor.exit_time - stop_time).count();
  }
  report.phase_seconds = {{"advisor.features", advisor.features_seconds},
                          {"advisor.inference", advisor.inference_seconds},
                          {"advisor.conversion", advisor.conversion_seconds},
                          {"solve", solve_seconds}};
  report.wall_seconds = seconds_since(start);
  return report;
}

SolveReport sequential_predict_solve(SharedMatrix m, std::span<const double> b,
                                     const GmresParams& p, const CascadeModelSet& models,
                                     int workers) {
  const auto start = Clock::now();
  if (nrows_of(*m) != ncols_of(*m)) throw DimensionMismatch("matrix is not square");
  const SharedMatrix coo = as_coo(std::move(m));

  auto t0 = Clock::now();
  CsrMatrix csr = to_csr(std::get<CooMatrix>(*coo));
  const FeatureVector features = *extract_features(csr);
  const double features_seconds = seconds_since(t0);

  t0 = Clock::now();
  SpmvConfig cfg = cascade_predict(models, features);
  const double inference_seconds = seconds_since(t0);

  SolveReport report;
  t0 = Clock::now();
  SharedMatrix operand;
  try {
    operand = cfg.format == Format::CSR
                  ? std::make_shared<const AnyMatrix>(std::move(csr))
                  : std::make_shared<const AnyMatrix>(convert(*coo, cfg.format));
  } catch (const FormatInapplicable& e) {
    report.advisor_outcome = AdvisorOutcome::Failed;
    report.advisor_error = e.what();
    cfg = kDefaultConfig;
    operand = coo;
  }
  const double conversion_seconds = seconds_since(t0);

  FixedExecutor exec(operand, cfg, workers);
  t0 = Clock::now();
  GmresResult result = gmres(static_cast<std::size_t>(nrows_of(*coo)), b, p, exec);
  const double solve_seconds = seconds_since(t0);

  report.mode = "seq";
  report.converged = result.converged;
  report.iterations = result.iterations;
  report.residual_history = std::move(result.residual_history);
  report.final_relative_residual = result.final_relative_residual;
  report.solution = std::move(result.x);
  report.config_timeline.push_back({1, cfg, conversion_seconds, "predicted"});
  if (report.advisor_outcome != AdvisorOutcome::Failed) {
    report.advisor_outcome = AdvisorOutcome::Completed;
  }
  report.phase_seconds = {{"features", features_seconds},
                          {"inference", inference_seconds},
                          {"conversion", conversion_seconds},
                          {"solve", solve_seconds}};
  report.wall_seconds = seconds_since(start);
  return report;
}

}  // namespace cspmv
