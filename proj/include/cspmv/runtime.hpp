/// @file runtime.hpp
/// @brief Predict-while-solve: an advisor thread extracts features, runs the
/// cascade and converts the matrix while GMRES iterates, and the solver
/// picks up each new configuration at the next iteration boundary.
///
/// An update published while iteration k runs takes effect at iteration k+1
/// (or k+2 if it lands after the boundary poll of iteration k). Iteration 1
/// always runs the default configuration, so the earliest swap is at 2.

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cspmv/cascade.hpp"
#include "cspmv/gmres.hpp"
#include "cspmv/solve_report.hpp"

namespace cspmv {

/// A configuration with the matrix already stored in its format.
struct ConfigUpdate {
  SpmvConfig config;
  SharedMatrix matrix;
  CascadeStage stage = CascadeStage::Format;
  double conversion_seconds = 0.0;
};

/// Single-slot, last-writer-wins handoff from advisor to solver. Neither
/// side blocks.
class ConfigMailbox {
 public:
  ConfigMailbox() = default;
  ConfigMailbox(const ConfigMailbox&) = delete;
  ConfigMailbox& operator=(const ConfigMailbox&) = delete;
  ~ConfigMailbox();

  /// Replaces any pending update. Returns false, dropping the update, once
  /// the solver has marked itself finished.
  bool publish(ConfigUpdate update);
  /// Pending update, if any; empties the slot.
  std::unique_ptr<ConfigUpdate> take();

  std::size_t published() const { return published_.load(); }
  void mark_converged() { converged_.store(true); }
  bool converged() const { return converged_.load(); }

 private:
  std::atomic<ConfigUpdate*> slot_{nullptr};
  std::atomic<std::size_t> published_{0};
  std::atomic<bool> converged_{false};
};

/// Called on every SpMV with the number of boundaries passed so far and the
/// configuration that ran it.
using ExecutorProbe = std::function<void(std::size_t boundaries, const SpmvConfig&)>;

/// Executor that polls a mailbox at iteration boundaries and records every
/// configuration change in a timeline.
class SwappingExecutor : public SpmvExecutor {
 public:
  SwappingExecutor(SharedMatrix initial, const SpmvConfig& cfg, ConfigMailbox& mailbox,
                   int workers = 0);

  void apply(std::span<const double> x, std::span<double> y) override;
  void at_boundary(std::size_t completed) override;
  const SpmvConfig& active_config() const override { return cfg_; }

  /// Runs before each mailbox poll; the runtime uses it for delay injection.
  std::function<void(std::size_t completed)> before_poll;
  ExecutorProbe probe;

  const std::vector<TimelineEntry>& timeline() const { return timeline_; }
  std::size_t applied_updates() const { return timeline_.size() - 1; }

 private:
  SharedMatrix matrix_;
  SpmvConfig cfg_;
  ConfigMailbox& mailbox_;
  int workers_;
  std::size_t boundaries_ = 0;
  std::vector<TimelineEntry> timeline_;
};

/// Holds advisor decision i until the solver has completed
/// release_after[i] iterations. Decisions past the end of the list are not
/// held. At each boundary the solver waits (up to `timeout`) for every
/// decision already due, so swap iterations become deterministic.
struct DelayInjection {
  std::vector<std::size_t> release_after;
  std::chrono::milliseconds timeout{30000};
};

struct AsyncOptions {
  int workers = 0;
  std::optional<DelayInjection> delay;
  ExecutorProbe probe;
  /// Rows between advisor stop checks.
  std::size_t check_interval = 4096;
};

/// Solver starts on the default configuration while the advisor predicts.
/// Advisor errors never reach the caller; they end up in advisor_outcome
/// and advisor_error.
SolveReport async_solve(SharedMatrix m, std::span<const double> b, const GmresParams& p,
                        const CascadeModelSet& models, const AsyncOptions& options = {});

/// Features, full cascade, conversion, then a solve under the predicted
/// configuration. The timeline holds that single configuration.
SolveReport sequential_predict_solve(SharedMatrix m, std::span<const double> b,
                                     const GmresParams& p, const CascadeModelSet& models,
                                     int workers = 0);

}  // namespace cspmv
