#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cspmv/config.hpp"

namespace cspmv {

enum class AdvisorOutcome {
  Completed,  ///< the advisor finished and at least one of its updates was applied
  Cancelled,  ///< the solve ended before the advisor finished
  Unused,     ///< no advisor update changed the solver's configuration
  Failed,     ///< the advisor hit an error; the solve went on unaffected
};

std::string_view to_string(AdvisorOutcome outcome);
AdvisorOutcome parse_advisor_outcome(std::string_view token);

/// One configuration change. `iteration` is the first (1-based) iteration
/// that ran under `config`.
struct TimelineEntry {
  std::size_t iteration = 1;
  SpmvConfig config;
  double swap_cost_seconds = 0.0;
  /// "initial" for the first entry, otherwise the cascade stage that
  /// produced the update ("format", "library", "lane_width").
  std::string source = "initial";
};

struct SolveReport {
  std::string matrix_id;
  std::string mode;  ///< "default", "seq" or "async"
  bool converged = false;
  std::size_t iterations = 0;
  std::vector<double> residual_history;  ///< relative residual after each iteration
  double final_relative_residual = 0.0;
  std::vector<TimelineEntry> config_timeline;
  AdvisorOutcome advisor_outcome = AdvisorOutcome::Unused;
  std::string advisor_error;
  /// Named phases in execution order (features, inference, conversion, solve).
  std::vector<std::pair<std::string, double>> phase_seconds;
  double wall_seconds = 0.0;
  /// Rows or entries the advisor processed after the stop request.
  std::size_t advisor_work_after_cancel = 0;
  double advisor_stop_latency_seconds = 0.0;
  std::vector<double> solution;  ///< not serialized

  const SpmvConfig& final_config() const { return config_timeline.back().config; }
};

/// JSON with every field except `solution`.
std::string to_json(const SolveReport& report);
SolveReport solve_report_from_json(std::string_view text);

}  // namespace cspmv
