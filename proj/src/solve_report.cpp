#include "cspmv/solve_report.hpp"

#include <stdexcept>

#include "json.hpp"

namespace cspmv {

using nlohmann::json;

namespace {

constexpr AdvisorOutcome kOutcomes[] = {AdvisorOutcome::Completed,
                                        AdvisorOutcome::Cancelled,
                                        AdvisorOutcome::Unused, AdvisorOutcome::Failed};

}  // namespace

std::string_view to_string(AdvisorOutcome outcome) {
  switch (outcome) {
    case AdvisorOutcome::Completed: return "completed";
    case AdvisorOutcome::Cancelled: return "cancelled";
    case AdvisorOutcome::Unused: return "unused";
    case AdvisorOutcome::Failed: return "failed";
  }
  return "?";
}

AdvisorOutcome parse_advisor_outcome(std::string_view token) {
  for (AdvisorOutcome o : kOutcomes) {
    if (to_string(o) == token) return o;
  }
  throw std::invalid_argument("unknown advisor outcome '" + std::string(token) + "'");
}

std::string to_json(const SolveReport& r) {
  json timeline = json::array();
  for (const TimelineEntry& e : r.config_timeline) {
    timeline.push_back({{"iteration", e.iteration},
                        {"config", e.config.token()},
                        {"swap_cost_seconds", e.swap_cost_seconds},
                        {"source", e.source}});
  }
  json phases = json::array();
  for (const auto& [name, seconds] : r.phase_seconds) {
    phases.push_back({{"phase", name}, {"seconds", seconds}});
  }
  json j = {
      {"matrix_id", r.matrix_id},
      {"mode", r.mode},
      {"converged", r.converged},
      {"iterations", r.iterations},
      {"final_relative_residual", r.final_relative_residual},
      {"residual_history", r.residual_history},
      {"config_timeline", timeline},
      {"advisor_outcome", to_string(r.advisor_outcome)},
      {"advisor_error", r.advisor_error},
      {"phase_seconds", phases},
      {"wall_seconds", r.wall_seconds},
      {"advisor_work_after_cancel", r.advisor_work_after_cancel},
      {"advisor_stop_latency_seconds", r.advisor_stop_latency_seconds},
  };
  return j.dump(2);
}

SolveReport solve_report_from_json(std::string_view text) {
  SolveReport r;
  try {
    const json j = json::parse(text);
    r.matrix_id = j.at("matrix_id").get<std::string>();
    r.mode = j.at("mode").get<std::string>();
    r.converged = j.at("converged").get<bool>();
    r.iterations = j.at("iterations").get<std::size_t>();
    r.final_relative_residual = j.at("final_relative_residual").get<double>();
    r.residual_history = j.at("residual_history").get<std::vector<double>>();
    for (const json& e : j.at("config_timeline")) {
      r.config_timeline.push_back(
          {e.at("iteration").get<std::size_t>(),
           SpmvConfig::parse(e.at("config").get<std::string>()),
           e.at("swap_cost_seconds").get<double>(), e.at("source").get<std::string>()});
    }
    r.advisor_outcome = parse_advisor_outcome(j.at("advisor_outcome").get<std::string>());
    r.advisor_error = j.value("advisor_error", "");
    for (const json& p : j.at("phase_seconds")) {
      r.phase_seconds.emplace_back(p.at("phase").get<std::string>(),
                                   p.at("seconds").get<double>());
    }
    r.wall_seconds = j.at("wall_seconds").get<double>();
    r.advisor_work_after_cancel = j.value("advisor_work_after_cancel", std::size_t{0});
    r.advisor_stop_latency_seconds = j.value("advisor_stop_latency_seconds", 0.0);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad solve report: ") + e.what());
  }
  if (r.config_timeline.empty()) {
    throw std::invalid_argument("bad solve report: empty config_timeline");
  }
  return r;
}

}  // namespace cspmv
