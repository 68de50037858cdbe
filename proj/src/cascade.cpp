#include "cspmv/cascade.hpp"

#include <chrono>
#include <fstream>

namespace cspmv {

namespace {

void check_labels(const TreeEnsembleModel& model, const std::string& name,
                  const std::function<bool(const std::string&)>& allowed) {
  for (std::size_t k = 0; k < model.classes().size(); ++k) {
    if (!allowed(model.classes()[k])) {
      throw SchemaError(name + ".classes[" + std::to_string(k) + "]",
                        "label '" + model.classes()[k] + "' not allowed here");
    }
  }
}

std::function<bool(const std::string&)> library_for(Format f) {
  return [f](const std::string& label) {
    try {
      return supports(parse_library(label), f);
    } catch (const std::invalid_argument&) {
      return false;
    }
  };
}

struct Slot {
  const char* file;
  TreeEnsembleModel CascadeModelSet::*member;
};

constexpr Slot kSlots[] = {
    {"FORMAT.json", &CascadeModelSet::format_model},
    {"COO-LIB.json", &CascadeModelSet::coo_lib_model},
    {"CSR-LIB.json", &CascadeModelSet::csr_lib_model},
    {"ELL-LIB.json", &CascadeModelSet::ell_lib_model},
    {"CSR-TPV.json", &CascadeModelSet::csr_tpv_model},
};

}  // namespace

std::string_view to_string(CascadeStage stage) {
  switch (stage) {
    case CascadeStage::Format: return "format";
    case CascadeStage::Library: return "library";
    case CascadeStage::LaneWidth: return "lane_width";
  }
  return "?";
}

void CascadeModelSet::validate() const {
  check_labels(format_model, "FORMAT", [](const std::string& label) {
    try {
      parse_format(label);
      return true;
    } catch (const std::invalid_argument&) {
      return false;
    }
  });
  check_labels(coo_lib_model, "COO-LIB", library_for(Format::COO));
  check_labels(csr_lib_model, "CSR-LIB", library_for(Format::CSR));
  check_labels(ell_lib_model, "ELL-LIB", library_for(Format::ELL));
  check_labels(csr_tpv_model, "CSR-TPV", [](const std::string& label) {
    for (int w : kLaneWidths) {
      if (label == std::to_string(w)) return true;
    }
    return false;
  });
}

CascadeModelSet CascadeModelSet::load(const std::filesystem::path& dir) {
  CascadeModelSet set;
  for (const Slot& slot : kSlots) {
    set.*slot.member = TreeEnsembleModel::load(dir / slot.file);
  }
  set.validate();
  return set;
}

void CascadeModelSet::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  for (const Slot& slot : kSlots) {
    std::ofstream out(dir / slot.file);
    out << (this->*slot.member).to_json() << '\n';
  }
}

SpmvConfig cascade_predict(const CascadeModelSet& models, const FeatureVector& f,
                           const DecisionSink& emit) {
  using Clock = std::chrono::steady_clock;
  const auto x = f.as_array();
  const std::span<const double, kFeatureCount> input(x);

  CascadeDecision d;
  auto run = [&](const TreeEnsembleModel& model) {
    const auto start = Clock::now();
    Prediction p = model.predict(input);
    d.inference_seconds = std::chrono::duration<double>(Clock::now() - start).count();
    d.classes = model.classes();
    d.scores = std::move(p.scores);
    d.label = std::move(p.label);
  };
  auto publish = [&] {
    if (emit) emit(d);
  };

  d.stage = CascadeStage::Format;
  run(models.format_model);
  d.format = parse_format(d.label);
  d.config = {d.format, Library::LibA, {}};
  if (d.format == Format::CSR) d.config.lane_width = heuristic_lane_width(f.mean);
  d.terminal = d.format == Format::DIA || d.format == Format::HYB;
  if (d.terminal) d.library = Library::LibA;
  publish();
  if (d.terminal) return d.config;

  d.stage = CascadeStage::Library;
  switch (d.format) {
    case Format::COO: run(models.coo_lib_model); break;
    case Format::CSR: run(models.csr_lib_model); break;
    case Format::ELL: run(models.ell_lib_model); break;
    default: break;
  }
  d.library = parse_library(d.label);
  d.config.library = *d.library;
  const bool lanes = d.format == Format::CSR && *d.library == Library::LibA;
  if (!lanes) d.config.lane_width.reset();
  d.terminal = !lanes;
  publish();
  if (d.terminal) return d.config;

  d.stage = CascadeStage::LaneWidth;
  run(models.csr_tpv_model);
  d.lane_width = std::stoi(d.label);
  d.config.lane_width = d.lane_width;
  d.terminal = true;
  publish();
  return d.config;
}

}  // namespace cspmv
