/// @file cascade.hpp
/// @brief Staged configuration prediction: format, then library, then lane
/// width, with each stage's outcome emitted as soon as it is known.
///
///   FORMAT -> COO  -> COO-LIB                         (terminal)
///          -> CSR  -> CSR-LIB -> LibA -> CSR-TPV      (terminal)
///                             -> LibB | LibC          (terminal)
///          -> ELL  -> ELL-LIB                         (terminal)
///          -> DIA | HYB                               (terminal, LibA)

#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cspmv/config.hpp"
#include "cspmv/features.hpp"
#include "cspmv/tree_model.hpp"

namespace cspmv {

/// The five classifiers. Model files are named after the members:
/// FORMAT.json, COO-LIB.json, CSR-LIB.json, ELL-LIB.json, CSR-TPV.json.
struct CascadeModelSet {
  TreeEnsembleModel format_model;
  TreeEnsembleModel coo_lib_model;
  TreeEnsembleModel csr_lib_model;
  TreeEnsembleModel ell_lib_model;
  TreeEnsembleModel csr_tpv_model;

  /// Throws SchemaError if a model's class labels fall outside its stage's
  /// label set (formats; libraries supporting the stage's format; lane widths).
  void validate() const;
  static CascadeModelSet load(const std::filesystem::path& dir);
  void save(const std::filesystem::path& dir) const;
};

enum class CascadeStage { Format, Library, LaneWidth };
std::string_view to_string(CascadeStage stage);

struct CascadeDecision {
  CascadeStage stage = CascadeStage::Format;
  // What has been decided so far.
  Format format = Format::COO;
  std::optional<Library> library;
  std::optional<int> lane_width;
  /// Executable configuration implied by the decisions so far. Undecided
  /// libraries default to LibA; an undecided lane width comes from
  /// heuristic_lane_width().
  SpmvConfig config;
  bool terminal = false;

  std::string label;            ///< class chosen at this stage
  std::vector<std::string> classes;
  std::vector<double> scores;   ///< raw scores of this stage's model
  double inference_seconds = 0.0;
};

using DecisionSink = std::function<void(const CascadeDecision&)>;

/// Runs the cascade, calling `emit` after every stage, and returns the final
/// configuration. `emit` may be empty.
SpmvConfig cascade_predict(const CascadeModelSet& models, const FeatureVector& f,
                           const DecisionSink& emit = {});

}  // namespace cspmv
