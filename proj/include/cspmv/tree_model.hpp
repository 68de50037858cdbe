/// @file tree_model.hpp
/// @brief Portable gradient-boosted tree ensembles.
///
/// A model holds one list of regression trees per class. The raw score of a
/// class is the sum of the leaf values its trees reach; the predicted class
/// is the argmax of the raw scores, ties going to the lowest class index.
/// Splits send a sample left when feature <= threshold. The JSON layout is
/// documented in docs/model_schema.md.

#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cspmv/features.hpp"

namespace cspmv {

inline constexpr int kModelSchemaVersion = 1;

/// Model file violations. field_path() names the offending JSON location,
/// e.g. "trees[1][0].nodes[3].threshold".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string field_path, const std::string& what);
  const std::string& field_path() const { return path_; }

 private:
  std::string path_;
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;
  std::int32_t feature = kLeaf;  ///< kLeaf marks a leaf
  double value = 0.0;            ///< split threshold, or leaf score
  std::int32_t left = 0;
  std::int32_t right = 0;
};

/// Nodes are stored so that children always follow their parent; node 0 is
/// the root.
struct Tree {
  std::vector<TreeNode> nodes;
  double evaluate(std::span<const double, kFeatureCount> x) const;
};

struct Prediction {
  std::size_t class_index = 0;
  std::string label;
  std::vector<double> scores;  ///< raw per-class score sums
  /// Softmax of the raw scores; reporting only.
  std::vector<double> probabilities() const;
};

class TreeEnsembleModel {
 public:
  TreeEnsembleModel() = default;
  /// Validates shape: one non-empty tree list per class, in-range features,
  /// finite values, children after parents.
  TreeEnsembleModel(std::vector<std::string> classes,
                    std::vector<std::vector<Tree>> trees);
  TreeEnsembleModel(const TreeEnsembleModel& other);
  TreeEnsembleModel& operator=(const TreeEnsembleModel& other);

  static TreeEnsembleModel parse(std::string_view json_text);
  static TreeEnsembleModel load(const std::filesystem::path& path);
  std::string to_json() const;

  /// A single-class model whose one tree is a leaf.
  static TreeEnsembleModel constant(std::string label);

  std::size_t feature_count() const { return kFeatureCount; }
  const std::vector<std::string>& classes() const { return classes_; }
  const std::vector<std::vector<Tree>>& trees() const { return trees_; }

  Prediction predict(const FeatureVector& f) const;
  Prediction predict(std::span<const double, kFeatureCount> x) const;

  /// Number of predict() calls so far, across all threads.
  std::uint64_t evaluation_count() const {
    return evaluations_.load(std::memory_order_relaxed);
  }

 private:
  std::vector<std::string> classes_;
  std::vector<std::vector<Tree>> trees_;
  mutable std::atomic<std::uint64_t> evaluations_{0};
};

}  // namespace cspmv
