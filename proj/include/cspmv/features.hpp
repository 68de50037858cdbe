/// @file features.hpp
/// @brief The 15 structural features the classifiers consume.
///
/// Column order (also the CSV and model-file order):
///   nrows ncols nnz density mean sd cov max min maxavg distavg clusteravg
///   fill ndiag diagfill
///
/// Here r_i is the entry count of row i, c_i^f and c_i^l are the first and
/// last column of row i, and cl_i is the longest run of consecutive column
/// indices in row i. Empty rows contribute 0 to distavg and clusteravg and
/// count as r_i = 0 for min/sd. Degenerate denominators yield 0.

#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <optional>
#include <stop_token>
#include <string_view>

#include "cspmv/matrix.hpp"

namespace cspmv {

inline constexpr std::size_t kFeatureCount = 15;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "nrows", "ncols",   "nnz",      "density",    "mean",
    "sd",    "cov",     "max",      "min",        "maxavg",
    "distavg", "clusteravg", "fill", "ndiag",     "diagfill"};

struct FeatureVector {
  double nrows = 0;
  double ncols = 0;
  double nnz = 0;
  double density = 0;
  double mean = 0;
  double sd = 0;
  double cov = 0;
  double max = 0;
  double min = 0;
  double maxavg = 0;
  double distavg = 0;
  double clusteravg = 0;
  double fill = 0;
  double ndiag = 0;
  double diagfill = 0;

  std::array<double, kFeatureCount> as_array() const;
  static FeatureVector from_array(const std::array<double, kFeatureCount>& a);
};

/// Memory-traffic counters, for checking that extraction stays linear.
struct FeatureScanStats {
  std::size_t row_ptr_reads = 0;
  std::size_t col_idx_reads = 0;
};

struct FeatureOptions {
  std::stop_token stop;
  /// Rows between stop checks.
  std::size_t check_interval = 4096;
  /// Advanced by the rows processed at every check, if set.
  std::atomic<std::size_t>* progress = nullptr;
  FeatureScanStats* stats = nullptr;
};

/// Computes every feature from CSR storage: the O(1) group first, then one
/// sweep of row_ptr, then one sweep of col_idx. Returns nullopt if a stop is
/// requested; a stop requested before the call returns before col_idx is
/// read.
std::optional<FeatureVector> extract_features(const CsrMatrix& m,
                                              const FeatureOptions& options = {});

}  // namespace cspmv
