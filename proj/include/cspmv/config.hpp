/// @file config.hpp
/// @brief The SpMV configuration space: (format, library variant, lane width).
///
/// The three "libraries" are distinct CPU algorithms standing in for vendor
/// libraries:
///   LibA  all five formats; CSR uses the lane-parameterized kernel
///   LibB  COO (atomic accumulate) and CSR (row-parallel scalar)
///   LibC  CSR (merge-path balanced) and ELL (column-major sweep)

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cspmv/matrix.hpp"

namespace cspmv {

enum class Library : std::uint8_t { LibA, LibB, LibC };

inline constexpr Library kAllLibraries[] = {Library::LibA, Library::LibB,
                                            Library::LibC};
inline constexpr int kLaneWidths[] = {2, 4, 8, 16, 32};

std::string_view to_string(Library lib);
Library parse_library(std::string_view token);

/// True when `lib` implements SpMV for `format`.
bool supports(Library lib, Format format);

class UnsupportedConfig : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct SpmvConfig {
  Format format = Format::COO;
  Library library = Library::LibA;
  std::optional<int> lane_width;

  /// Lane width present iff (CSR, LibA), with a value from kLaneWidths, and
  /// the library supports the format.
  bool valid() const;
  /// Tokens look like "COO-LibA" or "CSR-LibA-32".
  std::string token() const;
  static SpmvConfig parse(std::string_view token);

  friend auto operator<=>(const SpmvConfig&, const SpmvConfig&) = default;
};

inline constexpr SpmvConfig kDefaultConfig{Format::COO, Library::LibA, {}};

/// All 13 valid configurations in their fixed order:
/// COO-LibA, ELL-LibA, DIA-LibA, HYB-LibA, CSR-LibA-{2,4,8,16,32},
/// COO-LibB, CSR-LibB, CSR-LibC, ELL-LibC. The default comes first; dataset
/// labelling breaks ties by this order.
const std::vector<SpmvConfig>& enumerate_configs();

/// Position of `cfg` in enumerate_configs(). Throws UnsupportedConfig.
std::size_t config_index(const SpmvConfig& cfg);

/// Lane width the lane kernel picks when no lane model has spoken yet:
/// the smallest width >= floor(mean row population), capped at 32.
int heuristic_lane_width(double mean_row_nnz);

}  // namespace cspmv
