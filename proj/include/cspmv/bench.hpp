/// @file bench.hpp
/// @brief Offline stage: time every configuration per matrix, label the
/// timings, write the five training datasets, and compare solver modes.
///
/// Labels follow the cascade:
///   FORMAT   argmin over the LibA configurations (CSR at its best lane width)
///   *-LIB    argmin over all configurations of the labelled format, only
///            for COO, CSR and ELL
///   CSR-TPV  argmin over the CSR-LibA lane widths, only when the labels so
///            far are CSR and LibA
/// Each argmin scans enumerate_configs() order and keeps the first minimum,
/// so exact ties go to the lower config index.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cspmv/cascade.hpp"
#include "cspmv/features.hpp"
#include "cspmv/gmres.hpp"
#include "cspmv/solve_report.hpp"

namespace cspmv {

/// Unusable input data: empty directories, unreadable or empty caches.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimingOptions {
  std::size_t runs = 200;
  std::size_t warmups = 10;
  int workers = 0;
};

/// Called with true right before the timed loop and false right after it.
/// Tests use it to count allocations inside the measured region.
using TimedRegionHook = void (*)(bool entering);
void set_timed_region_hook(TimedRegionHook hook);

/// Mean seconds per SpMV over `runs` calls after `warmups` untimed ones.
/// `m` must already be stored in cfg.format.
double time_prepared(const AnyMatrix& m, const SpmvConfig& cfg, const TimingOptions& o);

/// Converts (untimed), then times. nullopt when the format is inapplicable.
std::optional<double> time_config(const CooMatrix& m, const SpmvConfig& cfg,
                                  const TimingOptions& o = {});

/// "workers=<n> host=<hostname>"
std::string environment_fingerprint(int workers);

struct TimingRecord {
  std::string matrix_id;
  std::size_t runs = 0;
  std::size_t warmups = 0;
  std::string fingerprint;
  FeatureVector features;
  /// Indexed like enumerate_configs(); nullopt marks an inapplicable config.
  std::vector<std::optional<double>> seconds;

  std::string to_json() const;
  static TimingRecord from_json(std::string_view text);
};

/// Features plus every configuration's time.
TimingRecord time_all(const CooMatrix& m, std::string matrix_id, const TimingOptions& o = {});

struct Labels {
  Format format = Format::COO;
  std::optional<Library> library;
  std::optional<int> lane_width;
};

/// nullopt when no LibA configuration was applicable.
std::optional<Labels> label_timings(std::span<const std::optional<double>> seconds);

using LabeledRows = std::vector<std::pair<FeatureVector, std::string>>;

/// Rows of the five datasets, named after their CSV files.
struct DatasetRows {
  LabeledRows format;
  LabeledRows coo_lib;
  LabeledRows csr_lib;
  LabeledRows ell_lib;
  LabeledRows csr_tpv;

  void add(const FeatureVector& f, const Labels& labels);
};

/// Writes FORMAT.csv, COO-LIB.csv, CSR-LIB.csv, ELL-LIB.csv and CSR-TPV.csv.
/// Each starts with a "# <fingerprint>" line, then the 15 feature names and
/// `label` as the header.
void write_datasets(const DatasetRows& rows, const std::filesystem::path& out_dir,
                    const std::string& fingerprint);

/// Reads one dataset CSV back (comment lines skipped).
LabeledRows read_dataset(const std::filesystem::path& file);

struct DatasetSummary {
  std::size_t matrices = 0;
  std::vector<std::pair<std::string, std::string>> skipped;  ///< (file, reason)
  DatasetRows rows;
};

/// Times every .mtx file under `matrix_dir` (cached as
/// out_dir/timings/<name>.json and reused when runs, warmups and fingerprint
/// match), labels the results and writes the five datasets. Throws
/// DataError when the directory holds no usable matrix.
DatasetSummary build_dataset(const std::filesystem::path& matrix_dir,
                             const std::filesystem::path& out_dir,
                             const TimingOptions& o = {}, std::ostream* log = nullptr);

struct Comparison {
  SolveReport default_run;
  SolveReport sequential;
  SolveReport async;

  double sequential_speedup() const { return default_run.wall_seconds / sequential.wall_seconds; }
  double async_speedup() const { return default_run.wall_seconds / async.wall_seconds; }
  std::string to_json() const;
  static Comparison from_json(std::string_view text);
};

/// Default-configuration, sequential and asynchronous solves of one system.
Comparison compare_solvers(SharedMatrix m, std::span<const double> b, const GmresParams& p,
                           const CascadeModelSet& models, int workers = 0);

}  // namespace cspmv
