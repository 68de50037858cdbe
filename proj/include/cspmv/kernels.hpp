/// @file kernels.hpp
/// @brief OpenMP SpMV kernel variants and the registry that maps every valid
/// SpmvConfig to one of them.
///
/// Kernels never allocate: output goes to a caller-owned buffer and any
/// per-worker scratch lives on the stack (workers are clamped to
/// kMaxWorkers). All variants except COO-LibB are bitwise deterministic for a
/// fixed worker count.

#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

#include "cspmv/config.hpp"
#include "cspmv/matrix.hpp"

namespace cspmv {

inline constexpr int kMaxWorkers = 256;

/// Worker count used when a caller passes 0: the CSPMV_WORKERS environment
/// variable if set, else the hardware concurrency. Read once per process.
int default_workers();

/// Computes y = A x into `y`, which must hold nrows entries.
using KernelFn = void (*)(const AnyMatrix& m, std::span<const double> x,
                          std::span<double> y, int workers);

class KernelRegistry {
 public:
  /// The process-wide registry holding all 13 configurations.
  static const KernelRegistry& instance();

  /// Throws UnsupportedConfig for configurations outside the support table.
  KernelFn resolve(const SpmvConfig& cfg) const;
  const SpmvConfig& default_config() const { return default_; }
  std::size_t size() const { return table_.size(); }

 private:
  KernelRegistry();
  std::map<SpmvConfig, KernelFn> table_;
  SpmvConfig default_ = kDefaultConfig;
};

/// Checks format/dimension preconditions, then runs the registered kernel.
/// `workers` == 0 selects default_workers().
void execute_spmv(const SpmvConfig& cfg, const AnyMatrix& m,
                  std::span<const double> x, std::span<double> y,
                  int workers = 0);
std::vector<double> execute_spmv(const SpmvConfig& cfg, const AnyMatrix& m,
                                 std::span<const double> x, int workers = 0);

namespace kernels {

// Individual variants, exposed for tests and the benchmark.
void coo_segmented(const CooMatrix& m, std::span<const double> x,
                   std::span<double> y, int workers);
void coo_atomic(const CooMatrix& m, std::span<const double> x,
                std::span<double> y, int workers);
void csr_lanes(const CsrMatrix& m, std::span<const double> x,
               std::span<double> y, int lane_width, int workers);
void csr_scalar(const CsrMatrix& m, std::span<const double> x,
                std::span<double> y, int workers);
void csr_merge_path(const CsrMatrix& m, std::span<const double> x,
                    std::span<double> y, int workers);
void ell_rows(const EllMatrix& m, std::span<const double> x,
              std::span<double> y, int workers);
void ell_columns(const EllMatrix& m, std::span<const double> x,
                 std::span<double> y, int workers);
void dia_blocked(const DiaMatrix& m, std::span<const double> x,
                 std::span<double> y, int workers);
void hyb(const HybMatrix& m, std::span<const double> x, std::span<double> y,
         int workers);

}  // namespace kernels

}  // namespace cspmv
