#include "cspmv/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <array>
#include <cstdlib>
#include <string>
#include <thread>

namespace cspmv {

namespace {

int clamp_workers(int workers) {
  if (workers <= 0) workers = default_workers();
  return std::clamp(workers, 1, kMaxWorkers);
}

struct Carry {
  Index row = -1;
  double sum = 0.0;
};

// Segmented reduction over row-sorted entries. Each worker reduces a
// contiguous slice of entries; rows strictly inside a slice are written
// directly, the slice's first and last rows are handed back as carries and
// added serially in slice order.
template <bool Accumulate>
void coo_segmented_impl(const CooMatrix& m, std::span<const double> x,
                        std::span<double> y, int workers) {
  const auto r = m.row_indices();
  const auto c = m.col_indices();
  const auto v = m.values();
  const auto nnz = static_cast<Offset>(m.nnz());
  const Index n = m.nrows();
  const int w = clamp_workers(workers);

  if constexpr (!Accumulate) {
#pragma omp parallel for num_threads(w) schedule(static)
    for (Index i = 0; i < n; ++i) y[i] = 0.0;
  }
  if (nnz == 0) return;

  const int slices = static_cast<int>(std::min<Offset>(w, nnz));
  std::array<Carry, kMaxWorkers> head;
  std::array<Carry, kMaxWorkers> tail;

#pragma omp parallel for num_threads(w) schedule(static)
  for (int t = 0; t < slices; ++t) {
    const Offset begin = nnz * t / slices;
    const Offset end = nnz * (t + 1) / slices;
    const Index first = r[begin];
    Index row = first;
    double sum = 0.0;
    head[t] = {first, 0.0};
    tail[t] = {-1, 0.0};
    for (Offset k = begin; k < end; ++k) {
      if (r[k] != row) {
        if (row == first) {
          head[t].sum = sum;
        } else if constexpr (Accumulate) {
          y[row] += sum;
        } else {
          y[row] = sum;
        }
        row = r[k];
        sum = 0.0;
      }
      sum += v[k] * x[c[k]];
    }
    if (row == first) {
      head[t].sum = sum;
    } else {
      tail[t] = {row, sum};
    }
  }
  for (int t = 0; t < slices; ++t) {
    y[head[t].row] += head[t].sum;
    if (tail[t].row >= 0) y[tail[t].row] += tail[t].sum;
  }
}

template <int Lanes>
void csr_lanes_impl(const CsrMatrix& m, std::span<const double> x,
                    std::span<double> y, int workers) {
  const auto rp = m.row_ptr();
  const auto ci = m.col_idx();
  const auto v = m.values();
  const Index n = m.nrows();
#pragma omp parallel for num_threads(workers) schedule(static)
  for (Index i = 0; i < n; ++i) {
    double acc[Lanes] = {};
    Offset k = rp[i];
    const Offset end = rp[i + 1];
    for (; k + Lanes <= end; k += Lanes) {
#pragma omp simd
      for (int l = 0; l < Lanes; ++l) acc[l] += v[k + l] * x[ci[k + l]];
    }
    for (int l = 0; k + l < end; ++l) acc[l] += v[k + l] * x[ci[k + l]];
    for (int s = Lanes / 2; s > 0; s /= 2) {
      for (int l = 0; l < s; ++l) acc[l] += acc[l + s];
    }
    y[i] = acc[0];
  }
}

struct MergeCoord {
  Index row;
  Offset nz;
};

// Locates where the merge path crosses `diagonal` when merging the row end
// offsets (row_ptr[1..]) with the entry indices 0..nnz-1.
MergeCoord merge_path_search(Offset diagonal, std::span<const Offset> row_ends,
                             Offset nnz) {
  const auto rows = static_cast<Offset>(row_ends.size());
  Offset lo = std::max<Offset>(diagonal - nnz, 0);
  Offset hi = std::min(diagonal, rows);
  while (lo < hi) {
    const Offset pivot = (lo + hi) / 2;
    if (row_ends[pivot] <= diagonal - pivot - 1) {
      lo = pivot + 1;
    } else {
      hi = pivot;
    }
  }
  return {static_cast<Index>(std::min(lo, rows)), diagonal - lo};
}

}  // namespace

int default_workers() {
  static const int workers = [] {
    if (const char* env = std::getenv("CSPMV_WORKERS")) {
      const int w = std::atoi(env);
      if (w > 0) return std::min(w, kMaxWorkers);
    }
    const auto hw = static_cast<int>(std::thread::hardware_concurrency());
    return std::clamp(hw, 1, kMaxWorkers);
  }();
  return workers;
}

namespace kernels {

void coo_segmented(const CooMatrix& m, std::span<const double> x,
                   std::span<double> y, int workers) {
  coo_segmented_impl<false>(m, x, y, workers);
}

void coo_atomic(const CooMatrix& m, std::span<const double> x,
                std::span<double> y, int workers) {
  const int w = clamp_workers(workers);
  const auto r = m.row_indices();
  const auto c = m.col_indices();
  const auto v = m.values();
  const auto nnz = static_cast<Offset>(m.nnz());
  const Index n = m.nrows();
#pragma omp parallel num_threads(w)
  {
#pragma omp for schedule(static)
    for (Index i = 0; i < n; ++i) y[i] = 0.0;
#pragma omp for schedule(static)
    for (Offset k = 0; k < nnz; ++k) {
      const double contrib = v[k] * x[c[k]];
#pragma omp atomic
      y[r[k]] += contrib;
    }
  }
}

void csr_lanes(const CsrMatrix& m, std::span<const double> x,
               std::span<double> y, int lane_width, int workers) {
  const int w = clamp_workers(workers);
  switch (lane_width) {
    case 2: return csr_lanes_impl<2>(m, x, y, w);
    case 4: return csr_lanes_impl<4>(m, x, y, w);
    case 8: return csr_lanes_impl<8>(m, x, y, w);
    case 16: return csr_lanes_impl<16>(m, x, y, w);
    case 32: return csr_lanes_impl<32>(m, x, y, w);
    default:
      throw UnsupportedConfig("lane width " + std::to_string(lane_width) +
                              " not in {2,4,8,16,32}");
  }
}

void csr_scalar(const CsrMatrix& m, std::span<const double> x,
                std::span<double> y, int workers) {
  const int w = clamp_workers(workers);
  const auto rp = m.row_ptr();
  const auto ci = m.col_idx();
  const auto v = m.values();
  const Index n = m.nrows();
#pragma omp parallel for num_threads(w) schedule(static)
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Offset k = rp[i]; k < rp[i + 1]; ++k) sum += v[k] * x[ci[k]];
    y[i] = sum;
  }
}

void csr_merge_path(const CsrMatrix& m, std::span<const double> x,
                    std::span<double> y, int workers) {
  const int w = clamp_workers(workers);
  const auto row_ends = m.row_ptr().subspan(1);
  const auto ci = m.col_idx();
  const auto v = m.values();
  const Index n = m.nrows();
  const auto nnz = static_cast<Offset>(m.nnz());
  const Offset total = n + nnz;
  if (total == 0) return;
  const int parts = static_cast<int>(std::min<Offset>(w, total));
  const Offset per_part = (total + parts - 1) / parts;
  std::array<Carry, kMaxWorkers> carry;

#pragma omp parallel for num_threads(w) schedule(static)
  for (int t = 0; t < parts; ++t) {
    const Offset diag = std::min(per_part * t, total);
    const Offset diag_end = std::min(diag + per_part, total);
    auto [row, nz] = merge_path_search(diag, row_ends, nnz);
    const auto stop = merge_path_search(diag_end, row_ends, nnz);
    for (; row < stop.row; ++row) {
      double sum = 0.0;
      for (; nz < row_ends[row]; ++nz) sum += v[nz] * x[ci[nz]];
      y[row] = sum;
    }
    double sum = 0.0;
    for (; nz < stop.nz; ++nz) sum += v[nz] * x[ci[nz]];
    carry[t] = {stop.row, sum};
  }
  for (int t = 0; t < parts; ++t) {
    if (carry[t].row < n) y[carry[t].row] += carry[t].sum;
  }
}

void ell_rows(const EllMatrix& m, std::span<const double> x,
              std::span<double> y, int workers) {
  const int w = clamp_workers(workers);
  const auto ci = m.col_idx();
  const auto v = m.values();
  const Index n = m.nrows();
  const Index width = m.width();
  const Index pad = m.padding_column();
#pragma omp parallel for num_threads(w) schedule(static)
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Index k = 0; k < width; ++k) {
      const auto s = static_cast<std::size_t>(k) * n + i;
      if (ci[s] == pad) break;
      sum += v[s] * x[ci[s]];
    }
    y[i] = sum;
  }
}

void ell_columns(const EllMatrix& m, std::span<const double> x,
                 std::span<double> y, int workers) {
  const int w = clamp_workers(workers);
  const auto ci = m.col_idx();
  const auto v = m.values();
  const Index n = m.nrows();
  const Index width = m.width();
  const Index pad = m.padding_column();
  // Identical static schedules hand each thread the same rows in every
  // sweep, so the sweeps need no barrier between them.
#pragma omp parallel num_threads(w)
  {
#pragma omp for schedule(static) nowait
    for (Index i = 0; i < n; ++i) y[i] = 0.0;
    for (Index k = 0; k < width; ++k) {
      const auto base = static_cast<std::size_t>(k) * n;
#pragma omp for schedule(static) nowait
      for (Index i = 0; i < n; ++i) {
        const Index col = ci[base + i];
        if (col != pad) y[i] += v[base + i] * x[col];
      }
    }
  }
}

void dia_blocked(const DiaMatrix& m, std::span<const double> x,
                 std::span<double> y, int workers) {
  constexpr Index kBlock = 1024;
  const int w = clamp_workers(workers);
  const auto offsets = m.offsets();
  const auto data = m.data();
  const Index n = m.nrows();
  const Offset ncols = m.ncols();
  const Index blocks = (n + kBlock - 1) / kBlock;
#pragma omp parallel for num_threads(w) schedule(static)
  for (Index b = 0; b < blocks; ++b) {
    const Index i0 = b * kBlock;
    const Index i1 = std::min(n, i0 + kBlock);
    for (Index i = i0; i < i1; ++i) y[i] = 0.0;
    for (std::size_t d = 0; d < offsets.size(); ++d) {
      const Offset off = offsets[d];
      const auto lo = static_cast<Index>(std::max<Offset>(i0, -off));
      const auto hi = static_cast<Index>(std::min<Offset>(i1, ncols - off));
      const double* diag = data.data() + d * static_cast<std::size_t>(n);
#pragma omp simd
      for (Index i = lo; i < hi; ++i) y[i] += diag[i] * x[i + off];
    }
  }
}

void hyb(const HybMatrix& m, std::span<const double> x, std::span<double> y,
         int workers) {
  ell_rows(m.ell_part(), x, y, workers);
  coo_segmented_impl<true>(m.coo_part(), x, y, workers);
}

}  // namespace kernels

namespace {

void run_coo_a(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::coo_segmented(std::get<CooMatrix>(m), x, y, w);
}
void run_coo_b(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::coo_atomic(std::get<CooMatrix>(m), x, y, w);
}
template <int Lanes>
void run_csr_a(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  csr_lanes_impl<Lanes>(std::get<CsrMatrix>(m), x, y, clamp_workers(w));
}
void run_csr_b(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::csr_scalar(std::get<CsrMatrix>(m), x, y, w);
}
void run_csr_c(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::csr_merge_path(std::get<CsrMatrix>(m), x, y, w);
}
void run_ell_a(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::ell_rows(std::get<EllMatrix>(m), x, y, w);
}
void run_ell_c(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::ell_columns(std::get<EllMatrix>(m), x, y, w);
}
void run_dia_a(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::dia_blocked(std::get<DiaMatrix>(m), x, y, w);
}
void run_hyb_a(const AnyMatrix& m, std::span<const double> x, std::span<double> y,
               int w) {
  kernels::hyb(std::get<HybMatrix>(m), x, y, w);
}

}  // namespace

KernelRegistry::KernelRegistry() {
  using F = Format;
  using L = Library;
  table_[{F::COO, L::LibA, {}}] = run_coo_a;
  table_[{F::COO, L::LibB, {}}] = run_coo_b;
  table_[{F::CSR, L::LibA, 2}] = run_csr_a<2>;
  table_[{F::CSR, L::LibA, 4}] = run_csr_a<4>;
  table_[{F::CSR, L::LibA, 8}] = run_csr_a<8>;
  table_[{F::CSR, L::LibA, 16}] = run_csr_a<16>;
  table_[{F::CSR, L::LibA, 32}] = run_csr_a<32>;
  table_[{F::CSR, L::LibB, {}}] = run_csr_b;
  table_[{F::CSR, L::LibC, {}}] = run_csr_c;
  table_[{F::ELL, L::LibA, {}}] = run_ell_a;
  table_[{F::ELL, L::LibC, {}}] = run_ell_c;
  table_[{F::DIA, L::LibA, {}}] = run_dia_a;
  table_[{F::HYB, L::LibA, {}}] = run_hyb_a;
}

const KernelRegistry& KernelRegistry::instance() {
  static const KernelRegistry registry;
  return registry;
}

KernelFn KernelRegistry::resolve(const SpmvConfig& cfg) const {
  const auto it = table_.find(cfg);
  if (it == table_.end()) {
    throw UnsupportedConfig("no kernel for config '" + cfg.token() + "'");
  }
  return it->second;
}

void execute_spmv(const SpmvConfig& cfg, const AnyMatrix& m,
                  std::span<const double> x, std::span<double> y, int workers) {
  const KernelFn kernel = KernelRegistry::instance().resolve(cfg);
  if (format_of(m) != cfg.format) {
    throw UnsupportedConfig("config '" + cfg.token() + "' given a " +
                            std::string(to_string(format_of(m))) + " matrix");
  }
  if (x.size() != static_cast<std::size_t>(ncols_of(m)) ||
      y.size() != static_cast<std::size_t>(nrows_of(m))) {
    throw DimensionMismatch("SpMV operand sizes do not match the matrix shape");
  }
  kernel(m, x, y, workers);
}

std::vector<double> execute_spmv(const SpmvConfig& cfg, const AnyMatrix& m,
                                 std::span<const double> x, int workers) {
  std::vector<double> y(static_cast<std::size_t>(nrows_of(m)));
  execute_spmv(cfg, m, x, y, workers);
  return y;
}

}  // namespace cspmv
