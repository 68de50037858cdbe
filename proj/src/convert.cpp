#include "cspmv/convert.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace cspmv {

namespace {

std::vector<Index> row_lengths(const CooMatrix& coo) {
  std::vector<Index> len(static_cast<std::size_t>(coo.nrows()), 0);
  for (Index r : coo.row_indices()) ++len[r];
  return len;
}

// Packs the first min(len, width) entries of each row into column-major slabs
// and returns the leftovers as triplets.
EllMatrix pack_ell(const CooMatrix& coo, Index width,
                   std::vector<Triplet>* overflow) {
  const Index n = coo.nrows();
  const auto slots = static_cast<std::size_t>(n) * width;
  std::vector<Index> cols(slots, coo.ncols());
  std::vector<double> vals(slots, 0.0);
  std::vector<Index> fill(static_cast<std::size_t>(n), 0);
  const auto r = coo.row_indices();
  const auto c = coo.col_indices();
  const auto v = coo.values();
  for (std::size_t k = 0; k < coo.nnz(); ++k) {
    Index& used = fill[r[k]];
    if (used < width) {
      const auto s = static_cast<std::size_t>(used) * n + r[k];
      cols[s] = c[k];
      vals[s] = v[k];
      ++used;
    } else if (overflow != nullptr) {
      overflow->push_back({r[k], c[k], v[k]});
    }
  }
  return EllMatrix(n, coo.ncols(), width, std::move(cols), std::move(vals));
}

}  // namespace

CsrMatrix to_csr(const CooMatrix& coo) {
  // Never requests a stop, so the optional is always engaged.
  return *to_csr(coo, std::stop_token{});
}

std::optional<CsrMatrix> to_csr(const CooMatrix& coo, std::stop_token stop,
                                std::atomic<std::size_t>* progress,
                                std::size_t check_interval) {
  if (stop.stop_requested()) return std::nullopt;
  const Index n = coo.nrows();
  const auto rows = coo.row_indices();
  std::vector<Offset> row_ptr(static_cast<std::size_t>(n) + 1, 0);
  // Entries are row-major sorted, so row_ptr follows from a single sweep.
  std::size_t k = 0;
  std::size_t since_check = 0;
  for (Index i = 0; i < n; ++i) {
    row_ptr[i] = static_cast<Offset>(k);
    while (k < rows.size() && rows[k] == i) ++k;
    if (++since_check == check_interval) {
      if (progress != nullptr) progress->fetch_add(since_check);
      since_check = 0;
      if (stop.stop_requested()) return std::nullopt;
    }
  }
  row_ptr[n] = static_cast<Offset>(k);
  if (progress != nullptr) progress->fetch_add(since_check);
  return CsrMatrix(n, coo.ncols(), std::move(row_ptr),
                   {coo.col_indices().begin(), coo.col_indices().end()},
                   {coo.values().begin(), coo.values().end()});
}

CooMatrix to_coo(const CsrMatrix& csr) {
  const auto nnz = csr.nnz();
  std::vector<Index> rows(nnz);
  for (Index i = 0; i < csr.nrows(); ++i) {
    std::fill(rows.begin() + csr.row_ptr()[i], rows.begin() + csr.row_ptr()[i + 1],
              i);
  }
  return CooMatrix(csr.nrows(), csr.ncols(), std::move(rows),
                   {csr.col_idx().begin(), csr.col_idx().end()},
                   {csr.values().begin(), csr.values().end()});
}

CooMatrix to_coo(const EllMatrix& ell) {
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<double> vals;
  rows.reserve(ell.stored_entries());
  cols.reserve(ell.stored_entries());
  vals.reserve(ell.stored_entries());
  const Index n = ell.nrows();
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < ell.width(); ++k) {
      const auto s = static_cast<std::size_t>(k) * n + i;
      if (ell.col_idx()[s] == ell.padding_column()) break;
      rows.push_back(i);
      cols.push_back(ell.col_idx()[s]);
      vals.push_back(ell.values()[s]);
    }
  }
  return CooMatrix(n, ell.ncols(), std::move(rows), std::move(cols),
                   std::move(vals));
}

CooMatrix to_coo(const DiaMatrix& dia) {
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<double> vals;
  const Index n = dia.nrows();
  // Offsets ascend, so visiting them in order per row yields sorted columns.
  for (Index i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < dia.ndiag(); ++d) {
      const Offset j = i + dia.offsets()[d];
      if (j < 0 || j >= dia.ncols()) continue;
      const double v = dia.data()[d * n + i];
      if (v == 0.0) continue;
      rows.push_back(i);
      cols.push_back(static_cast<Index>(j));
      vals.push_back(v);
    }
  }
  return CooMatrix(n, dia.ncols(), std::move(rows), std::move(cols),
                   std::move(vals));
}

CooMatrix to_coo(const HybMatrix& hyb) {
  auto t = to_coo(hyb.ell_part()).triplets();
  auto tail = hyb.coo_part().triplets();
  t.insert(t.end(), tail.begin(), tail.end());
  return CooMatrix::from_triplets(hyb.nrows(), hyb.ncols(), std::move(t));
}

CooMatrix to_coo(const AnyMatrix& m) {
  return std::visit(
      [](const auto& a) -> CooMatrix {
        if constexpr (std::is_same_v<std::decay_t<decltype(a)>, CooMatrix>) {
          return a;
        } else {
          return to_coo(a);
        }
      },
      m);
}

EllMatrix to_ell(const CooMatrix& coo) {
  const auto len = row_lengths(coo);
  const Index width = len.empty() ? 0 : *std::max_element(len.begin(), len.end());
  return pack_ell(coo, width, nullptr);
}

std::size_t count_diagonals(const CooMatrix& coo) {
  if (coo.nnz() == 0) return 0;
  std::vector<bool> seen(static_cast<std::size_t>(coo.nrows()) + coo.ncols(),
                         false);
  std::size_t count = 0;
  for (std::size_t k = 0; k < coo.nnz(); ++k) {
    const auto slot = static_cast<std::size_t>(coo.col_indices()[k] -
                                               coo.row_indices()[k] +
                                               coo.nrows());
    if (!seen[slot]) {
      seen[slot] = true;
      ++count;
    }
  }
  return count;
}

DiaMatrix to_dia(const CooMatrix& coo, std::size_t offset_cap) {
  const Index n = coo.nrows();
  std::vector<Offset> slot_of(static_cast<std::size_t>(n) + coo.ncols(), -1);
  const auto r = coo.row_indices();
  const auto c = coo.col_indices();
  std::vector<Offset> offsets;
  for (std::size_t k = 0; k < coo.nnz(); ++k) {
    const auto key = static_cast<std::size_t>(c[k] - r[k] + n);
    if (slot_of[key] < 0) {
      slot_of[key] = 0;
      offsets.push_back(static_cast<Offset>(c[k]) - r[k]);
      if (offsets.size() > offset_cap) {
        throw FormatInapplicable("DIA needs more than " +
                                 std::to_string(offset_cap) + " diagonals");
      }
    }
  }
  std::sort(offsets.begin(), offsets.end());
  for (std::size_t d = 0; d < offsets.size(); ++d) {
    slot_of[static_cast<std::size_t>(offsets[d] + n)] = static_cast<Offset>(d);
  }
  std::vector<double> data(offsets.size() * static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 0; k < coo.nnz(); ++k) {
    const auto d = slot_of[static_cast<std::size_t>(c[k] - r[k] + n)];
    data[static_cast<std::size_t>(d) * n + r[k]] = coo.values()[k];
  }
  return DiaMatrix(n, coo.ncols(), std::move(offsets), std::move(data));
}

Index hyb_split_width(std::span<const Index> row_lengths) {
  if (row_lengths.empty()) return 0;
  std::vector<Index> sorted(row_lengths.begin(), row_lengths.end());
  const std::size_t need = (2 * sorted.size() + 2) / 3;  // ceil(2n/3)
  std::nth_element(sorted.begin(), sorted.begin() + (need - 1), sorted.end());
  return sorted[need - 1];
}

HybMatrix to_hyb(const CooMatrix& coo, std::optional<Index> split_width) {
  const Index w = split_width ? *split_width : hyb_split_width(row_lengths(coo));
  if (w < 0) throw std::invalid_argument("negative HYB split width");
  std::vector<Triplet> overflow;
  EllMatrix ell = pack_ell(coo, w, &overflow);
  // Overflow is collected in row-major order already.
  std::vector<Index> rows(overflow.size());
  std::vector<Index> cols(overflow.size());
  std::vector<double> vals(overflow.size());
  for (std::size_t k = 0; k < overflow.size(); ++k) {
    rows[k] = overflow[k].row;
    cols[k] = overflow[k].col;
    vals[k] = overflow[k].value;
  }
  return HybMatrix(std::move(ell),
                   CooMatrix(coo.nrows(), coo.ncols(), std::move(rows),
                             std::move(cols), std::move(vals)));
}

AnyMatrix convert(const AnyMatrix& m, Format target) {
  if (format_of(m) == target) return m;
  if (target == Format::COO) return to_coo(m);
  if (target == Format::CSR && format_of(m) == Format::COO) {
    return to_csr(std::get<CooMatrix>(m));
  }
  const CooMatrix coo = to_coo(m);
  switch (target) {
    case Format::COO: return coo;
    case Format::CSR: return to_csr(coo);
    case Format::ELL: return to_ell(coo);
    case Format::DIA: return to_dia(coo);
    case Format::HYB: return to_hyb(coo);
  }
  throw std::invalid_argument("unknown target format");
}

}  // namespace cspmv
