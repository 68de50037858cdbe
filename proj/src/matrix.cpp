#include "cspmv/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace cspmv {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw MatrixError(what);
}

void check_dims(Index nrows, Index ncols) {
  require(nrows >= 0 && ncols >= 0, "negative matrix dimension");
}

}  // namespace

std::string_view to_string(Format f) {
  switch (f) {
    case Format::COO: return "COO";
    case Format::CSR: return "CSR";
    case Format::ELL: return "ELL";
    case Format::DIA: return "DIA";
    case Format::HYB: return "HYB";
  }
  return "?";
}

Format parse_format(std::string_view token) {
  for (Format f : kAllFormats) {
    if (to_string(f) == token) return f;
  }
  throw std::invalid_argument("unknown format '" + std::string(token) + "'");
}

// ---------------------------------------------------------------------------
// COO

CooMatrix::CooMatrix(Index nrows, Index ncols, std::vector<Index> rows,
                     std::vector<Index> cols, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      rows_(std::move(rows)),
      cols_(std::move(cols)),
      values_(std::move(values)) {
  check_dims(nrows_, ncols_);
  require(rows_.size() == values_.size() && cols_.size() == values_.size(),
          "COO arrays differ in length");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    require(rows_[k] >= 0 && rows_[k] < nrows_ && cols_[k] >= 0 &&
                cols_[k] < ncols_,
            "COO entry " + std::to_string(k) + " out of range");
    require(std::isfinite(values_[k]),
            "COO entry " + std::to_string(k) + " is not finite");
    if (k > 0) {
      bool ordered = rows_[k - 1] < rows_[k] ||
                     (rows_[k - 1] == rows_[k] && cols_[k - 1] < cols_[k]);
      require(ordered, "COO entries not strictly row-major at " +
                           std::to_string(k));
    }
  }
}

CooMatrix CooMatrix::from_triplets(Index nrows, Index ncols,
                                   std::vector<Triplet> triplets) {
  check_dims(nrows, ncols);
  for (const auto& t : triplets) {
    require(t.row >= 0 && t.row < nrows && t.col >= 0 && t.col < ncols,
            "triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                ") out of range");
  }
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) {
                     return a.row != b.row ? a.row < b.row : a.col < b.col;
                   });
  std::vector<Index> rows;
  std::vector<Index> cols;
  std::vector<double> values;
  rows.reserve(triplets.size());
  cols.reserve(triplets.size());
  values.reserve(triplets.size());
  for (const auto& t : triplets) {
    if (!rows.empty() && rows.back() == t.row && cols.back() == t.col) {
      values.back() += t.value;
    } else {
      rows.push_back(t.row);
      cols.push_back(t.col);
      values.push_back(t.value);
    }
  }
  return CooMatrix(nrows, ncols, std::move(rows), std::move(cols),
                   std::move(values));
}

std::vector<Triplet> CooMatrix::triplets() const {
  std::vector<Triplet> out(nnz());
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = {rows_[k], cols_[k], values_[k]};
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSR

CsrMatrix::CsrMatrix(Index nrows, Index ncols, std::vector<Offset> row_ptr,
                     std::vector<Index> col_idx, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  check_dims(nrows_, ncols_);
  require(row_ptr_.size() == static_cast<std::size_t>(nrows_) + 1,
          "CSR row_ptr must have nrows + 1 entries");
  require(col_idx_.size() == values_.size(), "CSR arrays differ in length");
  require(row_ptr_.front() == 0, "CSR row_ptr[0] must be 0");
  require(row_ptr_.back() == static_cast<Offset>(values_.size()),
          "CSR row_ptr[nrows] must equal nnz");
  for (Index i = 0; i < nrows_; ++i) {
    require(row_ptr_[i] <= row_ptr_[i + 1],
            "CSR row_ptr decreases at row " + std::to_string(i));
    for (Offset k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      require(col_idx_[k] >= 0 && col_idx_[k] < ncols_,
              "CSR column out of range in row " + std::to_string(i));
      require(k == row_ptr_[i] || col_idx_[k - 1] < col_idx_[k],
              "CSR columns not strictly increasing in row " +
                  std::to_string(i));
    }
  }
}

// ---------------------------------------------------------------------------
// ELL

EllMatrix::EllMatrix(Index nrows, Index ncols, Index width,
                     std::vector<Index> col_idx, std::vector<double> values)
    : nrows_(nrows),
      ncols_(ncols),
      width_(width),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  check_dims(nrows_, ncols_);
  require(width_ >= 0, "negative ELL width");
  const auto slots = static_cast<std::size_t>(nrows_) * width_;
  require(col_idx_.size() == slots && values_.size() == slots,
          "ELL arrays must hold nrows * width slots");
  for (Index i = 0; i < nrows_; ++i) {
    Index prev = -1;
    bool padded = false;
    for (Index k = 0; k < width_; ++k) {
      const auto s = static_cast<std::size_t>(k) * nrows_ + i;
      const Index c = col_idx_[s];
      if (c == ncols_) {
        require(values_[s] == 0.0, "ELL padding slot holds a nonzero value");
        padded = true;
        continue;
      }
      require(!padded, "ELL entry after padding in row " + std::to_string(i));
      require(c >= 0 && c < ncols_ && c > prev,
              "ELL columns invalid in row " + std::to_string(i));
      prev = c;
      ++stored_;
    }
  }
}

// ---------------------------------------------------------------------------
// DIA

DiaMatrix::DiaMatrix(Index nrows, Index ncols, std::vector<Offset> offsets,
                     std::vector<double> data)
    : nrows_(nrows),
      ncols_(ncols),
      offsets_(std::move(offsets)),
      data_(std::move(data)) {
  check_dims(nrows_, ncols_);
  require(data_.size() == offsets_.size() * static_cast<std::size_t>(nrows_),
          "DIA data must hold ndiag * nrows values");
  for (std::size_t d = 0; d < offsets_.size(); ++d) {
    require(d == 0 || offsets_[d - 1] < offsets_[d],
            "DIA offsets must be strictly increasing");
    require(offsets_[d] > -static_cast<Offset>(nrows_) &&
                offsets_[d] < static_cast<Offset>(ncols_),
            "DIA offset outside the matrix");
  }
}

// ---------------------------------------------------------------------------
// HYB

HybMatrix::HybMatrix(EllMatrix ell, CooMatrix coo)
    : ell_(std::move(ell)), coo_(std::move(coo)) {
  require(ell_.nrows() == coo_.nrows() && ell_.ncols() == coo_.ncols(),
          "HYB parts differ in shape");
  // A COO tail entry for a row implies the ELL head of that row is full and
  // every tail column lies to the right of the head.
  const Index n = ell_.nrows();
  const Index w = ell_.width();
  for (std::size_t k = 0; k < coo_.nnz(); ++k) {
    const Index r = coo_.row_indices()[k];
    if (w == 0) continue;
    const auto last = static_cast<std::size_t>(w - 1) * n + r;
    const Index head_last = ell_.col_idx()[last];
    require(head_last != ell_.padding_column() &&
                head_last < coo_.col_indices()[k],
            "HYB tail entry overlaps the ELL part in row " + std::to_string(r));
  }
}

// ---------------------------------------------------------------------------

Format format_of(const AnyMatrix& m) {
  return static_cast<Format>(m.index());
}

Index nrows_of(const AnyMatrix& m) {
  return std::visit([](const auto& a) { return a.nrows(); }, m);
}

Index ncols_of(const AnyMatrix& m) {
  return std::visit([](const auto& a) { return a.ncols(); }, m);
}

}  // namespace cspmv
