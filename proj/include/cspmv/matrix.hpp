/// @file matrix.hpp
/// @brief Owned storage for the five sparse formats (COO, CSR, ELL, DIA, HYB).
///
/// Every matrix validates its invariants on construction and is immutable
/// afterwards, so instances can be shared between the solver and the advisor
/// without synchronization.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cspmv {

using Index = std::int32_t;   ///< row/column index
using Offset = std::int64_t;  ///< position in an entry array

enum class Format : std::uint8_t { COO, CSR, ELL, DIA, HYB };

inline constexpr Format kAllFormats[] = {Format::COO, Format::CSR, Format::ELL,
                                         Format::DIA, Format::HYB};

std::string_view to_string(Format f);
/// Throws std::invalid_argument for unknown tokens.
Format parse_format(std::string_view token);

/// Invariant violation in a matrix constructor, or malformed input data.
class MatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A format cannot represent the matrix (DIA beyond the offset cap).
class FormatInapplicable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Coordinate storage, row-major sorted, no duplicate coordinates.
class CooMatrix {
 public:
  CooMatrix() = default;
  CooMatrix(Index nrows, Index ncols, std::vector<Index> rows,
            std::vector<Index> cols, std::vector<double> values);

  /// Sorts, sums duplicates and validates.
  static CooMatrix from_triplets(Index nrows, Index ncols,
                                 std::vector<Triplet> triplets);

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const Index> row_indices() const { return rows_; }
  std::span<const Index> col_indices() const { return cols_; }
  std::span<const double> values() const { return values_; }

  std::vector<Triplet> triplets() const;

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Index> rows_;
  std::vector<Index> cols_;
  std::vector<double> values_;
};

class CsrMatrix {
 public:
  CsrMatrix() : row_ptr_(1, 0) {}
  CsrMatrix(Index nrows, Index ncols, std::vector<Offset> row_ptr,
            std::vector<Index> col_idx, std::vector<double> values);

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  std::size_t nnz() const { return values_.size(); }
  std::span<const Offset> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  Index row_length(Index row) const {
    return static_cast<Index>(row_ptr_[row + 1] - row_ptr_[row]);
  }

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Offset> row_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// ELLPACK: nrows x width slabs stored column-major (slot k of row i lives at
/// k * nrows + i). Unused slots hold column `padding_column()` == ncols and
/// value 0.
class EllMatrix {
 public:
  EllMatrix() = default;
  EllMatrix(Index nrows, Index ncols, Index width, std::vector<Index> col_idx,
            std::vector<double> values);

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  Index width() const { return width_; }
  Index padding_column() const { return ncols_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  /// Number of non-padding slots.
  std::size_t stored_entries() const { return stored_; }

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  Index width_ = 0;
  std::size_t stored_ = 0;
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Diagonal storage. data()[d * nrows + i] holds A(i, i + offsets()[d]);
/// positions that fall outside the matrix are zero.
class DiaMatrix {
 public:
  DiaMatrix() = default;
  DiaMatrix(Index nrows, Index ncols, std::vector<Offset> offsets,
            std::vector<double> data);

  Index nrows() const { return nrows_; }
  Index ncols() const { return ncols_; }
  std::size_t ndiag() const { return offsets_.size(); }
  std::span<const Offset> offsets() const { return offsets_; }
  std::span<const double> data() const { return data_; }

 private:
  Index nrows_ = 0;
  Index ncols_ = 0;
  std::vector<Offset> offsets_;
  std::vector<double> data_;
};

/// ELL head of every row up to split_width entries plus a COO tail for the
/// remainder. Each source entry lives in exactly one part.
class HybMatrix {
 public:
  HybMatrix() = default;
  HybMatrix(EllMatrix ell, CooMatrix coo);

  Index nrows() const { return ell_.nrows(); }
  Index ncols() const { return ell_.ncols(); }
  Index split_width() const { return ell_.width(); }
  std::size_t nnz() const { return ell_.stored_entries() + coo_.nnz(); }
  const EllMatrix& ell_part() const { return ell_; }
  const CooMatrix& coo_part() const { return coo_; }

 private:
  EllMatrix ell_;
  CooMatrix coo_;
};

using AnyMatrix =
    std::variant<CooMatrix, CsrMatrix, EllMatrix, DiaMatrix, HybMatrix>;

Format format_of(const AnyMatrix& m);
Index nrows_of(const AnyMatrix& m);
Index ncols_of(const AnyMatrix& m);

}  // namespace cspmv
