#pragma once

#include <cstddef>
#include <atomic>
#include <optional>
#include <stop_token>

#include "cspmv/matrix.hpp"

namespace cspmv {

/// Conversions to DIA refuse matrices with more distinct diagonals than this.
inline constexpr std::size_t kDiaOffsetCap = 4096;

CsrMatrix to_csr(const CooMatrix& coo);
CooMatrix to_coo(const CsrMatrix& csr);
CooMatrix to_coo(const EllMatrix& ell);
/// Zero-valued slots are indistinguishable from padding and are dropped.
CooMatrix to_coo(const DiaMatrix& dia);
CooMatrix to_coo(const HybMatrix& hyb);
CooMatrix to_coo(const AnyMatrix& m);

/// Width is the longest row.
EllMatrix to_ell(const CooMatrix& coo);
/// Throws FormatInapplicable when the diagonal count exceeds `offset_cap`.
DiaMatrix to_dia(const CooMatrix& coo, std::size_t offset_cap = kDiaOffsetCap);
/// Uses hyb_split_width() unless a width is given.
HybMatrix to_hyb(const CooMatrix& coo, std::optional<Index> split_width = {});

/// Smallest w such that at least ceil(2 * nrows / 3) rows have <= w entries.
Index hyb_split_width(std::span<const Index> row_lengths);

/// Any format to any format; a same-format request returns a copy.
AnyMatrix convert(const AnyMatrix& m, Format target);

/// Number of distinct (col - row) values among the entries.
std::size_t count_diagonals(const CooMatrix& coo);

/// COO to CSR with a stop check every `check_interval` rows. Returns nullopt
/// when a stop was requested. `progress`, if given, is advanced by the rows
/// processed at each check.
std::optional<CsrMatrix> to_csr(const CooMatrix& coo, std::stop_token stop,
                                std::atomic<std::size_t>* progress = nullptr,
                                std::size_t check_interval = 4096);

}  // namespace cspmv
