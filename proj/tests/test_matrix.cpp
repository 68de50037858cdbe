#include <algorithm>
#include <set>
#include <sstream>

#include "cspmv/convert.hpp"
#include "cspmv/matrix_market.hpp"
#include "cspmv/reference.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspmv;

namespace {

CooMatrix parse(const std::string& text) {
  std::istringstream in(text);
  return parse_matrix_market(in);
}

bool same_entries(const CooMatrix& a, const CooMatrix& b) {
  if (a.nrows() != b.nrows() || a.ncols() != b.ncols() || a.nnz() != b.nnz()) return false;
  return std::equal(a.row_indices().begin(), a.row_indices().end(), b.row_indices().begin()) &&
         std::equal(a.col_indices().begin(), a.col_indices().end(), b.col_indices().begin()) &&
         std::equal(a.values().begin(), a.values().end(), b.values().begin());
}

}  // namespace

TEST_CASE("matrix market: identity") {
  const CooMatrix m = parse(
      "%%MatrixMarket matrix coordinate real general\n% comment\n3 3 3\n1 1 1\n2 2 1\n3 3 1\n");
  REQUIRE(m.nnz() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(m.row_indices()[k] == static_cast<Index>(k));
    CHECK(m.col_indices()[k] == static_cast<Index>(k));
    CHECK(m.values()[k] == 1.0);
  }
}

TEST_CASE("matrix market: symmetric expansion") {
  const CooMatrix m =
      parse("%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 2\n2 1 5\n2 2 3\n");
  CHECK(m.nnz() == 4);
  const auto d = oracle::to_dense(m);
  CHECK(d[0][1] == 5.0);
  CHECK(d[1][0] == 5.0);
  CHECK(d[0][0] == 2.0);
  CHECK(d[1][1] == 3.0);
}

TEST_CASE("matrix market: pattern duplicates are summed") {
  const CooMatrix m =
      parse("%%MatrixMarket matrix coordinate pattern general\n2 2 3\n1 2\n1 2\n2 1\n");
  REQUIRE(m.nnz() == 2);
  CHECK(m.values()[0] == 2.0);
  CHECK(m.values()[1] == 1.0);
}

TEST_CASE("matrix market: integer field") {
  const CooMatrix m = parse("%%MatrixMarket matrix coordinate integer general\n1 2 1\n1 2 7\n");
  CHECK(m.values()[0] == 7.0);
}

TEST_CASE("matrix market: rejects bad input") {
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 0\n"),
                  ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix array real general\n1 1\n1\n"), ParseError);
  CHECK_THROWS_AS(parse("not a header\n"), ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n"),
                  ParseError);
  CHECK_THROWS_AS(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n"),
                  ParseError);
}

TEST_CASE("matrix market: write then read") {
  std::mt19937_64 rng(11);
  const CooMatrix m = oracle::random_coo(rng, 20, 15, 0.2);
  std::stringstream io;
  write_matrix_market(io, m);
  CHECK(same_entries(parse_matrix_market(io), m));
}

TEST_CASE("conversion examples") {
  const CooMatrix eye = oracle::identity(3);
  const CsrMatrix csr = to_csr(eye);
  CHECK(std::vector<Offset>(csr.row_ptr().begin(), csr.row_ptr().end()) ==
        std::vector<Offset>{0, 1, 2, 3});

  const CooMatrix ones = CooMatrix::from_triplets(
      2, 3, {{0, 0, 1}, {0, 1, 1}, {0, 2, 1}, {1, 0, 1}, {1, 1, 1}, {1, 2, 1}});
  const EllMatrix ell = to_ell(ones);
  CHECK(ell.width() == 3);
  CHECK(ell.stored_entries() == 6);
  CHECK(std::count(ell.col_idx().begin(), ell.col_idx().end(), ell.padding_column()) == 0);

  const DiaMatrix dia = to_dia(eye);
  CHECK(std::vector<Offset>(dia.offsets().begin(), dia.offsets().end()) ==
        std::vector<Offset>{0});
}

TEST_CASE("conversion round trip, HYB partition and DIA offsets on random matrices") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const CooMatrix m = oracle::random_matrix(rng, 300, 0.3);
    for (Format f : kAllFormats) {
      const AnyMatrix converted = convert(AnyMatrix{m}, f);
      CHECK(format_of(converted) == f);
      REQUIRE(same_entries(to_coo(converted), m));
    }
    const HybMatrix hyb = to_hyb(m);
    CHECK(hyb.ell_part().stored_entries() + hyb.coo_part().nnz() == m.nnz());
    std::set<std::pair<Index, Index>> head;
    for (const Triplet& t : to_coo(hyb.ell_part()).triplets()) head.insert({t.row, t.col});
    for (const Triplet& t : hyb.coo_part().triplets()) CHECK(head.count({t.row, t.col}) == 0);

    std::set<long> diagonals;
    for (const Triplet& t : m.triplets()) diagonals.insert(static_cast<long>(t.col) - t.row);
    CHECK(to_dia(m).ndiag() == diagonals.size());
    CHECK(count_diagonals(m) == diagonals.size());
  }
}

TEST_CASE("HYB split covers two thirds of the rows") {
  const std::vector<Index> lengths{1, 1, 2, 2, 3, 9};
  // ceil(2 * 6 / 3) = 4 rows must fit: the 4th smallest length is 2.
  CHECK(hyb_split_width(lengths) == 2);
  const std::vector<Index> empty_rows{0, 0, 0};
  CHECK(hyb_split_width(empty_rows) == 0);
  const CooMatrix tail = CooMatrix::from_triplets(3, 4, {{2, 0, 1}, {2, 1, 1}, {2, 3, 1}});
  const HybMatrix hyb = to_hyb(tail);
  CHECK(hyb.split_width() == 0);
  CHECK(hyb.coo_part().nnz() == 3);
}

TEST_CASE("DIA refuses too many diagonals") {
  std::vector<Triplet> t;
  const int n = static_cast<int>(kDiaOffsetCap) + 10;
  for (int j = 0; j < n; ++j) t.push_back({0, j, 1.0});
  for (int i = 1; i < n; ++i) t.push_back({i, 0, 1.0});
  const CooMatrix m = CooMatrix::from_triplets(n, n, std::move(t));
  CHECK_THROWS_AS(to_dia(m), FormatInapplicable);
  CHECK_NOTHROW(to_dia(m, 3 * kDiaOffsetCap));
}

TEST_CASE("matrix invariants are enforced") {
  CHECK_THROWS_AS(CooMatrix(2, 2, {0, 0}, {1, 0}, {1.0, 1.0}), MatrixError);
  CHECK_THROWS_AS(CooMatrix(2, 2, {0, 2}, {0, 0}, {1.0, 1.0}), MatrixError);
  CHECK_THROWS_AS(CooMatrix(1, 1, {0}, {0}, {std::nan("")}), MatrixError);
  CHECK_THROWS_AS(CsrMatrix(2, 2, {0, 2, 1}, {0, 1}, {1.0, 1.0}), MatrixError);
  CHECK_THROWS_AS(CsrMatrix(1, 3, {0, 2}, {1, 1}, {1.0, 1.0}), MatrixError);
}

TEST_CASE("reference SpMV") {
  const CsrMatrix eye = to_csr(oracle::identity(3));
  const std::vector<double> x{1, 2, 3};
  CHECK(spmv_reference(eye, x) == x);

  const CsrMatrix a = to_csr(CooMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 1, 2}, {1, 1, 3}}));
  CHECK(spmv_reference(a, std::vector<double>{1, 1}) == std::vector<double>{3, 3});

  std::mt19937_64 rng(5);
  const CooMatrix m = oracle::random_coo(rng, 100, 100, 0.1);
  std::vector<double> v(100);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(static_cast<double>(i));
  const auto dense = oracle::dense_matvec(oracle::to_dense(m), v);
  CHECK(relative_error(spmv_reference(to_csr(m), v), dense) <= 1e-12);

  CHECK_THROWS_AS(spmv_reference(a, std::vector<double>{1, 1, 1}), DimensionMismatch);
}
