#include "cspmv/reference.hpp"

#include <cmath>
#include <string>

namespace cspmv {

std::vector<double> spmv_reference(const CsrMatrix& m, std::span<const double> x) {
  if (x.size() != static_cast<std::size_t>(m.ncols())) {
    throw DimensionMismatch("x has " + std::to_string(x.size()) +
                            " entries, matrix has " + std::to_string(m.ncols()) +
                            " columns");
  }
  std::vector<double> y(static_cast<std::size_t>(m.nrows()), 0.0);
  const auto rp = m.row_ptr();
  const auto ci = m.col_idx();
  const auto v = m.values();
  for (Index i = 0; i < m.nrows(); ++i) {
    double sum = 0.0;
    for (Offset k = rp[i]; k < rp[i + 1]; ++k) sum += v[k] * x[ci[k]];
    y[i] = sum;
  }
  return y;
}

double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("vector length mismatch");
  double diff = 0.0;
  double ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return ref > 0.0 ? std::sqrt(diff / ref) : std::sqrt(diff);
}

}  // namespace cspmv
