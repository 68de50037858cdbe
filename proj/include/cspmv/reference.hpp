#pragma once

#include <span>
#include <vector>

#include "cspmv/matrix.hpp"

namespace cspmv {

/// Serial y = A x, ascending column order within each row. This is the oracle
/// every parallel kernel is checked against.
std::vector<double> spmv_reference(const CsrMatrix& m, std::span<const double> x);

/// ||a - b||_2 / ||b||_2, or ||a - b||_2 when b is zero.
double relative_error(std::span<const double> a, std::span<const double> b);

}  // namespace cspmv
