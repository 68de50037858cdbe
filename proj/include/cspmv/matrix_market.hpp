#pragma once

#include <filesystem>
#include <istream>
#include <string>

#include "cspmv/matrix.hpp"

namespace cspmv {

/// Reader errors carry the 1-based line number where parsing stopped.
class ParseError : public MatrixError {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads a coordinate Matrix Market stream (real, integer or pattern; general
/// or symmetric). Symmetric storage is expanded, pattern entries become 1.0,
/// duplicate coordinates are summed. Complex data is rejected.
CooMatrix parse_matrix_market(std::istream& in);
CooMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes a general real coordinate file with 17 significant digits.
void write_matrix_market(std::ostream& out, const CooMatrix& m);

}  // namespace cspmv
