#include "cspmv/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace cspmv {

ParseError::ParseError(std::size_t line, const std::string& what)
    : MatrixError("line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

enum class Field { Real, Integer, Pattern };
enum class Symmetry { General, Symmetric };

struct Header {
  Field field;
  Symmetry symmetry;
};

Header parse_banner(const std::string& line) {
  std::istringstream in(line);
  std::string banner, object, layout, field, symmetry;
  in >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%MatrixMarket") {
    throw ParseError(1, "missing %%MatrixMarket banner");
  }
  if (lower(object) != "matrix") {
    throw ParseError(1, "unsupported object '" + object + "'");
  }
  if (lower(layout) != "coordinate") {
    throw ParseError(1, "only coordinate layout is supported, got '" + layout +
                            "'");
  }
  Header h{};
  field = lower(field);
  if (field == "real" || field == "double") {
    h.field = Field::Real;
  } else if (field == "integer") {
    h.field = Field::Integer;
  } else if (field == "pattern") {
    h.field = Field::Pattern;
  } else if (field == "complex") {
    throw ParseError(1, "complex matrices are not supported");
  } else {
    throw ParseError(1, "unknown field '" + field + "'");
  }
  symmetry = lower(symmetry);
  if (symmetry == "general") {
    h.symmetry = Symmetry::General;
  } else if (symmetry == "symmetric") {
    h.symmetry = Symmetry::Symmetric;
  } else {
    throw ParseError(1, "unsupported symmetry '" + symmetry + "'");
  }
  return h;
}

bool blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '%';
}

}  // namespace

CooMatrix parse_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;
  const Header header = parse_banner(line);

  long long nrows = -1, ncols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    std::istringstream size_line(line);
    if (!(size_line >> nrows >> ncols >> nnz) || nrows < 0 || ncols < 0 ||
        nnz < 0) {
      throw ParseError(lineno, "malformed size line");
    }
    break;
  }
  if (nrows < 0) throw ParseError(lineno, "missing size line");
  constexpr long long kMaxIndex = std::numeric_limits<Index>::max();
  if (nrows > kMaxIndex || ncols > kMaxIndex) {
    throw ParseError(lineno, "matrix dimensions exceed index range");
  }
  if (header.symmetry == Symmetry::Symmetric && nrows != ncols) {
    throw ParseError(lineno, "symmetric matrix must be square");
  }

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(nnz) *
                   (header.symmetry == Symmetry::Symmetric ? 2 : 1));
  long long read = 0;
  while (read < nnz && std::getline(in, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    std::istringstream entry(line);
    long long i = 0, j = 0;
    double v = 1.0;
    if (!(entry >> i >> j)) throw ParseError(lineno, "malformed entry");
    if (header.field != Field::Pattern && !(entry >> v)) {
      throw ParseError(lineno, "entry is missing its value");
    }
    if (i < 1 || i > nrows || j < 1 || j > ncols) {
      throw ParseError(lineno, "index (" + std::to_string(i) + ", " +
                                   std::to_string(j) + ") out of range");
    }
    if (!std::isfinite(v)) throw ParseError(lineno, "non-finite value");
    const auto r = static_cast<Index>(i - 1);
    const auto c = static_cast<Index>(j - 1);
    triplets.push_back({r, c, v});
    if (header.symmetry == Symmetry::Symmetric && r != c) {
      triplets.push_back({c, r, v});
    }
    ++read;
  }
  if (read < nnz) {
    throw ParseError(lineno, "expected " + std::to_string(nnz) +
                                 " entries, found " + std::to_string(read));
  }
  return CooMatrix::from_triplets(static_cast<Index>(nrows),
                                  static_cast<Index>(ncols), std::move(triplets));
}

CooMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MatrixError("cannot open " + path.string());
  return parse_matrix_market(in);
}

void write_matrix_market(std::ostream& out, const CooMatrix& m) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.nrows() << ' ' << m.ncols() << ' ' << m.nnz() << '\n';
  const auto old = out.precision(17);
  for (std::size_t k = 0; k < m.nnz(); ++k) {
    out << m.row_indices()[k] + 1 << ' ' << m.col_indices()[k] + 1 << ' '
        << m.values()[k] << '\n';
  }
  out.precision(old);
}

}  // namespace cspmv
