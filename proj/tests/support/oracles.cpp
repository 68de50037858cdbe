#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace oracle {

using namespace cspmv;

CooMatrix random_coo(std::mt19937_64& rng, int nrows, int ncols, double density) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<Triplet> t;
  for (int i = 0; i < nrows; ++i) {
    for (int j = 0; j < ncols; ++j) {
      if (coin(rng) < density) {
        double v = value(rng);
        if (v == 0.0) v = 0.5;
        t.push_back({i, j, v});
      }
    }
  }
  return CooMatrix::from_triplets(nrows, ncols, std::move(t));
}

CooMatrix random_matrix(std::mt19937_64& rng, int max_n, double max_density) {
  std::uniform_int_distribution<int> dim(1, max_n);
  std::uniform_real_distribution<double> dens(0.0, max_density);
  const int nrows = dim(rng);
  const int ncols = std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? dim(rng) : nrows;
  const CooMatrix base = random_coo(rng, nrows, ncols, dens(rng));
  if (std::uniform_int_distribution<int>(0, 2)(rng) != 0) return base;
  // Add a few dense rows so row lengths are skewed.
  std::vector<Triplet> t = base.triplets();
  std::uniform_int_distribution<int> row(0, nrows - 1);
  for (int k = 0; k < 3; ++k) {
    const int r = row(rng);
    for (int j = 0; j < ncols; j += 1 + k) t.push_back({r, j, 0.25 + k});
  }
  // Summing may cancel to exact zero only if values are opposite; keep it
  // out of the picture.
  std::vector<Triplet> merged;
  for (const Triplet& e : CooMatrix::from_triplets(nrows, ncols, std::move(t)).triplets()) {
    if (e.value != 0.0) merged.push_back(e);
  }
  return CooMatrix::from_triplets(nrows, ncols, std::move(merged));
}

CooMatrix poisson2d(int k) {
  std::vector<Triplet> t;
  auto id = [k](int i, int j) { return i * k + j; };
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      t.push_back({id(i, j), id(i, j), 4.0});
      if (i > 0) t.push_back({id(i, j), id(i - 1, j), -1.0});
      if (i + 1 < k) t.push_back({id(i, j), id(i + 1, j), -1.0});
      if (j > 0) t.push_back({id(i, j), id(i, j - 1), -1.0});
      if (j + 1 < k) t.push_back({id(i, j), id(i, j + 1), -1.0});
    }
  }
  return CooMatrix::from_triplets(k * k, k * k, std::move(t));
}

CooMatrix banded(int n, int half) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    for (int d = -half; d <= half; ++d) {
      const int j = i + d;
      if (j < 0 || j >= n) continue;
      t.push_back({i, j, d == 0 ? 2.0 * half + 2.0 : -1.0 / (1.0 + std::abs(d))});
    }
  }
  return CooMatrix::from_triplets(n, n, std::move(t));
}

CooMatrix identity(int n) {
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return CooMatrix::from_triplets(n, n, std::move(t));
}

Dense to_dense(const CooMatrix& m) {
  Dense a(static_cast<std::size_t>(m.nrows()), std::vector<double>(m.ncols(), 0.0));
  for (const Triplet& e : m.triplets()) a[e.row][e.col] += e.value;
  return a;
}

std::vector<double> dense_matvec(const Dense& a, const std::vector<double>& x) {
  std::vector<double> y(a.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < x.size(); ++j) y[i] += a[i][j] * x[j];
  }
  return y;
}

std::vector<double> dense_solve(Dense a, std::vector<double> b) {
  const std::size_t n = a.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    }
    if (a[p][k] == 0.0) throw std::runtime_error("singular");
    std::swap(a[k], a[p]);
    std::swap(b[k], b[p]);
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a[i][k] / a[k][k];
      for (std::size_t j = k; j < n; ++j) a[i][j] -= f * a[k][j];
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= a[i][j] * x[j];
    x[i] = s / a[i][i];
  }
  return x;
}

FeatureVector brute_features(const CooMatrix& m) {
  const Dense a = to_dense(m);
  const int nr = m.nrows();
  const int nc = m.ncols();
  std::vector<int> r(nr, 0);
  std::set<int> diagonals;
  double dist = 0.0;
  double cluster = 0.0;
  for (int i = 0; i < nr; ++i) {
    int first = -1, last = -1, run = 0, best = 0;
    for (int j = 0; j < nc; ++j) {
      if (a[i][j] != 0.0) {
        ++r[i];
        if (first < 0) first = j;
        last = j;
        diagonals.insert(j - i);
        run = (j > 0 && a[i][j - 1] != 0.0) ? run + 1 : 1;
        best = std::max(best, run);
      }
    }
    if (first >= 0) dist += last - first;
    cluster += best;
  }
  FeatureVector f;
  f.nrows = nr;
  f.ncols = nc;
  for (int v : r) f.nnz += v;
  f.density = f.nnz / (f.nrows * f.ncols);
  f.mean = f.nnz / f.nrows;
  double sq = 0.0;
  for (int v : r) sq += (v - f.mean) * (v - f.mean);
  f.sd = std::sqrt(sq / f.nrows);
  f.cov = f.mean > 0 ? f.sd / f.mean : 0.0;
  f.max = *std::max_element(r.begin(), r.end());
  f.min = *std::min_element(r.begin(), r.end());
  f.maxavg = f.max - f.mean;
  f.distavg = dist / f.nrows;
  f.clusteravg = cluster / f.nrows;
  f.fill = f.nnz > 0 ? f.nrows * f.max / f.nnz : 0.0;
  f.ndiag = static_cast<double>(diagonals.size());
  f.diagfill = f.nnz > 0 ? f.nrows * f.ndiag / f.nnz : 0.0;
  return f;
}

std::vector<SpmvConfig> expected_cascade(const CascadeModelSet& models, const FeatureVector& f) {
  const auto x = f.as_array();
  std::vector<SpmvConfig> seq;
  const std::string fmt = models.format_model.predict(x).label;
  const Format format = parse_format(fmt);
  // Lane width the library falls back to before the lane model has run.
  int guess = 32;
  for (int w : {32, 16, 8, 4, 2}) {
    if (w >= std::floor(f.mean)) guess = w;
  }
  if (fmt == "DIA" || fmt == "HYB") return {{format, Library::LibA, {}}};
  if (fmt == "COO") {
    seq.push_back({Format::COO, Library::LibA, {}});
    seq.push_back({Format::COO, parse_library(models.coo_lib_model.predict(x).label), {}});
    return seq;
  }
  if (fmt == "ELL") {
    seq.push_back({Format::ELL, Library::LibA, {}});
    seq.push_back({Format::ELL, parse_library(models.ell_lib_model.predict(x).label), {}});
    return seq;
  }
  seq.push_back({Format::CSR, Library::LibA, guess});
  const std::string lib = models.csr_lib_model.predict(x).label;
  if (lib != "LibA") {
    seq.push_back({Format::CSR, parse_library(lib), {}});
    return seq;
  }
  seq.push_back({Format::CSR, Library::LibA, guess});
  seq.push_back({Format::CSR, Library::LibA, std::stoi(models.csr_tpv_model.predict(x).label)});
  return seq;
}

std::optional<Labels> brute_labels(const std::vector<std::optional<double>>& seconds) {
  const auto& configs = enumerate_configs();
  // Best time per (format, library) pair, CSR-LibA over all lanes.
  auto best = [&](Format f, std::optional<Library> lib) {
    std::optional<std::pair<double, std::size_t>> b;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      if (configs[i].format != f || (lib && configs[i].library != *lib) || !seconds[i]) continue;
      const std::pair<double, std::size_t> cand{*seconds[i], i};
      if (!b || cand < *b) b = cand;
    }
    return b;
  };
  std::optional<std::pair<double, std::size_t>> top;
  Format format = Format::COO;
  for (Format f : kAllFormats) {
    const auto b = best(f, Library::LibA);
    if (b && (!top || *b < *top)) {
      top = b;
      format = f;
    }
  }
  if (!top) return std::nullopt;
  Labels l;
  l.format = format;
  if (format == Format::DIA || format == Format::HYB) return l;
  std::optional<std::pair<double, std::size_t>> lib_top;
  for (Library lib : kAllLibraries) {
    if (!supports(lib, format)) continue;
    const auto b = best(format, lib);
    if (b && (!lib_top || *b < *lib_top)) {
      lib_top = b;
      l.library = lib;
    }
  }
  if (format == Format::CSR && l.library == Library::LibA) {
    l.lane_width = configs[best(Format::CSR, Library::LibA)->second].lane_width;
  }
  return l;
}

CascadeModelSet forced_models(const std::string& format, const std::string& library,
                              const std::string& lanes) {
  CascadeModelSet s;
  s.format_model = TreeEnsembleModel::constant(format);
  s.coo_lib_model = TreeEnsembleModel::constant(library == "LibC" ? "LibA" : library);
  s.csr_lib_model = TreeEnsembleModel::constant(library);
  s.ell_lib_model = TreeEnsembleModel::constant(library == "LibB" ? "LibA" : library);
  s.csr_tpv_model = TreeEnsembleModel::constant(lanes);
  return s;
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

std::filesystem::path fixture_dir() { return CSPMV_FIXTURE_DIR; }

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cspmv-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
