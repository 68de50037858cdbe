// Test-only generators and brute-force reference implementations. Nothing
// here shares code with the library beyond its public types.
#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cspmv/bench.hpp"
#include "cspmv/cascade.hpp"
#include "cspmv/features.hpp"
#include "cspmv/matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

/// Each cell is nonzero with probability `density`; values in [-1, 1] \ {0}.
cspmv::CooMatrix random_coo(std::mt19937_64& rng, int nrows, int ncols, double density);

/// Random shape (n <= max_n) with a random density <= max_density, sometimes
/// with empty rows and very long rows.
cspmv::CooMatrix random_matrix(std::mt19937_64& rng, int max_n, double max_density);

/// 5-point Laplacian on a k x k grid (n = k * k).
cspmv::CooMatrix poisson2d(int k);

/// n x n with entries on offsets -half..half, diagonally dominant.
cspmv::CooMatrix banded(int n, int half);

cspmv::CooMatrix identity(int n);

Dense to_dense(const cspmv::CooMatrix& m);
std::vector<double> dense_matvec(const Dense& a, const std::vector<double>& x);

/// Gaussian elimination with partial pivoting.
std::vector<double> dense_solve(Dense a, std::vector<double> b);

/// The 15 features evaluated straight from the dense matrix.
cspmv::FeatureVector brute_features(const cspmv::CooMatrix& m);

/// The cascade's branch table written out independently. Returns the
/// sequence of configs the cascade should emit.
std::vector<cspmv::SpmvConfig> expected_cascade(const cspmv::CascadeModelSet& models,
                                                const cspmv::FeatureVector& f);

/// Labels from explicit per-format minima.
std::optional<cspmv::Labels> brute_labels(const std::vector<std::optional<double>>& seconds);

/// Five single-class models forcing the given branch. Unused stages get an
/// arbitrary valid label.
cspmv::CascadeModelSet forced_models(const std::string& format, const std::string& library = "LibA",
                                     const std::string& lanes = "8");

double rel_diff(const std::vector<double>& a, const std::vector<double>& b);
double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b);

std::filesystem::path fixture_dir();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

}  // namespace oracle
