#include "cspmv/features.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cspmv {

std::array<double, kFeatureCount> FeatureVector::as_array() const {
  return {nrows, ncols,   nnz,        density, mean,  sd,    cov,     max,
          min,   maxavg,  distavg,    clusteravg, fill, ndiag, diagfill};
}

FeatureVector FeatureVector::from_array(const std::array<double, kFeatureCount>& a) {
  FeatureVector f;
  f.nrows = a[0];
  f.ncols = a[1];
  f.nnz = a[2];
  f.density = a[3];
  f.mean = a[4];
  f.sd = a[5];
  f.cov = a[6];
  f.max = a[7];
  f.min = a[8];
  f.maxavg = a[9];
  f.distavg = a[10];
  f.clusteravg = a[11];
  f.fill = a[12];
  f.ndiag = a[13];
  f.diagfill = a[14];
  return f;
}

namespace {

class StopCheck {
 public:
  explicit StopCheck(const FeatureOptions& o) : o_(o) {}

  // Call once per row; returns true when extraction must stop.
  bool tick() {
    if (++pending_ < o_.check_interval) return false;
    return flush();
  }

  bool flush() {
    if (o_.progress != nullptr) o_.progress->fetch_add(pending_);
    pending_ = 0;
    return o_.stop.stop_requested();
  }

 private:
  const FeatureOptions& o_;
  std::size_t pending_ = 0;
};

}  // namespace

std::optional<FeatureVector> extract_features(const CsrMatrix& m,
                                              const FeatureOptions& options) {
  if (options.stop.stop_requested()) return std::nullopt;
  FeatureScanStats local;
  FeatureScanStats& stats = options.stats != nullptr ? *options.stats : local;
  StopCheck check(options);

  const Index n = m.nrows();
  const auto rp = m.row_ptr();
  const auto ci = m.col_idx();

  // O(1)
  FeatureVector f;
  f.nrows = n;
  f.ncols = m.ncols();
  f.nnz = static_cast<double>(m.nnz());
  const double cells = f.nrows * f.ncols;
  f.density = cells > 0 ? f.nnz / cells : 0.0;
  f.mean = n > 0 ? f.nnz / f.nrows : 0.0;

  // O(nrows): one sweep over row_ptr.
  double sq = 0.0;
  Offset longest = 0;
  Offset shortest = n > 0 ? rp[1] - rp[0] : 0;
  for (Index i = 0; i < n; ++i) {
    const Offset len = rp[i + 1] - rp[i];
    const double d = f.mean - static_cast<double>(len);
    sq += d * d;
    longest = std::max(longest, len);
    shortest = std::min(shortest, len);
    if (check.tick()) return std::nullopt;
  }
  stats.row_ptr_reads += static_cast<std::size_t>(n) + 1;
  if (check.flush()) return std::nullopt;
  f.sd = n > 0 ? std::sqrt(sq / f.nrows) : 0.0;
  f.max = static_cast<double>(longest);
  f.min = static_cast<double>(shortest);
  f.cov = f.mean > 0 ? f.sd / f.mean : 0.0;
  f.maxavg = f.max - f.mean;
  f.fill = f.nnz > 0 ? f.nrows * f.max / f.nnz : 0.0;

  // O(nnz): one sweep over col_idx.
  std::vector<bool> diagonal_seen(
      n > 0 ? static_cast<std::size_t>(n) + m.ncols() : 0, false);
  std::size_t ndiag = 0;
  double dist_sum = 0.0;
  double cluster_sum = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Offset begin = rp[i];
    const Offset end = rp[i + 1];
    if (begin < end) {
      dist_sum += static_cast<double>(ci[end - 1] - ci[begin]);
      Offset run = 1;
      Offset best = 1;
      for (Offset k = begin; k < end; ++k) {
        if (k > begin) {
          run = ci[k] == ci[k - 1] + 1 ? run + 1 : 1;
          best = std::max(best, run);
        }
        const auto slot = static_cast<std::size_t>(ci[k] - i + n);
        if (!diagonal_seen[slot]) {
          diagonal_seen[slot] = true;
          ++ndiag;
        }
      }
      cluster_sum += static_cast<double>(best);
      stats.col_idx_reads += static_cast<std::size_t>(end - begin);
    }
    if (check.tick()) return std::nullopt;
  }
  stats.row_ptr_reads += static_cast<std::size_t>(n) + 1;
  check.flush();
  f.distavg = n > 0 ? dist_sum / f.nrows : 0.0;
  f.clusteravg = n > 0 ? cluster_sum / f.nrows : 0.0;
  f.ndiag = static_cast<double>(ndiag);
  f.diagfill = f.nnz > 0 ? f.nrows * f.ndiag / f.nnz : 0.0;
  return f;
}

}  // namespace cspmv
