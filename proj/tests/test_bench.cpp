#include <fstream>

#include "alloc_counter.hpp"
#include "cspmv/bench.hpp"
#include "cspmv/convert.hpp"
#include "cspmv/kernels.hpp"
#include "cspmv/matrix_market.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cspmv;

namespace {

std::vector<std::optional<double>> table(std::initializer_list<std::pair<const char*, double>> set,
                                         double others = 1.0) {
  std::vector<std::optional<double>> t(enumerate_configs().size(), others);
  for (const auto& [token, v] : set) t[config_index(SpmvConfig::parse(token))] = v;
  return t;
}

void write_mtx(const std::filesystem::path& file, const CooMatrix& m) {
  std::ofstream out(file);
  write_matrix_market(out, m);
}

bool same(const std::optional<Labels>& a, const std::optional<Labels>& b) {
  if (a.has_value() != b.has_value()) return false;
  if (!a) return true;
  return a->format == b->format && a->library == b->library && a->lane_width == b->lane_width;
}

}  // namespace

TEST_CASE("time_config basics") {
  const CooMatrix m = oracle::banded(2000, 2);
  TimingOptions one;
  one.runs = 1;
  one.warmups = 0;
  for (const SpmvConfig& cfg : enumerate_configs()) {
    const auto t = time_config(m, cfg, one);
    REQUIRE(t);
    CHECK(*t > 0.0);
  }
  std::vector<Triplet> wide;
  for (int j = 0; j < 5000; ++j) wide.push_back({0, j, 1.0});
  const CooMatrix many = CooMatrix::from_triplets(5000, 5000, std::move(wide));
  CHECK_FALSE(time_config(many, {Format::DIA, Library::LibA, {}}, one).has_value());
  CHECK(time_config(many, kDefaultConfig, one).has_value());
}

TEST_CASE("repeated timing is stable") {
  const CooMatrix m = oracle::banded(20000, 3);
  const AnyMatrix csr{to_csr(m)};
  const SpmvConfig cfg{Format::CSR, Library::LibB, {}};
  bool stable = false;
  for (int attempt = 0; attempt < 3 && !stable; ++attempt) {
    const double a = time_prepared(csr, cfg, {});
    const double b = time_prepared(csr, cfg, {});
    stable = std::max(a, b) <= 1.25 * std::min(a, b);
  }
  CHECK(stable);
}

TEST_CASE("the timed region does not allocate") {
  const CooMatrix m = oracle::banded(3000, 4);
  set_timed_region_hook([](bool entering) {
    if (entering) {
      alloc_counter::start();
    } else {
      alloc_counter::stop();
    }
  });
  for (const SpmvConfig& cfg : enumerate_configs()) {
    const AnyMatrix a = convert(AnyMatrix{m}, cfg.format);
    time_prepared(a, cfg, {20, 2, 0});
    INFO(cfg.token());
    CHECK(alloc_counter::count() == 0);
  }
  set_timed_region_hook(nullptr);
}

TEST_CASE("labels follow the cascade") {
  auto labels = label_timings(table({{"DIA-LibA", 0.1}}));
  REQUIRE(labels);
  CHECK(labels->format == Format::DIA);
  CHECK_FALSE(labels->library);
  DatasetRows rows;
  rows.add(FeatureVector{}, *labels);
  CHECK(rows.format.size() == 1);
  CHECK(rows.coo_lib.size() + rows.csr_lib.size() + rows.ell_lib.size() + rows.csr_tpv.size() == 0);

  labels = label_timings(table({{"CSR-LibA-8", 0.1}, {"CSR-LibA-2", 0.3}, {"CSR-LibB", 0.2}}));
  REQUIRE(labels);
  CHECK(labels->format == Format::CSR);
  CHECK(labels->library == Library::LibA);
  CHECK(labels->lane_width == 8);
  rows = {};
  rows.add(FeatureVector{}, *labels);
  CHECK(rows.csr_lib.at(0).second == "LibA");
  CHECK(rows.csr_tpv.at(0).second == "8");

  // CSR is fastest under LibA, but another library beats every lane width.
  labels = label_timings(table({{"CSR-LibA-4", 0.2}, {"CSR-LibC", 0.1}}));
  CHECK(labels->format == Format::CSR);
  CHECK(labels->library == Library::LibC);
  CHECK_FALSE(labels->lane_width);

  // COO-LibB beats all of LibA, yet the format label only looks at LibA.
  labels = label_timings(table({{"COO-LibB", 0.01}, {"ELL-LibA", 0.5}}));
  CHECK(labels->format == Format::ELL);
  CHECK(labels->library == Library::LibA);

  // Exact ties go to the lower config index.
  labels = label_timings(table({}, 1.0));
  CHECK(labels->format == Format::COO);
  CHECK(labels->library == Library::LibA);
  labels = label_timings(table({{"CSR-LibA-16", 0.5}, {"CSR-LibA-4", 0.5}, {"CSR-LibC", 0.5}}));
  CHECK(labels->lane_width == 4);

  std::vector<std::optional<double>> none(13);
  CHECK_FALSE(label_timings(none));
}

TEST_CASE("labels equal the brute-force argmin on random tables") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> coarse(1, 4);
  std::uniform_real_distribution<double> fine(1e-6, 1e-3);
  std::bernoulli_distribution missing(0.1);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::optional<double>> t(13);
    const bool ties = trial % 2 == 0;
    for (auto& v : t) v = ties ? coarse(rng) * 1e-6 : fine(rng);
    if (missing(rng)) t[config_index({Format::DIA, Library::LibA, {}})].reset();
    INFO("trial ", trial);
    CHECK(same(label_timings(t), oracle::brute_labels(t)));
  }
}

TEST_CASE("timing records and datasets round trip") {
  TimingRecord r;
  r.matrix_id = "m";
  r.runs = 5;
  r.warmups = 1;
  r.fingerprint = "workers=1 host=x";
  r.features.nnz = 12;
  r.features.density = 0.1 + 1e-17;
  r.seconds = table({{"DIA-LibA", 0.25}});
  r.seconds[2].reset();
  const TimingRecord back = TimingRecord::from_json(r.to_json());
  CHECK(back.seconds == r.seconds);
  CHECK(back.features.as_array() == r.features.as_array());
  CHECK(back.fingerprint == r.fingerprint);

  DatasetRows rows;
  std::mt19937_64 rng(1);
  const FeatureVector f = *extract_features(to_csr(oracle::random_coo(rng, 30, 40, 0.2)));
  rows.add(f, {Format::CSR, Library::LibA, 16});
  const auto dir = oracle::scratch_dir("csv");
  write_datasets(rows, dir, "workers=1 host=x");
  const LabeledRows tpv = read_dataset(dir / "CSR-TPV.csv");
  REQUIRE(tpv.size() == 1);
  CHECK(tpv[0].first.as_array() == f.as_array());
  CHECK(tpv[0].second == "16");
  std::ifstream in(dir / "FORMAT.csv");
  std::string first, header;
  std::getline(in, first);
  std::getline(in, header);
  CHECK(first == "# workers=1 host=x");
  CHECK(header ==
        "nrows,ncols,nnz,density,mean,sd,cov,max,min,maxavg,distavg,clusteravg,fill,ndiag,"
        "diagfill,label");
}

TEST_CASE("dataset build over a directory") {
  const auto src = oracle::scratch_dir("corpus");
  const auto out = oracle::scratch_dir("corpus-out");
  std::mt19937_64 rng(6);
  write_mtx(src / "a.mtx", oracle::banded(300, 1));
  write_mtx(src / "b.mtx", oracle::random_coo(rng, 200, 200, 0.05));
  write_mtx(src / "c.mtx", oracle::poisson2d(12));
  std::ofstream(src / "bad.mtx") << "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1 1\n";
  std::ofstream(src / "notes.txt") << "ignored\n";

  const TimingOptions o{3, 1, 0};
  const DatasetSummary s = build_dataset(src, out, o);
  CHECK(s.matrices == 3);
  REQUIRE(s.skipped.size() == 1);
  CHECK(s.skipped[0].first == "bad.mtx");
  CHECK(read_dataset(out / "FORMAT.csv").size() == 3);
  std::size_t routed = 0;
  for (const auto& [f, label] : s.rows.format) {
    routed += label == "COO" || label == "CSR" || label == "ELL";
  }
  CHECK(s.rows.coo_lib.size() + s.rows.csr_lib.size() + s.rows.ell_lib.size() == routed);
  std::size_t csr_liba = 0;
  for (const auto& [f, label] : s.rows.csr_lib) csr_liba += label == "LibA";
  CHECK(s.rows.csr_tpv.size() == csr_liba);
  CHECK(std::filesystem::exists(out / "timings" / "a.json"));

  // Cached timings are reused: labels cannot change.
  const auto stamp = std::filesystem::last_write_time(out / "timings" / "a.json");
  const DatasetSummary again = build_dataset(src, out, o);
  CHECK(std::filesystem::last_write_time(out / "timings" / "a.json") == stamp);
  for (std::size_t i = 0; i < s.rows.format.size(); ++i) {
    CHECK(again.rows.format[i].second == s.rows.format[i].second);
  }

  CHECK_THROWS_AS(build_dataset(oracle::scratch_dir("empty"), out, o), DataError);
  CHECK_THROWS_AS(build_dataset(src / "missing", out, o), DataError);
}

TEST_CASE("solver comparison on the identity") {
  const auto eye = std::make_shared<const AnyMatrix>(oracle::identity(50));
  const std::vector<double> b(50, 2.0);
  const Comparison c = compare_solvers(eye, b, {}, oracle::forced_models("DIA"));
  for (const SolveReport* r : {&c.default_run, &c.sequential, &c.async}) {
    CHECK(r->converged);
    CHECK(r->iterations == 1);
  }
  CHECK(c.sequential_speedup() > 0);
  const Comparison back = Comparison::from_json(c.to_json());
  CHECK(back.async.config_timeline.size() == c.async.config_timeline.size());
  CHECK(back.sequential.final_config().token() == "DIA-LibA");
}
