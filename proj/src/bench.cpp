#include "cspmv/bench.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "cspmv/convert.hpp"
#include "cspmv/kernels.hpp"
#include "cspmv/matrix_market.hpp"
#include "cspmv/runtime.hpp"
#include "json.hpp"

namespace cspmv {

using nlohmann::json;

namespace {

std::atomic<TimedRegionHook> g_region_hook{nullptr};

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// First minimum among the configs accepted by `keep`, in config order.
template <class Pred>
std::optional<std::size_t> argmin(std::span<const std::optional<double>> seconds, Pred keep) {
  const auto& configs = enumerate_configs();
  std::optional<std::size_t> best;
  double best_time = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < configs.size() && i < seconds.size(); ++i) {
    if (!seconds[i] || !keep(configs[i])) continue;
    if (!best || *seconds[i] < best_time) {
      best = i;
      best_time = *seconds[i];
    }
  }
  return best;
}

std::string number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

}  // namespace

void set_timed_region_hook(TimedRegionHook hook) { g_region_hook.store(hook); }

double time_prepared(const AnyMatrix& m, const SpmvConfig& cfg, const TimingOptions& o) {
  if (o.runs == 0) throw std::invalid_argument("runs must be >= 1");
  const auto ncols = static_cast<std::size_t>(ncols_of(m));
  std::vector<double> x(ncols);
  for (std::size_t j = 0; j < ncols; ++j) x[j] = 1.0 + static_cast<double>(j % 7) * 0.125;
  std::vector<double> y(static_cast<std::size_t>(nrows_of(m)));
  for (std::size_t i = 0; i < o.warmups; ++i) execute_spmv(cfg, m, x, y, o.workers);

  const TimedRegionHook hook = g_region_hook.load();
  if (hook) hook(true);
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < o.runs; ++i) execute_spmv(cfg, m, x, y, o.workers);
  const auto t1 = std::chrono::steady_clock::now();
  if (hook) hook(false);
  const double total = std::chrono::duration<double>(t1 - t0).count();
  // A clock tick coarser than the loop would report zero.
  return std::max(total / static_cast<double>(o.runs), 1e-12);
}

std::optional<double> time_config(const CooMatrix& m, const SpmvConfig& cfg,
                                  const TimingOptions& o) {
  AnyMatrix converted{m};
  try {
    if (cfg.format != Format::COO) converted = convert(AnyMatrix{m}, cfg.format);
  } catch (const FormatInapplicable&) {
    return std::nullopt;
  }
  return time_prepared(converted, cfg, o);
}

std::string environment_fingerprint(int workers) {
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
  const int w = workers > 0 ? workers : default_workers();
  return "workers=" + std::to_string(w) + " host=" + (host[0] ? host : "unknown");
}

std::string TimingRecord::to_json() const {
  json times = json::object();
  const auto& configs = enumerate_configs();
  for (std::size_t i = 0; i < configs.size(); ++i) {
    times[configs[i].token()] =
        i < seconds.size() && seconds[i] ? json(*seconds[i]) : json("inapplicable");
  }
  json j = {{"matrix_id", matrix_id}, {"runs", runs},   {"warmups", warmups},
            {"fingerprint", fingerprint}, {"features", features.as_array()},
            {"seconds", times}};
  return j.dump(2);
}

TimingRecord TimingRecord::from_json(std::string_view text) {
  TimingRecord r;
  try {
    const json j = json::parse(text);
    r.matrix_id = j.at("matrix_id").get<std::string>();
    r.runs = j.at("runs").get<std::size_t>();
    r.warmups = j.at("warmups").get<std::size_t>();
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.features = FeatureVector::from_array(
        j.at("features").get<std::array<double, kFeatureCount>>());
    const json& times = j.at("seconds");
    for (const SpmvConfig& cfg : enumerate_configs()) {
      const json& t = times.at(cfg.token());
      r.seconds.push_back(t.is_number() ? std::optional<double>(t.get<double>())
                                        : std::nullopt);
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("bad timing record: ") + e.what());
  }
  return r;
}

TimingRecord time_all(const CooMatrix& m, std::string matrix_id, const TimingOptions& o) {
  TimingRecord r;
  r.matrix_id = std::move(matrix_id);
  r.runs = o.runs;
  r.warmups = o.warmups;
  r.fingerprint = environment_fingerprint(o.workers);
  const AnyMatrix csr{to_csr(m)};
  r.features = *extract_features(std::get<CsrMatrix>(csr));
  for (const SpmvConfig& cfg : enumerate_configs()) {
    if (cfg.format == Format::CSR) {
      r.seconds.push_back(time_prepared(csr, cfg, o));
    } else {
      r.seconds.push_back(time_config(m, cfg, o));
    }
  }
  return r;
}

std::optional<Labels> label_timings(std::span<const std::optional<double>> seconds) {
  const auto fmt = argmin(seconds, [](const SpmvConfig& c) { return c.library == Library::LibA; });
  if (!fmt) return std::nullopt;
  Labels labels;
  labels.format = enumerate_configs()[*fmt].format;
  if (labels.format == Format::DIA || labels.format == Format::HYB) return labels;

  const auto lib = argmin(seconds, [&](const SpmvConfig& c) { return c.format == labels.format; });
  labels.library = enumerate_configs()[*lib].library;
  if (labels.format != Format::CSR || *labels.library != Library::LibA) return labels;

  const auto lane = argmin(seconds, [](const SpmvConfig& c) {
    return c.format == Format::CSR && c.library == Library::LibA;
  });
  labels.lane_width = enumerate_configs()[*lane].lane_width;
  return labels;
}

void DatasetRows::add(const FeatureVector& f, const Labels& labels) {
  format.emplace_back(f, std::string(to_string(labels.format)));
  if (!labels.library) return;
  const std::string lib(to_string(*labels.library));
  switch (labels.format) {
    case Format::COO: coo_lib.emplace_back(f, lib); break;
    case Format::CSR: csr_lib.emplace_back(f, lib); break;
    case Format::ELL: ell_lib.emplace_back(f, lib); break;
    default: break;
  }
  if (labels.lane_width) csr_tpv.emplace_back(f, std::to_string(*labels.lane_width));
}

void write_datasets(const DatasetRows& rows, const std::filesystem::path& out_dir,
                    const std::string& fingerprint) {
  std::filesystem::create_directories(out_dir);
  const std::pair<const char*, const LabeledRows*> files[] = {
      {"FORMAT.csv", &rows.format},   {"COO-LIB.csv", &rows.coo_lib},
      {"CSR-LIB.csv", &rows.csr_lib}, {"ELL-LIB.csv", &rows.ell_lib},
      {"CSR-TPV.csv", &rows.csr_tpv}};
  for (const auto& [name, data] : files) {
    std::ofstream out(out_dir / name);
    if (!out) throw DataError("cannot write " + (out_dir / name).string());
    out << "# " << fingerprint << '\n';
    for (std::string_view feature : kFeatureNames) out << feature << ',';
    out << "label\n";
    for (const auto& [f, label] : *data) {
      for (double v : f.as_array()) out << number(v) << ',';
      out << label << '\n';
    }
  }
}

LabeledRows read_dataset(const std::filesystem::path& file) {
  std::istringstream in(read_file(file));
  LabeledRows rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::array<double, kFeatureCount> values{};
    std::istringstream fields(line);
    std::string cell;
    for (std::size_t k = 0; k < kFeatureCount; ++k) {
      if (!std::getline(fields, cell, ',')) {
        throw DataError(file.string() + ": short row '" + line + "'");
      }
      try {
        values[k] = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError(file.string() + ": bad number '" + cell + "'");
      }
    }
    std::getline(fields, cell);
    rows.emplace_back(FeatureVector::from_array(values), cell);
  }
  return rows;
}

DatasetSummary build_dataset(const std::filesystem::path& matrix_dir,
                             const std::filesystem::path& out_dir, const TimingOptions& o,
                             std::ostream* log) {
  if (!std::filesystem::is_directory(matrix_dir)) {
    throw DataError(matrix_dir.string() + " is not a directory");
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(matrix_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".mtx") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .mtx files in " + matrix_dir.string());

  const auto cache_dir = out_dir / "timings";
  std::filesystem::create_directories(cache_dir);
  const std::string fingerprint = environment_fingerprint(o.workers);
  DatasetSummary summary;
  for (const auto& file : files) {
    const std::string id = file.stem().string();
    const auto cache = cache_dir / (id + ".json");
    try {
      std::optional<TimingRecord> record;
      if (std::filesystem::exists(cache)) {
        TimingRecord cached = TimingRecord::from_json(read_file(cache));
        if (cached.runs == o.runs && cached.warmups == o.warmups &&
            cached.fingerprint == fingerprint) {
          record = std::move(cached);
        }
      }
      if (!record) {
        const CooMatrix m = read_matrix_market(file);
        if (m.nnz() == 0) throw DataError("matrix has no entries");
        record = time_all(m, id, o);
        std::ofstream(cache) << record->to_json() << '\n';
      }
      const auto labels = label_timings(record->seconds);
      if (!labels) throw DataError("no applicable configuration");
      summary.rows.add(record->features, *labels);
      ++summary.matrices;
      if (log) *log << "timed " << id << '\n';
    } catch (const std::exception& e) {
      summary.skipped.emplace_back(file.filename().string(), e.what());
      if (log) *log << "skipped " << file.filename().string() << ": " << e.what() << '\n';
    }
  }
  if (summary.matrices == 0) throw DataError("no usable matrix in " + matrix_dir.string());
  write_datasets(summary.rows, out_dir, fingerprint);
  return summary;
}

std::string Comparison::to_json() const {
  json j = {{"default", json::parse(cspmv::to_json(default_run))},
            {"seq", json::parse(cspmv::to_json(sequential))},
            {"async", json::parse(cspmv::to_json(async))},
            {"seq_speedup", sequential_speedup()},
            {"async_speedup", async_speedup()}};
  return j.dump(2);
}

Comparison Comparison::from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    return {solve_report_from_json(j.at("default").dump()),
            solve_report_from_json(j.at("seq").dump()),
            solve_report_from_json(j.at("async").dump())};
  } catch (const json::exception& e) {
    throw DataError(std::string("bad comparison report: ") + e.what());
  }
}

Comparison compare_solvers(SharedMatrix m, std::span<const double> b, const GmresParams& p,
                           const CascadeModelSet& models, int workers) {
  Comparison c;
  c.default_run = gmres_solve(m, b, p, kDefaultConfig, workers);
  c.sequential = sequential_predict_solve(m, b, p, models, workers);
  AsyncOptions options;
  options.workers = workers;
  c.async = async_solve(m, b, p, models, options);
  return c;
}

}  // namespace cspmv
