#include "cspmv/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "cspmv/bench.hpp"
#include "cspmv/convert.hpp"
#include "cspmv/kernels.hpp"
#include "cspmv/matrix_market.hpp"
#include "cspmv/runtime.hpp"

namespace cspmv {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string input;
  std::string models;
  std::string out;
  std::string mode = "default";
  std::size_t runs = 200;
  std::size_t warmups = 10;
  int restart = 30;
  double tol = 1e-8;
  std::size_t max_iters = 10000;
  std::optional<std::uint64_t> seed;
  bool timings = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

GmresParams gmres_params(const Options& o) {
  GmresParams p;
  p.restart = o.restart;
  p.tol = o.tol;
  p.max_iters = o.max_iters;
  p.seed = o.seed;
  try {
    p.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return p;
}

CascadeModelSet load_models(const Options& o) {
  if (o.models.empty()) throw UsageError("--models is required for this command");
  return CascadeModelSet::load(o.models);
}

std::string matrix_id(const std::string& path) { return fs::path(path).stem().string(); }

CooMatrix load_square(const std::string& path) {
  CooMatrix m = read_matrix_market(path);
  if (m.nrows() != m.ncols()) throw DataError(path + ": matrix is not square");
  if (m.nnz() == 0) throw DataError(path + ": matrix has no entries");
  return m;
}

void write_text(const fs::path& file, const std::string& text) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw DataError("cannot write " + file.string());
  out << text << '\n';
}

std::string fixed(double v, int digits) {
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(digits) << v;
  return ss.str();
}

std::string sci(double v) {
  std::ostringstream ss;
  ss << std::scientific << std::setprecision(3) << v;
  return ss.str();
}

void print_solve(const SolveReport& r, std::ostream& out) {
  out << r.matrix_id << " mode=" << r.mode << " converged=" << (r.converged ? "true" : "false")
      << " iterations=" << r.iterations << " residual=" << sci(r.final_relative_residual)
      << " wall=" << sci(r.wall_seconds) << "s advisor=" << to_string(r.advisor_outcome)
      << '\n';
  for (const TimelineEntry& e : r.config_timeline) {
    out << "  from iteration " << e.iteration << ": " << e.config.token() << " (" << e.source
        << ")\n";
  }
  if (!r.advisor_error.empty()) out << "  advisor error: " << r.advisor_error << '\n';
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  std::vector<fs::path> files;
  if (fs::is_directory(o.input)) {
    for (const auto& e : fs::directory_iterator(o.input)) {
      if (e.is_regular_file() && e.path().extension() == ".mtx") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no .mtx files in " + o.input);
  } else {
    files.emplace_back(o.input);
  }
  const TimingOptions t{o.runs, o.warmups, 0};
  for (const auto& file : files) {
    const TimingRecord r = time_all(read_matrix_market(file), matrix_id(file.string()), t);
    out << r.matrix_id << " (" << r.fingerprint << ", runs=" << r.runs
        << ", warmups=" << r.warmups << ")\n";
    const auto& configs = enumerate_configs();
    for (std::size_t i = 0; i < configs.size(); ++i) {
      out << "  " << std::left << std::setw(12) << configs[i].token() << ' '
          << (r.seconds[i] ? sci(*r.seconds[i]) : std::string("inapplicable")) << '\n';
    }
    if (!o.out.empty()) write_text(fs::path(o.out) / (r.matrix_id + ".timing.json"), r.to_json());
  }
  (void)err;
  return kExitOk;
}

int cmd_dataset(const Options& o, std::ostream& out, std::ostream& err) {
  if (o.out.empty()) throw UsageError("--out is required for dataset");
  const DatasetSummary s = build_dataset(o.input, o.out, {o.runs, o.warmups, 0}, &err);
  out << "matrices " << s.matrices << ", skipped " << s.skipped.size() << '\n'
      << "FORMAT.csv " << s.rows.format.size() << " rows\n"
      << "COO-LIB.csv " << s.rows.coo_lib.size() << " rows\n"
      << "CSR-LIB.csv " << s.rows.csr_lib.size() << " rows\n"
      << "ELL-LIB.csv " << s.rows.ell_lib.size() << " rows\n"
      << "CSR-TPV.csv " << s.rows.csr_tpv.size() << " rows\n";
  return kExitOk;
}

int cmd_predict(const Options& o, std::ostream& out, std::ostream&) {
  const CascadeModelSet models = load_models(o);
  const CooMatrix m = read_matrix_market(o.input);
  const FeatureVector f = *extract_features(to_csr(m));
  const SpmvConfig final_cfg = cascade_predict(models, f, [&](const CascadeDecision& d) {
    out << to_string(d.stage) << ": " << d.label << " -> " << d.config.token()
        << (d.terminal ? " (terminal)" : "");
    if (o.timings) out << " [" << sci(d.inference_seconds) << "s]";
    out << '\n';
    for (std::size_t k = 0; k < d.classes.size(); ++k) {
      out << "  " << std::left << std::setw(6) << d.classes[k] << ' ' << fixed(d.scores[k], 6)
          << '\n';
    }
  });
  out << "final: " << final_cfg.token() << '\n';
  return kExitOk;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream&) {
  const GmresParams p = gmres_params(o);
  if (o.mode != "default" && o.mode != "seq" && o.mode != "async") {
    throw UsageError("--mode must be default, seq or async");
  }
  std::optional<CascadeModelSet> models;
  if (o.mode != "default") models = load_models(o);
  CooMatrix coo = load_square(o.input);
  const std::vector<double> b = make_rhs(coo, p);
  const auto m = std::make_shared<const AnyMatrix>(std::move(coo));

  SolveReport r = o.mode == "default" ? gmres_solve(m, b, p)
                  : o.mode == "seq"   ? sequential_predict_solve(m, b, p, *models)
                                      : async_solve(m, b, p, *models);
  r.matrix_id = matrix_id(o.input);
  print_solve(r, out);
  if (!o.out.empty()) write_text(fs::path(o.out) / (r.matrix_id + "." + r.mode + ".json"), to_json(r));
  return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out, std::ostream&) {
  const GmresParams p = gmres_params(o);
  const CascadeModelSet models = load_models(o);
  CooMatrix coo = load_square(o.input);
  const std::vector<double> b = make_rhs(coo, p);
  const auto m = std::make_shared<const AnyMatrix>(std::move(coo));
  Comparison c = compare_solvers(m, b, p, models);
  const std::string id = matrix_id(o.input);
  for (SolveReport* r : {&c.default_run, &c.sequential, &c.async}) {
    r->matrix_id = id;
    print_solve(*r, out);
  }
  out << "speedup seq=" << fixed(c.sequential_speedup(), 3)
      << " async=" << fixed(c.async_speedup(), 3) << '\n';
  if (!o.out.empty()) write_text(fs::path(o.out) / (id + ".compare.json"), c.to_json());
  return kExitOk;
}

std::string swap_list(const SolveReport& r) {
  std::string s;
  for (std::size_t i = 1; i < r.config_timeline.size(); ++i) {
    if (!s.empty()) s += ' ';
    s += std::to_string(r.config_timeline[i].iteration) + ":" +
         r.config_timeline[i].config.token();
  }
  return s.empty() ? "-" : s;
}

int cmd_report(const Options& o, std::ostream& out, std::ostream&) {
  if (!fs::is_directory(o.input)) throw DataError(o.input + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(o.input)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && name.size() > 13 &&
        name.compare(name.size() - 13, 13, ".compare.json") == 0) {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .compare.json reports in " + o.input);

  std::ostringstream csv;
  csv << "matrix,default_seconds,seq_seconds,async_seconds,seq_speedup,async_speedup,"
         "seq_config,async_final_config,async_swaps\n";
  out << std::left << std::setw(20) << "matrix" << std::right << std::setw(12) << "default_s"
      << std::setw(12) << "seq_s" << std::setw(12) << "async_s" << std::setw(9) << "seq_x"
      << std::setw(9) << "async_x" << "  async swaps\n";
  double seq_sum = 0.0, async_sum = 0.0;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::stringstream text;
    text << in.rdbuf();
    const Comparison c = Comparison::from_json(text.str());
    const std::string& id = c.default_run.matrix_id;
    out << std::left << std::setw(20) << id << std::right << std::setw(12)
        << sci(c.default_run.wall_seconds) << std::setw(12) << sci(c.sequential.wall_seconds)
        << std::setw(12) << sci(c.async.wall_seconds) << std::setw(9)
        << fixed(c.sequential_speedup(), 3) << std::setw(9) << fixed(c.async_speedup(), 3)
        << "  " << swap_list(c.async) << '\n';
    csv << id << ',' << c.default_run.wall_seconds << ',' << c.sequential.wall_seconds << ','
        << c.async.wall_seconds << ',' << c.sequential_speedup() << ',' << c.async_speedup()
        << ',' << c.sequential.final_config().token() << ','
        << c.async.final_config().token() << ',' << swap_list(c.async) << '\n';
    seq_sum += c.sequential_speedup();
    async_sum += c.async_speedup();
  }
  const auto n = static_cast<double>(files.size());
  out << "mean speedup seq=" << fixed(seq_sum / n, 3) << " async=" << fixed(async_sum / n, 3)
      << '\n';
  if (!o.out.empty()) write_text(fs::path(o.out) / "speedups.csv", csv.str());
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cascaded SpMV configuration prediction and predict-while-solve GMRES",
               "cspmv"};
  app.require_subcommand(1);
  Options o;

  auto input = [&](CLI::App* sub, const char* what) {
    sub->add_option("input", o.input, what)->required();
  };
  auto timing = [&](CLI::App* sub) {
    sub->add_option("--runs", o.runs, "timed SpMV runs per configuration")
        ->check(CLI::PositiveNumber);
    sub->add_option("--warmups", o.warmups, "untimed runs before timing");
  };
  auto solver = [&](CLI::App* sub) {
    sub->add_option("--restart", o.restart, "GMRES restart length")->check(CLI::PositiveNumber);
    sub->add_option("--tol", o.tol, "relative residual tolerance");
    sub->add_option("--max-iters", o.max_iters, "iteration limit");
    sub->add_option("--seed", o.seed, "random right-hand side seed (default b = A*1)");
    sub->add_option("--models", o.models, "directory holding the five model files");
  };

  CLI::App* bench = app.add_subcommand("bench", "time every configuration");
  input(bench, ".mtx file or directory");
  timing(bench);
  bench->add_option("--out", o.out, "directory for <id>.timing.json");

  CLI::App* dataset = app.add_subcommand("dataset", "build the five training datasets");
  input(dataset, "directory of .mtx files");
  timing(dataset);
  dataset->add_option("--out", o.out, "output directory")->required();

  CLI::App* predict = app.add_subcommand("predict", "run the cascade on one matrix");
  input(predict, ".mtx file");
  predict->add_option("--models", o.models, "directory holding the five model files")
      ->required();
  predict->add_flag("--timings", o.timings, "print per-stage inference time");

  CLI::App* solve = app.add_subcommand("solve", "solve A x = b with GMRES");
  input(solve, ".mtx file");
  solver(solve);
  solve->add_option("--mode", o.mode, "default, seq or async")
      ->check(CLI::IsMember({"default", "seq", "async"}));
  solve->add_option("--out", o.out, "directory for <id>.<mode>.json");

  CLI::App* compare = app.add_subcommand("compare", "default vs seq vs async");
  input(compare, ".mtx file");
  solver(compare);
  compare->add_option("--out", o.out, "directory for <id>.compare.json");

  CLI::App* report = app.add_subcommand("report", "summarise stored comparisons");
  input(report, "directory of .compare.json files");
  report->add_option("--out", o.out, "directory for speedups.csv");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (bench->parsed()) return cmd_bench(o, out, err);
    if (dataset->parsed()) return cmd_dataset(o, out, err);
    if (predict->parsed()) return cmd_predict(o, out, err);
    if (solve->parsed()) return cmd_solve(o, out, err);
    if (compare->parsed()) return cmd_compare(o, out, err);
    return cmd_report(o, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

}  // namespace cspmv
