#pragma once

// Experiment harness behind the `lastiter` executable. run_cli() is kept
// separate from main() so the tests can drive it in-process.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lastiter/lastiter.hpp"

namespace lastiter::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr double kSlackTol = 1e-9;

inline const char* kCsvHeader = "method,N,h,B,R,instance,seed,last_gap,best_gap,avg_gap,bound_last,bound_best,slack";

/// Flags that define one experiment cell.
struct CellSpec {
  std::string method = "constant";
  std::size_t N = 10;
  std::optional<double> h;
  std::optional<double> t;
  std::optional<double> h2;
  std::vector<double> custom_steps;  // normalized: multiplied by R / B
  std::string instance = "abs";
  double B = 1.0;
  double R = 1.0;
  std::uint64_t seed = 0;
  int dim = 5;
};

struct CellResult {
  CellSpec spec;
  std::optional<double> param;  // h or t as used
  double last_gap = 0.0;
  double best_gap = 0.0;
  double avg_gap = 0.0;
  std::optional<double> bound_last;
  double bound_best = 0.0;
  std::optional<double> bound_log;
  double slack = 0.0;
  bool violated = false;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<double> read_steps_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open steps file: " + path);
  std::vector<double> steps;
  std::string token;
  while (in >> token) {
    std::replace(token.begin(), token.end(), ',', ' ');
    std::istringstream parts(token);
    double v = 0.0;
    while (parts >> v) steps.push_back(v);
  }
  if (steps.empty()) throw UsageError("steps file is empty: " + path);
  return steps;
}

namespace detail {

inline double require(const std::optional<double>& v, const char* flag) {
  if (!v) throw UsageError(std::string("missing ") + flag);
  return *v;
}

inline double schedule_param(const CellSpec& c) {
  if (c.method == "constant") return require(c.h, "--h");
  if (c.method == "length") return c.t ? *c.t : require(c.h, "--t");
  return std::numeric_limits<double>::quiet_NaN();
}

inline double require_positive_h(const CellSpec& c) {
  const double h = require(c.h, "--h");
  if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("--h must be positive");
  return h;
}

}  // namespace detail

/// Runs one cell and evaluates every bound that applies to it.
inline CellResult evaluate_cell(const CellSpec& c) {
  if (c.N < 1) throw UsageError("--N must be >= 1");
  if (!(c.B > 0.0) || !(c.R > 0.0)) throw UsageError("--B and --R must be positive");
  static const std::vector<std::string> methods = {"constant", "length", "optimal", "optimal-length", "custom"};
  if (std::find(methods.begin(), methods.end(), c.method) == methods.end())
    throw UsageError("unknown method: " + c.method);

  CellResult out;
  out.spec = c;
  const double param = detail::schedule_param(c);
  if (c.method == "constant" || c.method == "length") {
    if (!(param > 0.0) || !std::isfinite(param)) throw UsageError("step parameter must be positive");
    out.param = param;
  }

  // Normalized scenario.
  std::string inst = c.instance;
  if (inst == "tight") {
    const double h = detail::require_positive_h(c);
    inst = h <= constant_step_knee(c.N) ? "abs" : "longstep";
  }
  Scenario sc;
  bool scripted_fits = false;
  std::vector<double> steps = c.custom_steps;
  if (inst == "abs") {
    sc = abs_instance(1.0, 1.0);
  } else if (inst == "longstep") {
    sc = long_step_instance(c.N, detail::require_positive_h(c));
    scripted_fits = c.method == "constant";
  } else if (inst == "lemma-i" || inst == "lemma-ii") {
    const double h2 = c.h2 ? *c.h2 : (inst == "lemma-i" ? 0.05 : no_universal_certificate().h2_star);
    sc = inst == "lemma-i" ? lemma_last_i(h2) : lemma_last_ii(h2);
    if (c.method == "custom" && steps.empty()) {
      if (c.N != 2) throw UsageError("lemma instances run with --N 2 and the default steps");
      steps = lemma_last_steps(h2);
      scripted_fits = true;
    }
  } else if (inst == "random") {
    if (c.dim < 1) throw UsageError("--dim must be >= 1");
    sc = random_plmax_scenario(c.seed, c.dim, 2 * static_cast<std::size_t>(c.dim));
  } else {
    throw UsageError("unknown instance: " + c.instance);
  }
  ProblemInstance p = scripted_fits ? sc.instance : sc.unscripted();
  Point x1 = sc.x1;
  if (c.B != 1.0 || c.R != 1.0) {
    p = scale_instance(p, c.B, c.R);
    x1 = c.R * x1;
  }

  const double scale = c.R / c.B;
  const double n1 = static_cast<double>(c.N) + 1.0;
  StepSchedule schedule = StepSchedule::optimal_last_iterate(c.N);
  double h_last = 0.0;
  if (c.method == "constant") {
    schedule = StepSchedule::constant_normalized(param);
    h_last = param * scale;
  } else if (c.method == "length") {
    schedule = StepSchedule::constant_length(param);
    h_last = param * scale;
  } else if (c.method == "optimal") {
    h_last = scale / std::pow(n1, 1.5);
  } else if (c.method == "optimal-length") {
    schedule = StepSchedule::optimal_length(c.N);
    h_last = scale / std::pow(n1, 1.5);
  } else {
    if (steps.size() < c.N) throw UsageError("custom schedule needs at least N steps");
    for (double& h : steps) {
      if (!(h > 0.0)) throw UsageError("custom steps must be positive");
      h *= scale;
    }
    steps.resize(c.N);
    h_last = steps.back();
    schedule = StepSchedule::custom(steps);
  }

  const RunTrace trace = run(p, schedule, x1, c.N, RecordMode::full);
  const std::vector<double> h_all = with_last_step(trace, h_last);
  const double br = c.B * c.R;
  out.last_gap = last_gap(trace, p);
  out.best_gap = best_gap(trace, p);
  out.avg_gap = avg_gap(trace, p, h_all);
  out.bound_best = best_iterate_bound(h_all, c.B, c.R);

  if (c.method == "constant") {
    out.bound_last = br * constant_step_rate(c.N, param);
  } else if (c.method == "length") {
    out.bound_last = br * constant_length_rate(c.N, param);
  } else if (c.method == "optimal" || c.method == "optimal-length") {
    out.bound_last = br * optimal_method_rate(c.N);
  } else if (scripted_fits && sc.predicted_gap) {
    out.bound_last = br * *sc.predicted_gap;
  }
  if ((c.method == "constant" || c.method == "length") && c.N >= 2 && param > constant_step_knee(c.N))
    out.bound_log = br * weakened_rate_bounds(c.N, param).log_form;

  out.slack = out.bound_last ? *out.bound_last - out.last_gap : out.bound_best - out.best_gap;
  const double tol = kSlackTol * std::max(1.0, br);
  out.violated = out.slack < -tol || out.best_gap > out.bound_best + tol;
  return out;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

inline std::string csv_row(const CellResult& r, bool with_log) {
  std::ostringstream os;
  os << r.spec.method << ',' << r.spec.N << ',' << fmt(r.param) << ',' << fmt(r.spec.B) << ','
     << fmt(r.spec.R) << ',' << r.spec.instance << ',' << r.spec.seed << ',' << fmt(r.last_gap) << ','
     << fmt(r.best_gap) << ',' << fmt(r.avg_gap) << ',' << fmt(r.bound_last) << ',' << fmt(r.bound_best)
     << ',' << fmt(r.slack);
  if (with_log) os << ',' << fmt(r.bound_log);
  return os.str();
}

inline std::string json_row(const CellResult& r, bool with_log) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::ordered_json j;
  j["method"] = r.spec.method;
  j["N"] = r.spec.N;
  j["h"] = opt(r.param);
  j["B"] = r.spec.B;
  j["R"] = r.spec.R;
  j["instance"] = r.spec.instance;
  j["seed"] = r.spec.seed;
  j["last_gap"] = r.last_gap;
  j["best_gap"] = r.best_gap;
  j["avg_gap"] = r.avg_gap;
  j["bound_last"] = opt(r.bound_last);
  j["bound_best"] = r.bound_best;
  j["slack"] = r.slack;
  if (with_log) j["bound_log"] = opt(r.bound_log);
  return j.dump();
}

inline void emit(std::ostream& os, const std::vector<CellResult>& rows, const std::string& format,
                 bool with_log) {
  if (format == "csv") {
    os << kCsvHeader << (with_log ? ",bound_log" : "") << '\n';
    for (const auto& r : rows) os << csv_row(r, with_log) << '\n';
  } else {
    for (const auto& r : rows) os << json_row(r, with_log) << '\n';
  }
}

/// Parses "1,2,5:8" into {1,2,5,6,7,8}.
inline std::vector<std::size_t> parse_n_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto colon = item.find(':');
    try {
      if (colon == std::string::npos) {
        out.push_back(std::stoul(item));
      } else {
        const std::size_t a = std::stoul(item.substr(0, colon));
        const std::size_t b = std::stoul(item.substr(colon + 1));
        for (std::size_t n = a; n <= b; ++n) out.push_back(n);
      }
    } catch (const std::logic_error&) {
      throw UsageError("bad --N-list entry: " + item);
    }
  }
  if (out.empty()) throw UsageError("--N-list is empty");
  return out;
}

/// Parses "min:max:step" into min, min+step, ... <= max.
inline std::vector<double> parse_h_grid(const std::string& text) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream in(text);
  if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':')
    throw UsageError("--h-grid must be min:max:step");
  if (!(step > 0.0) || !(lo > 0.0) || hi < lo) throw UsageError("--h-grid is empty");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double h = lo + static_cast<double>(i) * step;
    if (h > hi + 1e-12 * step) break;
    grid.push_back(h);
  }
  return grid;
}

inline std::vector<CellResult> evaluate_all(const std::vector<CellSpec>& cells, bool parallel) {
  std::vector<CellResult> rows(cells.size());
  if (!parallel || cells.size() < 2) {
    for (std::size_t i = 0; i < cells.size(); ++i) rows[i] = evaluate_cell(cells[i]);
    return rows;
  }
  const std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<void>> jobs;
  for (std::size_t w = 0; w < workers; ++w) {
    jobs.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < cells.size(); i += workers) rows[i] = evaluate_cell(cells[i]);
    }));
  }
  for (auto& j : jobs) j.get();
  return rows;
}

struct CertifyOutcome {
  double min_slack = std::numeric_limits<double>::infinity();
  std::uint64_t worst_seed = 0;
  std::size_t checks = 0;
};

/// Randomized check of the key inequality: random instances and schedules,
/// random nondecreasing weights, x_hat alternating between the minimizer and
/// a random feasible point. Trial i uses seed + i.
inline CertifyOutcome certify_trials(std::size_t trials, std::size_t N, std::uint64_t seed,
                                     bool nonmonotone = false) {
  CertifyOutcome out;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::uint64_t trial_seed = seed + i;
    std::mt19937_64 rng(trial_seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Index dim = 2 + static_cast<Index>(rng() % 9);
    const std::size_t pieces = 1 + rng() % 12;
    const auto set = static_cast<FeasibleSet>(rng() % 3);
    const Scenario sc = random_plmax_scenario(rng(), dim, pieces, set);

    StepSchedule schedule = StepSchedule::optimal_last_iterate(N);
    switch (rng() % 4) {
      case 0: schedule = StepSchedule::constant_normalized(0.02 + unif(rng)); break;
      case 1: schedule = StepSchedule::constant_length(0.02 + unif(rng)); break;
      case 2: break;
      default: schedule = StepSchedule::optimal_length(N); break;
    }
    const RunTrace trace = run(sc.instance, schedule, sc.x1, N, RecordMode::full);

    WeightSequence w{std::vector<double>(N + 2), 0.01 + unif(rng), N};
    for (double& v : w.v) v = 1e-3 + unif(rng);
    std::sort(w.v.begin(), w.v.end());
    if (nonmonotone) std::reverse(w.v.begin(), w.v.end());

    Point x_hat = *sc.instance.x_star;
    if (i % 2 == 1) {
      std::normal_distribution<double> normal(0.0, 1.0);
      Point y(dim);
      for (Index j = 0; j < dim; ++j) y[j] = normal(rng);
      x_hat = sc.instance.project(y);
    }
    const LemmaCheck check = verify_lemma(trace, sc.instance, w, x_hat);
    ++out.checks;
    if (check.slack < out.min_slack) {
      out.min_slack = check.slack;
      out.worst_seed = trial_seed;
    }
  }
  return out;
}

inline int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Last-iterate experiments for projected subgradient methods", "lastiter"};
  app.set_help_flag("--help", "Print this help message and exit");
  app.require_subcommand(1);

  CellSpec spec;
  std::optional<std::string> steps_file;
  std::string format = "csv";
  std::optional<std::string> out_path;

  auto add_cell_flags = [&](CLI::App* sub, bool single) {
    sub->add_option("--method", spec.method, "constant|length|optimal|optimal-length|custom")
        ->check(CLI::IsMember({"constant", "length", "optimal", "optimal-length", "custom"}));
    if (single) sub->add_option("--N", spec.N, "Number of iterations");
    sub->add_option("--h", spec.h, "Normalized constant step size h (h_k = h R / B)");
    sub->add_option("--t", spec.t, "Step length parameter t (moves of length t R)");
    sub->add_option("--h2", spec.h2, "Second step of the lemma-i / lemma-ii instances");
    sub->add_option("--steps-file", steps_file, "Normalized custom step sizes, whitespace or comma separated");
    sub->add_option("--instance", spec.instance, "abs|longstep|lemma-i|lemma-ii|random|tight")
        ->check(CLI::IsMember({"abs", "longstep", "lemma-i", "lemma-ii", "random", "tight"}));
    sub->add_option("--B", spec.B, "Subgradient bound B");
    sub->add_option("--R", spec.R, "Initial distance bound R");
    sub->add_option("--seed", spec.seed, "Seed for random instances");
    sub->add_option("--dim", spec.dim, "Dimension of random instances");
    sub->add_option("--format", format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", out_path, "Write results to this file instead of stdout");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Run one experiment cell");
  add_cell_flags(run_cmd, true);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Run a grid of cells");
  add_cell_flags(sweep_cmd, false);
  std::string n_list = "10";
  std::optional<std::string> h_grid;
  bool parallel = false;
  sweep_cmd->add_option("--N-list", n_list, "Comma separated N values; a:b for inclusive ranges");
  sweep_cmd->add_option("--h-grid", h_grid, "min:max:step grid for h (or t)");
  sweep_cmd->add_flag("--parallel", parallel, "Evaluate cells on all hardware threads");
  spec.instance = "abs";

  CLI::App* certify_cmd = app.add_subcommand("certify", "Randomized check of the key weighted inequality");
  long long trials = 200;
  std::size_t certify_n = 10;
  std::uint64_t certify_seed = 0;
  bool nonmonotone = false;
  certify_cmd->add_option("--trials", trials, "Number of random trials");
  certify_cmd->add_option("--N", certify_n, "Iterations per trial");
  certify_cmd->add_option("--seed", certify_seed, "Base seed");
  certify_cmd->add_flag("--debug-nonmonotone", nonmonotone, "Reverse the sampled weights (input validation check)");

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::ofstream file;
  std::ostream* sink = &out;
  auto open_sink = [&] {
    if (out_path) {
      file.open(*out_path);
      if (!file) throw UsageError("cannot open output file: " + *out_path);
      sink = &file;
    }
  };

  try {
    if (steps_file) spec.custom_steps = read_steps_file(*steps_file);

    if (*run_cmd) {
      const CellResult r = evaluate_cell(spec);
      open_sink();
      emit(*sink, {r}, format, false);
      return r.violated ? kExitViolation : kExitOk;
    }

    if (*sweep_cmd) {
      const std::vector<std::size_t> ns = parse_n_list(n_list);
      std::vector<std::optional<double>> hs;
      const bool needs_grid = spec.method == "constant" || spec.method == "length";
      if (h_grid) {
        for (double h : parse_h_grid(*h_grid)) hs.emplace_back(h);
      } else if (needs_grid && (spec.h || spec.t)) {
        hs.push_back(spec.method == "length" && spec.t ? spec.t : spec.h);
      } else if (needs_grid) {
        throw UsageError("sweep needs --h-grid for this method");
      } else {
        hs.push_back(spec.h);
      }
      std::vector<CellSpec> cells;
      for (std::size_t n : ns) {
        for (const auto& h : hs) {
          CellSpec c = spec;
          c.N = n;
          if (c.method == "length") c.t = h;
          else c.h = h;
          cells.push_back(c);
        }
      }
      const std::vector<CellResult> rows = evaluate_all(cells, parallel);
      open_sink();
      emit(*sink, rows, format, true);
      const bool bad = std::any_of(rows.begin(), rows.end(), [](const CellResult& r) { return r.violated; });
      return bad ? kExitViolation : kExitOk;
    }

    if (*certify_cmd) {
      if (trials <= 0) throw UsageError("--trials must be positive");
      if (certify_n < 1) throw UsageError("--N must be >= 1");
      const CertifyOutcome o = certify_trials(static_cast<std::size_t>(trials), certify_n, certify_seed, nonmonotone);
      open_sink();
      *sink << "trials=" << trials << " N=" << certify_n << " seed=" << certify_seed
            << " checks=" << o.checks << " min_slack=" << fmt(o.min_slack);
      if (o.min_slack < -kSlackTol) {
        *sink << " status=violation offending_seed=" << o.worst_seed << '\n';
        return kExitViolation;
      }
      *sink << " status=ok\n";
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const lastiter::Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace lastiter::cli
