#pragma once

// Command-line front end: run, bench, profile, problems list, diagnose.
// Exit codes: 0 success, 1 run failure, 2 usage error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qarsta/bench.hpp"
#include "qarsta/diagnostics.hpp"
#include "qarsta/io.hpp"
#include "qarsta/problems.hpp"
#include "qarsta/profiles.hpp"
#include "qarsta/solver.hpp"

namespace qarsta::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Raised for flag combinations that parse but make no sense together.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

inline std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

inline long long parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("invalid " + what + ": '" + s + "'");
  }
}

/// "0-3,7" -> {0,1,2,3,7}
inline std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split(text, ',')) {
    const auto dash = item.find('-', 1);
    if (dash == std::string::npos) {
      const long long v = parse_int(item, "seed");
      if (v < 0) throw UsageError("seeds must be non-negative");
      out.push_back(static_cast<std::uint64_t>(v));
    } else {
      const long long lo = parse_int(item.substr(0, dash), "seed range");
      const long long hi = parse_int(item.substr(dash + 1), "seed range");
      if (lo < 0 || hi < lo) throw UsageError("invalid seed range '" + item + "'");
      for (long long v = lo; v <= hi; ++v) out.push_back(static_cast<std::uint64_t>(v));
    }
  }
  if (out.empty()) throw UsageError("--seeds is empty");
  return out;
}

/// "10:10,5:1,3" -> {(10,10), (5,1), (3,3)}
inline std::vector<std::pair<int, int>> parse_pp_list(const std::string& text) {
  std::vector<std::pair<int, int>> out;
  for (const auto& item : split(text, ',')) {
    const auto colon = item.find(':');
    const int p = static_cast<int>(parse_int(item.substr(0, colon), "p"));
    const int pr = colon == std::string::npos ? p : static_cast<int>(parse_int(item.substr(colon + 1), "p_rand"));
    out.emplace_back(p, pr);
  }
  if (out.empty()) throw UsageError("--pp is empty");
  return out;
}

inline std::vector<ModelKind> parse_model_list(const std::string& text) {
  std::vector<ModelKind> out;
  for (const auto& item : split(text, ',')) {
    try {
      out.push_back(parse_model_tag(item));
    } catch (const ArgumentError& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("--models is empty");
  return out;
}

inline std::vector<double> parse_tau_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& item : split(text, ',')) {
    try {
      std::size_t used = 0;
      const double t = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(t);
    } catch (const std::exception&) {
      throw UsageError("invalid tau '" + item + "'");
    }
  }
  for (double t : out)
    if (!(t > 0.0 && t < 1.0)) throw UsageError("tau values must lie in (0,1)");
  if (out.empty()) throw UsageError("--taus is empty");
  return out;
}

/// Default worker count: QARSTA_WORKERS if set, else 1.
inline int default_workers() {
  const char* env = std::getenv("QARSTA_WORKERS");
  if (!env || !*env) return 1;
  const long long v = parse_int(env, "QARSTA_WORKERS");
  if (v < 1) throw UsageError("QARSTA_WORKERS must be >= 1");
  return static_cast<int>(v);
}

/// Expands `--config FILE`: each `key = value` line becomes `--key value`
/// unless the command line already sets --key. `key = true` turns into a bare
/// flag and `key = false` is dropped. Lines starting with '#' are comments.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file '" + path + "'");
  std::set<std::string> given;
  for (const auto& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
  }
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty() || key == "config") throw UsageError(path + ":" + std::to_string(line_no) + ": bad key");
    if (given.count(key)) continue;
    if (value == "true") {
      args.push_back("--" + key);
    } else if (value != "false") {
      args.push_back("--" + key);
      args.push_back(value);
    }
  }
  return args;
}

inline void open_output(std::ofstream& os, const std::string& path) {
  os.open(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
}

}  // namespace detail

struct RunOptions {
  std::string problem;
  Eigen::Index n = 0;
  std::string model = "dq";
  int p = 0;
  int p_rand = 1;
  std::uint64_t seed = 0;
  double budget_mult = 100.0;
  std::string out;
};

struct BenchOptions {
  std::string suite;
  Eigen::Index n = 0;
  std::string models;
  std::string pp;
  std::string seeds;
  std::string out;
  int workers = 1;
  double budget_mult = 100.0;
  std::string taus;
  bool timing = false;
  std::string history_dir;
};

struct ProfileOptions {
  std::string input;
  std::string kind = "perf";
  std::string measure = "evals";
  double tau = 1e-3;
  std::string out_csv;
  std::string out_svg;
  double time_cap = kDefaultTimeCap;
};

struct DiagnoseOptions {
  std::string suite;
  std::uint64_t seed = 0;
  int trials = 0;  // 0: the suite's default size
};

inline int command_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  const ModelKind kind = parse_model_tag(o.model);
  const ProblemSpec spec = make_problem(o.problem, o.n);
  if (kind == ModelKind::SquareOfLinear && !spec.residuals) {
    throw UsageError("model 'sql' needs a residual map, but problem '" + o.problem +
                     "' is a general objective; pick a least-squares problem such as linear_residuals");
  }
  SolverConfig c;
  c.model_kind = kind;
  c.p = o.p;
  c.p_rand = o.p_rand;
  c.seed = o.seed;
  if (!(o.budget_mult >= 0.0)) throw UsageError("--budget-mult must be >= 0");
  c.budget = static_cast<std::size_t>(o.budget_mult * static_cast<double>(o.n + 1));
  c.validate(o.n);

  const RunHistory h = run(c, spec.x0, spec.objective, spec.residuals);
  if (!o.out.empty()) {
    std::ofstream os;
    detail::open_output(os, o.out);
    write_history_jsonl(os, h, {o.problem, o.n});
  }
  out << "problem " << o.problem << " n " << o.n << " solver " << solver_id(c) << " seed " << o.seed << '\n';
  out << "final_f " << format_double(h.final_f) << '\n';
  out << "evals " << h.evaluations << '\n';
  out << "iterations " << h.iterations << '\n';
  out << "termination " << termination_name(h.termination) << '\n';
  if (h.termination == Termination::NumericFailure) {
    err << "run failed: " << h.message << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

inline int command_bench(const BenchOptions& o, std::ostream& out, std::ostream& err) {
  ProblemKind pk;
  if (o.suite == "general") pk = ProblemKind::General;
  else if (o.suite == "nls") pk = ProblemKind::LeastSquares;
  else throw UsageError("--suite must be general or nls");
  const auto models = detail::parse_model_list(o.models);
  const auto pps = detail::parse_pp_list(o.pp);
  const auto seeds = detail::parse_seed_list(o.seeds);
  if (pk == ProblemKind::General && std::count(models.begin(), models.end(), ModelKind::SquareOfLinear))
    throw UsageError("model 'sql' needs residuals; use --suite nls");
  if (o.workers < 1) throw UsageError("--workers must be >= 1");

  std::vector<SolverConfig> configs;
  for (ModelKind m : models) {
    for (auto [p, pr] : pps) {
      SolverConfig c;
      c.model_kind = m;
      c.p = p;
      c.p_rand = pr;
      c.validate(o.n);
      configs.push_back(c);
    }
  }
  const auto problems = suite_problems(pk, o.n);
  if (problems.empty()) throw UsageError("no " + o.suite + " problem accepts n = " + std::to_string(o.n));

  SuiteOptions opt;
  opt.budget_multiplier = o.budget_mult;
  opt.workers = o.workers;
  opt.record_time = o.timing;
  if (!o.taus.empty()) opt.taus = detail::parse_tau_list(o.taus);

  std::ofstream csv;
  detail::open_output(csv, o.out);
  if (!o.history_dir.empty()) std::filesystem::create_directories(o.history_dir);

  const auto runs = run_batch(configs, problems, o.n, seeds, opt);
  const auto statuses = compute_statuses(runs, opt.taus, opt.record_time);
  write_results_csv(csv, statuses);
  csv.close();
  if (!csv) throw std::runtime_error("failed writing '" + o.out + "'");

  std::size_t failures = 0;
  for (const auto& r : runs) {
    if (r.failed() || r.history.termination == Termination::NumericFailure) {
      ++failures;
      err << "run " << r.solver_id << " / " << r.problem << " / seed " << r.seed
          << " failed: " << (r.failed() ? r.error : r.history.message) << '\n';
    }
    if (!o.history_dir.empty() && !r.failed()) {
      std::ofstream hs;
      detail::open_output(hs, (std::filesystem::path(o.history_dir) /
                               (r.solver_id + "__" + r.problem + "__n" + std::to_string(r.n) + "__s" +
                                std::to_string(r.seed) + ".jsonl"))
                                  .string());
      write_history_jsonl(hs, r.history, {r.problem, r.n});
    }
  }

  out << runs.size() << " runs (" << configs.size() << " solvers x " << problems.size() << " problems x "
      << seeds.size() << " seeds), " << failures << " failed\n";
  out << std::left << std::setw(20) << "solver";
  for (double t : opt.taus) out << "  tau=" << std::setw(8) << format_double(t);
  out << '\n';
  for (const auto& c : configs) {
    const std::string id = solver_id(c);
    out << std::setw(20) << id;
    for (double t : opt.taus) {
      std::size_t solved = 0, total = 0;
      for (const auto& s : statuses) {
        if (s.solver_id != id || s.tau != t) continue;
        ++total;
        solved += s.solved();
      }
      out << "  " << std::setw(12) << (std::to_string(solved) + "/" + std::to_string(total));
    }
    out << '\n';
  }
  out << "wrote " << o.out << '\n';
  return failures == runs.size() ? kExitFailure : kExitOk;
}

inline int command_profile(const ProfileOptions& o, std::ostream& out, std::ostream&) {
  std::ifstream in(o.input);
  if (!in) throw UsageError("cannot read input file '" + o.input + "'");
  std::vector<SolvedStatus> rows;
  try {
    rows = read_results_csv(in);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  const Measure measure = o.measure == "time" ? Measure::Time : Measure::Evals;
  ProfileTable t;
  try {
    t = o.kind == "perf" ? performance_profile(rows, o.tau, measure) : data_profile(rows, o.tau, measure, o.time_cap);
  } catch (const ArgumentError& e) {
    throw UsageError(e.what());
  }
  std::ofstream csv;
  detail::open_output(csv, o.out_csv);
  write_profile_csv(csv, t);
  out << "wrote " << o.out_csv;
  if (!o.out_svg.empty()) {
    std::ofstream svg;
    detail::open_output(svg, o.out_svg);
    write_profile_svg(svg, t);
    out << " and " << o.out_svg;
  }
  out << '\n';
  for (std::size_t s = 0; s < t.solvers.size(); ++s)
    out << t.solvers[s] << ": solves " << format_double(t.limit(s)) << " of " << t.instances << " instances\n";
  return kExitOk;
}

inline int command_problems_list(std::ostream& out) {
  out << std::left << std::setw(26) << "name" << std::setw(15) << "kind" << std::setw(7) << "block"
      << "description\n";
  for (const auto& p : list_problems())
    out << std::setw(26) << p.name << std::setw(15) << problem_kind_name(p.kind) << std::setw(7) << p.block
        << p.description << '\n';
  return kExitOk;
}

inline int command_diagnose(const DiagnoseOptions& o, std::ostream& out) {
  bool ok = true;
  auto verdict = [&](bool pass) {
    ok = ok && pass;
    return pass ? "PASS" : "FAIL";
  };
  const bool all = o.suite == "all";
  auto size = [&](int dflt) { return o.trials > 0 ? o.trials : dflt; };
  out << std::setprecision(4);

  if (all || o.suite == "slopes") {
    for (ModelKind k : {ModelKind::DeterminedQuadratic, ModelKind::Linear}) {
      const bool quad = k == ModelKind::DeterminedQuadratic;
      for (const auto& r : slope_suite(k)) {
        const bool pass = r.value_slope >= (quad ? 2.7 : 1.7) && r.gradient_slope >= (quad ? 1.8 : 0.8) &&
                          (!quad || r.hessian_slope >= 0.8);
        out << verdict(pass) << " slopes " << model_tag(k) << ' ' << r.function << ": value " << r.value_slope
            << ", gradient " << r.gradient_slope << ", hessian " << r.hessian_slope << '\n';
      }
    }
  }
  if (all || o.suite == "alignment") {
    SubspaceQualityConfig q;
    const auto r = alignment_frequency(100, q.min_sketch_size(), q.alpha, size(10000), o.seed);
    out << verdict(r.frequency() >= r.threshold(q.delta_s)) << " alignment n=100 q=" << r.q
        << " alpha=" << r.alpha << ": frequency " << r.frequency() << " (threshold " << r.threshold(q.delta_s)
        << ")\n";
  }
  if (all || o.suite == "geometry") {
    const auto r = geometry_sequences(size(100000), 1, o.seed);
    out << verdict(r.passed()) << " geometry " << r.managements << " managements: bound violations "
        << r.bound_violations << ", retained " << r.retained_violations << ", generation "
        << r.generation_violations << ", worst ||D+||/bound " << r.worst_pinv_ratio << '\n';
  }
  if (all || o.suite == "interpolation") {
    for (ModelKind k : {ModelKind::DeterminedQuadratic, ModelKind::UnderdeterminedQuadratic, ModelKind::Linear,
                        ModelKind::SquareOfLinear}) {
      for (int p : {2, 5, 10}) {
        const auto r = interpolation_check(k, p, size(100), o.seed + static_cast<std::uint64_t>(p));
        out << verdict(r.passed(1e-9)) << " interpolation " << model_tag(k) << " p=" << p << ": "
            << r.nodes_checked << " nodes, max relative error " << r.max_relative_error << '\n';
      }
    }
  }
  if (all || o.suite == "subproblem") {
    const auto r = subproblem_floor_check(size(100000), o.seed);
    out << verdict(r.passed()) << " subproblem " << r.instances << " instances: infeasible " << r.infeasible
        << ", below floor " << r.below_floor << ", below Cauchy " << r.below_cauchy << '\n';
  }
  return ok ? kExitOk : kExitFailure;
}

/// Parses argv and runs the chosen subcommand.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Random-subspace quadratic trust-region DFO solver and benchmark harness", "qarsta"};
  app.require_subcommand(1);
  std::string config_path;

  RunOptions ro;
  auto* run_cmd = app.add_subcommand("run", "Solve one problem and print the outcome");
  run_cmd->add_option("--problem", ro.problem, "Problem name (see `problems list`)")->required();
  run_cmd->add_option("--n", ro.n, "Dimension")->required()->check(CLI::PositiveNumber);
  run_cmd->add_option("--model", ro.model, "Model kind")->check(CLI::IsMember({"dq", "uq", "lin", "sql"}));
  run_cmd->add_option("--p", ro.p, "Subspace dimension")->required();
  run_cmd->add_option("--p-rand", ro.p_rand, "Fresh random directions per iteration");
  run_cmd->add_option("--seed", ro.seed, "RNG seed");
  run_cmd->add_option("--budget-mult", ro.budget_mult, "Budget as a multiple of n+1");
  run_cmd->add_option("--out", ro.out, "Write the run history as JSON lines");
  run_cmd->add_option("--config", config_path, "key = value file; flags win");

  BenchOptions bo;
  auto* bench_cmd = app.add_subcommand("bench", "Run a solver x problem x seed batch");
  bench_cmd->add_option("--suite", bo.suite, "Problem suite")->required()->check(CLI::IsMember({"general", "nls"}));
  bench_cmd->add_option("--n", bo.n, "Dimension")->required()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--models", bo.models, "Comma-separated model kinds, e.g. sql,lin")->required();
  bench_cmd->add_option("--pp", bo.pp, "Comma-separated p:p_rand pairs; a bare p means p_rand = p")->required();
  bench_cmd->add_option("--seeds", bo.seeds, "Seeds, e.g. 0-9 or 0,3,5")->required();
  bench_cmd->add_option("--out", bo.out, "Results CSV path")->required();
  bench_cmd->add_option("--workers", bo.workers, "Parallel runs (default: QARSTA_WORKERS or 1)");
  bench_cmd->add_option("--budget-mult", bo.budget_mult, "Budget as a multiple of n+1");
  bench_cmd->add_option("--taus", bo.taus, "Comma-separated accuracy levels (default 0.5,0.1,0.01,0.001)");
  bench_cmd->add_flag("--timing", bo.timing, "Record time_to_tau (makes the CSV nondeterministic)");
  bench_cmd->add_option("--history-dir", bo.history_dir, "Also write one JSON-lines history per run here");
  bench_cmd->add_option("--config", config_path, "key = value file; flags win");

  ProfileOptions po;
  auto* prof_cmd = app.add_subcommand("profile", "Performance or data profile from a results CSV");
  prof_cmd->add_option("--input", po.input, "Results CSV from `bench`")->required()->check(CLI::ExistingFile);
  prof_cmd->add_option("--kind", po.kind, "perf or data")->check(CLI::IsMember({"perf", "data"}));
  prof_cmd->add_option("--measure", po.measure, "evals or time")->check(CLI::IsMember({"evals", "time"}));
  prof_cmd->add_option("--tau", po.tau, "Accuracy level");
  prof_cmd->add_option("--out-csv", po.out_csv, "Profile CSV path")->required();
  prof_cmd->add_option("--out-svg", po.out_svg, "Profile SVG path");
  prof_cmd->add_option("--time-cap", po.time_cap, "Seconds after which data profiles count a run unsolved")
      ->check(CLI::PositiveNumber);
  prof_cmd->add_option("--config", config_path, "key = value file; flags win");

  auto* problems_cmd = app.add_subcommand("problems", "Problem registry");
  problems_cmd->require_subcommand(1);
  auto* list_cmd = problems_cmd->add_subcommand("list", "List registered problems");

  DiagnoseOptions dopt;
  auto* diag_cmd = app.add_subcommand("diagnose", "Run the numerical oracle suites");
  diag_cmd->add_option("suite", dopt.suite, "Suite to run")
      ->required()
      ->check(CLI::IsMember({"slopes", "alignment", "geometry", "interpolation", "subproblem", "all"}));
  diag_cmd->add_option("--seed", dopt.seed, "RNG seed");
  diag_cmd->add_option("--trials", dopt.trials, "Override the suite's sample count")->check(CLI::NonNegativeNumber);
  diag_cmd->add_option("--config", config_path, "key = value file; flags win");

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = detail::expand_config(std::move(args));
    if (args.empty()) {
      throw CLI::CallForHelp();
    }
    std::reverse(args.begin(), args.end());
    bench_cmd->get_option("--workers")->default_str(std::to_string(bo.workers = detail::default_workers()));
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return argc <= 1 ? kExitUsage : kExitOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (run_cmd->parsed()) return command_run(ro, out, err);
    if (bench_cmd->parsed()) return command_bench(bo, out, err);
    if (prof_cmd->parsed()) return command_profile(po, out, err);
    if (list_cmd->parsed()) return command_problems_list(out);
    if (diag_cmd->parsed()) return command_diagnose(dopt, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const EmptyProfileError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace qarsta::cli
