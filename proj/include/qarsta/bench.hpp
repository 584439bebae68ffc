#pragma once

// Batch experiments: every (solver config, problem, seed) run, then per-tau
// solved status against the batch-wide best value.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "qarsta/problems.hpp"
#include "qarsta/solver.hpp"

namespace qarsta {

inline const std::vector<double>& default_taus() {
  static const std::vector<double> taus = {0.5, 1e-1, 1e-2, 1e-3};
  return taus;
}

/// Stable label for a solver configuration, e.g. "dq_p10_pr3".
inline std::string solver_id(const SolverConfig& c) {
  return std::string(model_tag(c.model_kind)) + "_p" + std::to_string(c.p) + "_pr" + std::to_string(c.p_rand);
}

/// Per-run RNG seed from (seed, solver id, problem id): FNV-1a over the ids,
/// mixed with the seed through splitmix64.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view solver, std::string_view problem) {
  std::uint64_t h = 1469598103934665603ULL;
  auto absorb = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;  // separator
    h *= 1099511628211ULL;
  };
  absorb(solver);
  absorb(problem);
  std::uint64_t z = h ^ (seed + 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct RunRecord {
  std::string solver_id;
  std::string problem;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  RunHistory history;
  std::string error;  // nonempty when the run threw before producing a history

  bool failed() const { return !error.empty(); }
  std::string termination() const { return failed() ? "error" : std::string(termination_name(history.termination)); }
};

struct SolvedStatus {
  std::string solver_id;
  std::string problem;
  Eigen::Index n = 0;
  std::uint64_t seed = 0;
  double tau = 0.0;
  std::optional<std::size_t> evals_to_tau;
  std::optional<double> time_to_tau;
  double final_f = std::numeric_limits<double>::quiet_NaN();
  std::string termination;

  bool solved() const { return evals_to_tau.has_value(); }
};

struct SuiteOptions {
  double budget_multiplier = 100.0;
  std::vector<double> taus = default_taus();
  int workers = 1;
  bool record_time = false;  // wall-clock columns make output nondeterministic
};

/// Runs every (config, problem, seed) combination. The config's seed and
/// budget are replaced per run; results come back in the nested loop order
/// configs x problems x seeds regardless of the worker count.
inline std::vector<RunRecord> run_batch(const std::vector<SolverConfig>& configs,
                                        const std::vector<std::string>& problems, Eigen::Index n,
                                        const std::vector<std::uint64_t>& seeds, const SuiteOptions& options) {
  if (configs.empty() || problems.empty() || seeds.empty())
    throw ArgumentError("run_batch: configs, problems and seeds must be nonempty");
  if (!(options.budget_multiplier >= 0.0)) throw ArgumentError("run_batch: budget multiplier must be >= 0");
  for (const auto& name : problems) make_problem(name, n);  // validate names and n up front
  for (const auto& c : configs) c.validate(n);

  struct Job {
    std::size_t config;
    std::string problem;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (std::size_t c = 0; c < configs.size(); ++c)
    for (const auto& pr : problems)
      for (auto s : seeds) jobs.push_back({c, pr, s});

  std::vector<RunRecord> out(jobs.size());
  const auto budget = static_cast<std::size_t>(options.budget_multiplier * static_cast<double>(n + 1));
  auto work = [&](std::size_t i) {
    const Job& job = jobs[i];
    RunRecord& rec = out[i];
    SolverConfig cfg = configs[job.config];
    rec.solver_id = solver_id(cfg);
    rec.problem = job.problem;
    rec.n = n;
    rec.seed = job.seed;
    try {
      const ProblemSpec spec = make_problem(job.problem, n);
      cfg.seed = derive_seed(job.seed, rec.solver_id, job.problem);
      cfg.budget = budget;
      rec.history = run(cfg, spec.x0, spec.objective, spec.residuals);
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
  };

  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(jobs.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < jobs.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) work(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  return out;
}

/// Batch-wide best value per (problem, n) over all successful runs.
inline std::map<std::pair<std::string, Eigen::Index>, double> batch_minima(const std::vector<RunRecord>& runs) {
  std::map<std::pair<std::string, Eigen::Index>, double> fmin;
  for (const auto& r : runs) {
    if (r.failed() || r.history.records.empty()) continue;
    auto key = std::make_pair(r.problem, r.n);
    auto it = fmin.find(key);
    const double b = r.history.best();
    if (it == fmin.end() || b < it->second) fmin[key] = b;
  }
  return fmin;
}

/// Solved status of each run at each tau: the first evaluation count at which
/// f <= f* + tau (f(x0) - f*), with f* the batch-wide best.
inline std::vector<SolvedStatus> compute_statuses(const std::vector<RunRecord>& runs, const std::vector<double>& taus,
                                                  bool record_time = false) {
  if (taus.empty()) throw ArgumentError("compute_statuses: at least one tau is required");
  for (double t : taus)
    if (!(t > 0.0 && t < 1.0)) throw ArgumentError("compute_statuses: tau must lie in (0,1)");
  const auto fmin = batch_minima(runs);
  std::vector<SolvedStatus> out;
  for (const auto& r : runs) {
    for (double tau : taus) {
      SolvedStatus s;
      s.solver_id = r.solver_id;
      s.problem = r.problem;
      s.n = r.n;
      s.seed = r.seed;
      s.tau = tau;
      s.termination = r.termination();
      if (!r.failed() && !r.history.records.empty()) {
        s.final_f = r.history.best();
        const double fstar = fmin.at({r.problem, r.n});
        const double threshold = fstar + tau * (r.history.initial() - fstar);
        for (const auto& rec : r.history.records) {
          if (rec.f <= threshold) {
            s.evals_to_tau = rec.evals;
            if (record_time) s.time_to_tau = rec.seconds;
            break;
          }
        }
      }
      out.push_back(std::move(s));
    }
  }
  return out;
}

inline std::vector<SolvedStatus> run_suite(const std::vector<SolverConfig>& configs,
                                           const std::vector<std::string>& problems, Eigen::Index n,
                                           const std::vector<std::uint64_t>& seeds, const SuiteOptions& options = {}) {
  return compute_statuses(run_batch(configs, problems, n, seeds, options), options.taus, options.record_time);
}

}  // namespace qarsta
