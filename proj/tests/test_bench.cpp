#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "qarsta/profiles.hpp"

using namespace qarsta;

namespace {

RunRecord synthetic_run(const std::string& solver, const std::string& problem,
                        std::vector<std::pair<std::size_t, double>> trace) {
  RunRecord r;
  r.solver_id = solver;
  r.problem = problem;
  r.n = 10;
  r.history.termination = Termination::Budget;
  for (auto [evals, f] : trace) {
    HistoryRecord h;
    h.evals = evals;
    h.f = f;
    h.seconds = 0.001 * static_cast<double>(evals);
    r.history.records.push_back(h);
  }
  return r;
}

SolvedStatus row(const std::string& solver, const std::string& problem, std::optional<std::size_t> evals,
                 double tau = 1e-3) {
  SolvedStatus s;
  s.solver_id = solver;
  s.problem = problem;
  s.n = 10;
  s.tau = tau;
  s.evals_to_tau = evals;
  if (evals) s.time_to_tau = 0.5 * static_cast<double>(*evals);
  s.final_f = 0.0;
  s.termination = "budget";
  return s;
}

const SolvedStatus& find(const std::vector<SolvedStatus>& rows, const std::string& solver, double tau) {
  for (const auto& r : rows)
    if (r.solver_id == solver && r.tau == tau) return r;
  throw std::runtime_error("missing row");
}

}  // namespace

TEST(Statuses, FirstEvaluationBelowThreshold) {
  const std::vector<RunRecord> runs = {
      synthetic_run("a", "prob", {{1, 10.0}, {20, 6.0}, {37, 5.0}, {50, 0.0}}),
      synthetic_run("b", "prob", {{1, 10.0}}),
  };
  const auto st = compute_statuses(runs, default_taus());
  ASSERT_EQ(st.size(), 8u);
  EXPECT_EQ(find(st, "a", 0.5).evals_to_tau, 37u);
  EXPECT_EQ(find(st, "a", 1e-3).evals_to_tau, 50u);
  EXPECT_FALSE(find(st, "b", 0.5).solved());
  EXPECT_FALSE(find(st, "a", 0.5).time_to_tau.has_value());
  const auto timed = compute_statuses(runs, {0.5}, true);
  EXPECT_DOUBLE_EQ(*timed[0].time_to_tau, 0.037);
}

TEST(Statuses, BatchMinimumIsShared) {
  // Solver b alone would count its own best as f*; in the batch it is judged
  // against a's better value.
  const std::vector<RunRecord> runs = {
      synthetic_run("a", "prob", {{1, 10.0}, {30, 0.0}}),
      synthetic_run("b", "prob", {{1, 10.0}, {12, 4.0}}),
  };
  const auto st = compute_statuses(runs, {0.5, 0.1});
  EXPECT_EQ(find(st, "b", 0.5).evals_to_tau, 12u);
  EXPECT_FALSE(find(st, "b", 0.1).solved());
  const auto alone = compute_statuses({runs[1]}, {0.1});
  EXPECT_EQ(alone[0].evals_to_tau, 12u);
}

TEST(Statuses, FailedRunsAreUnsolvedNotFatal) {
  RunRecord bad;
  bad.solver_id = "x";
  bad.problem = "prob";
  bad.error = "boom";
  const auto st = compute_statuses({synthetic_run("a", "prob", {{1, 3.0}, {5, 1.0}}), bad}, {0.5});
  ASSERT_EQ(st.size(), 2u);
  EXPECT_TRUE(st[0].solved());
  EXPECT_FALSE(st[1].solved());
  EXPECT_EQ(st[1].termination, "error");
  EXPECT_THROW(compute_statuses({bad}, {1.5}), ArgumentError);
}

TEST(Seeds, DerivedSeedsSeparateStreams) {
  EXPECT_EQ(derive_seed(3, "dq_p2_pr1", "sphere"), derive_seed(3, "dq_p2_pr1", "sphere"));
  EXPECT_NE(derive_seed(3, "dq_p2_pr1", "sphere"), derive_seed(4, "dq_p2_pr1", "sphere"));
  EXPECT_NE(derive_seed(3, "dq_p2_pr1", "sphere"), derive_seed(3, "lin_p2_pr1", "sphere"));
  EXPECT_NE(derive_seed(3, "ab", "c"), derive_seed(3, "a", "bc"));
}

TEST(Suite, DeterministicAcrossRepeatsAndWorkers) {
  SolverConfig c;
  c.p = 2;
  c.p_rand = 1;
  SuiteOptions opt;
  opt.budget_multiplier = 20;
  const std::vector<std::string> probs = {"sphere", "extended_rosenbrock"};
  const auto a = run_suite({c, c}, probs, 6, {0, 1}, opt);
  opt.workers = 3;
  const auto b = run_suite({c, c}, probs, 6, {0, 1}, opt);
  std::ostringstream sa, sb;
  write_results_csv(sa, a);
  write_results_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
  // Two identical configs produce identical halves.
  ASSERT_EQ(a.size() % 2, 0u);
  for (std::size_t i = 0; i < a.size() / 2; ++i) {
    EXPECT_EQ(a[i].evals_to_tau, a[i + a.size() / 2].evals_to_tau);
    EXPECT_EQ(a[i].final_f, a[i + a.size() / 2].final_f);
  }
  EXPECT_THROW(run_suite({}, probs, 6, {0}, opt), ArgumentError);
  EXPECT_THROW(run_suite({c}, {"nope"}, 6, {0}, opt), ArgumentError);
}

TEST(ResultsCsv, RoundTrip) {
  std::vector<SolvedStatus> rows = {row("a", "p1", 12, 0.1), row("b", "p1", std::nullopt, 0.1)};
  rows[0].final_f = 1.0 / 3.0;
  rows[1].time_to_tau.reset();
  std::stringstream ss;
  write_results_csv(ss, rows);
  const auto back = read_results_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].evals_to_tau, 12u);
  EXPECT_EQ(back[0].time_to_tau, 6.0);
  EXPECT_EQ(back[0].final_f, 1.0 / 3.0);
  EXPECT_EQ(back[0].tau, 0.1);
  EXPECT_FALSE(back[1].evals_to_tau.has_value());
  EXPECT_FALSE(back[1].time_to_tau.has_value());
  std::istringstream bad("solver_id,problem\n");
  EXPECT_THROW(read_results_csv(bad), ArgumentError);
  std::istringstream short_row(std::string(kResultsHeader) + "\na,b,3\n");
  EXPECT_THROW(read_results_csv(short_row), ArgumentError);
}

TEST(HistoryJsonl, HeaderThenRecords) {
  SolverConfig c;
  c.p = 2;
  c.p_rand = 1;
  c.seed = 9;
  const ProblemSpec sp = make_problem("sphere", 4);
  const RunHistory h = run(c, sp.x0, sp.objective);
  std::stringstream ss;
  write_history_jsonl(ss, h, {"sphere", 4});
  nlohmann::json head;
  const auto recs = read_history_jsonl(ss, &head);
  EXPECT_EQ(head["seed"], 9);
  EXPECT_EQ(head["problem"], "sphere");
  EXPECT_EQ(head["config"]["model"], "dq");
  ASSERT_EQ(recs.size(), h.records.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].f, h.records[i].f);
    EXPECT_EQ(recs[i].evals, h.records[i].evals);
    EXPECT_EQ(recs[i].delta, h.records[i].delta);
  }
}

TEST(PerformanceProfile, TwoSolverRatios) {
  const auto t = performance_profile({row("A", "p", 10), row("B", "p", 20)}, 1e-3);
  EXPECT_EQ(t.value(0, 1.0), 1.0);
  EXPECT_EQ(t.value(1, 1.0), 0.0);
  EXPECT_EQ(t.value(0, 2.0), 1.0);
  EXPECT_EQ(t.value(1, 2.0), 1.0);
}

TEST(PerformanceProfile, SingleSolverIsSolvedIndicator) {
  const auto t = performance_profile({row("A", "p", 7), row("A", "q", std::nullopt)}, 1e-3);
  EXPECT_EQ(t.value(0, 1.0), 0.5);
  EXPECT_EQ(t.value(0, 1e9), 0.5);
}

TEST(PerformanceProfile, MatchesBruteForceEnumeration) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<int> ev(1, 40);
  std::bernoulli_distribution miss(0.3);
  const std::vector<std::string> solvers = {"s1", "s2", "s3"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<SolvedStatus> rows;
    std::vector<std::vector<double>> m(3, std::vector<double>(5));
    for (int p = 0; p < 5; ++p) {
      for (int s = 0; s < 3; ++s) {
        const bool solved = !miss(rng) || (s == 0 && p == 0);
        const int e = ev(rng);
        rows.push_back(row(solvers[s], "p" + std::to_string(p), solved ? std::optional<std::size_t>(e) : std::nullopt));
        m[s][p] = solved ? e : std::numeric_limits<double>::infinity();
      }
    }
    const auto perf = performance_profile(rows, 1e-3);
    const auto data = data_profile(rows, 1e-3);
    for (double alpha : {1.0, 1.25, 1.5, 2.0, 3.0, 10.0, 50.0}) {
      for (int s = 0; s < 3; ++s) {
        int within = 0, by_budget = 0;
        for (int p = 0; p < 5; ++p) {
          const double best = std::min({m[0][p], m[1][p], m[2][p]});
          within += std::isfinite(m[s][p]) && m[s][p] <= alpha * best;
          by_budget += m[s][p] <= alpha * 4.0;
        }
        EXPECT_DOUBLE_EQ(perf.value(static_cast<std::size_t>(s), alpha), within / 5.0);
        EXPECT_DOUBLE_EQ(data.value(static_cast<std::size_t>(s), alpha * 4.0), by_budget / 5.0);
      }
    }
    for (std::size_t s = 0; s < 3; ++s) {
      EXPECT_DOUBLE_EQ(data.limit(s), perf.limit(s));
      double prev = 0.0;
      for (double f : perf.fractions[s]) {
        EXPECT_GE(f, prev);
        EXPECT_LE(f, perf.limit(s));
        prev = f;
      }
    }
  }
}

TEST(DataProfile, BudgetAndTruncation) {
  const std::vector<SolvedStatus> rows = {row("A", "p", 30), row("A", "q", 100), row("B", "p", 150),
                                          row("B", "q", std::nullopt)};
  const auto t = data_profile(rows, 1e-3);
  EXPECT_EQ(t.value(0, 100.0), 1.0);
  EXPECT_EQ(t.value(1, 100.0), 0.0);
  EXPECT_EQ(t.value(1, 1e12), 0.5);
  // Times are evals/2: B's 75 s exceeds a 60 s cap.
  const auto capped = data_profile(rows, 1e-3, Measure::Time, 60.0);
  EXPECT_EQ(capped.limit(0), 1.0);
  EXPECT_EQ(capped.limit(1), 0.0);
}

TEST(Profiles, Errors) {
  EXPECT_THROW(performance_profile({row("A", "p", std::nullopt)}, 1e-3), EmptyProfileError);
  EXPECT_THROW(data_profile({row("A", "p", 3)}, 0.5), ArgumentError);
  SolvedStatus untimed = row("A", "p", 3);
  untimed.time_to_tau.reset();
  EXPECT_THROW(data_profile({untimed}, 1e-3, Measure::Time), ArgumentError);
}

TEST(Profiles, CsvAndSvgOutput) {
  const auto t = performance_profile({row("A", "p", 10), row("B", "p", 20)}, 1e-3);
  std::ostringstream csv, svg;
  write_profile_csv(csv, t);
  EXPECT_EQ(csv.str(), "abscissa,A,B\n1,1,0\n2,1,1\n");
  write_profile_svg(svg, t);
  EXPECT_EQ(svg.str().rfind("<svg", 0), 0u);
  EXPECT_NE(svg.str().find("</svg>"), std::string::npos);
}
