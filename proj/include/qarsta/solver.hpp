#pragma once

// The random-subspace quadratic trust-region loop: model construction in a
// p-dimensional subspace, criticality test, trust-region step, and sample-set
// management that recycles good directions and refreshes the rest at random.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "qarsta/cache.hpp"
#include "qarsta/geometry.hpp"
#include "qarsta/models.hpp"
#include "qarsta/trsolver.hpp"

namespace qarsta {

struct SolverConfig {
  int p = 1;
  int p_rand = 1;
  double delta0 = 1.0;
  double delta_min = 1e-8;
  double delta_max = 1e2;
  double gamma_dec = 0.5;
  double gamma_inc = 2.0;
  double eta1 = 0.1;
  double eta2 = 0.7;
  double mu = 1.0;
  double eps_rad = 2.0;
  std::optional<double> eps_geo;      // default 1e-2 * delta_min
  std::optional<double> m_a;          // default default_sketch_bound(n)
  ModelKind model_kind = ModelKind::DeterminedQuadratic;
  std::optional<std::size_t> budget;  // default 100 (n + 1)
  std::uint64_t seed = 0;

  double geometry_tolerance() const { return eps_geo.value_or(1e-2 * delta_min); }
  double sketch_bound(Eigen::Index n) const { return m_a.value_or(default_sketch_bound(n)); }
  std::size_t evaluation_budget(Eigen::Index n) const {
    return budget.value_or(100 * static_cast<std::size_t>(n + 1));
  }

  void validate(Eigen::Index n) const {
    auto fail = [](const std::string& what) { throw ArgumentError("SolverConfig: " + what); };
    if (n < 1) fail("dimension must be >= 1");
    if (p < 1 || p > n) fail("need 1 <= p <= n");
    if (p_rand < 1 || p_rand > p) fail("need 1 <= p_rand <= p");
    if (!(delta_min > 0.0 && delta_min <= delta0 && delta0 <= delta_max)) fail("need 0 < delta_min <= delta0 <= delta_max");
    if (!(gamma_dec > 0.0 && gamma_dec < 1.0)) fail("gamma_dec must lie in (0,1)");
    if (!(gamma_inc > 1.0)) fail("gamma_inc must exceed 1");
    if (!(eta1 > 0.0 && eta1 <= eta2 && eta2 < 1.0)) fail("need 0 < eta1 <= eta2 < 1");
    if (!(mu > 0.0)) fail("mu must be positive");
    if (!(eps_rad >= 1.0)) fail("eps_rad must be >= 1");
    if (!(geometry_tolerance() > 0.0)) fail("eps_geo must be positive");
    if (!(sketch_bound(n) >= 1.0)) fail("m_a must be >= 1");
  }
};

enum class Termination { Running, SmallRadius, Budget, NumericFailure, Stopped };

inline std::string_view termination_name(Termination t) {
  switch (t) {
    case Termination::Running: return "running";
    case Termination::SmallRadius: return "radius";
    case Termination::Budget: return "budget";
    case Termination::NumericFailure: return "numeric_error";
    case Termination::Stopped: return "stopped";
  }
  return "?";
}

/// One improvement of the best objective value seen so far.
struct HistoryRecord {
  std::size_t evals = 0;
  double f = 0.0;
  int k = 0;
  double delta = 0.0;
  double seconds = 0.0;  // since the solver loop started; not serialized
};

/// Trace of one run: improvement events plus the run summary.
struct RunHistory {
  SolverConfig config;
  Eigen::Index n = 0;
  std::vector<HistoryRecord> records;
  Termination termination = Termination::Running;
  std::string message;
  std::size_t evaluations = 0;
  int iterations = 0;
  double max_model_hessian_norm = 0.0;
  Vector final_x;
  double final_f = std::numeric_limits<double>::infinity();
  double wall_seconds = 0.0;

  double best() const { return records.empty() ? std::numeric_limits<double>::infinity() : records.back().f; }
  double initial() const { return records.empty() ? std::numeric_limits<double>::quiet_NaN() : records.front().f; }
};

enum class IterationKind { Criticality, Step };

struct IterationInfo {
  int k = 0;
  IterationKind kind = IterationKind::Step;
  double rho = 0.0;  // NaN on criticality iterations
  double radius_before = 0.0;
  double radius_after = 0.0;
  double model_gradient_norm = 0.0;
  double f = 0.0;
  const Vector* iterate = nullptr;     // x_{k+1}
  const Matrix* directions = nullptr;  // D_{k+1}
  std::size_t evaluations = 0;
};

/// Return false to stop the run after the current iteration.
using IterationObserver = std::function<bool(const IterationInfo&)>;

namespace detail {

class Recorder {
 public:
  Recorder(std::shared_ptr<RunHistory> h, Eigen::Index n) : history_(std::move(h)), best_x_(n) {
    start_ = std::chrono::steady_clock::now();
  }
  void on_eval(const Vector& x, std::size_t count, double f) {
    if (!history_->records.empty() && !(f < history_->records.back().f)) return;
    history_->records.push_back({count, f, k, delta, elapsed()});
    best_x_ = x;
  }
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }
  const Vector& best_x() const { return best_x_; }

  int k = 0;
  double delta = 0.0;

 private:
  std::shared_ptr<RunHistory> history_;
  Vector best_x_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

/// Per-iteration state: iterate, radius, direction set (with cache anchors),
/// the evaluation cache, history, and the run's own random stream.
struct SolverState {
  SolverConfig config;
  Vector iterate;
  double fval = 0.0;
  double radius = 0.0;
  Matrix directions;
  std::vector<std::optional<Vector>> anchors;
  std::unique_ptr<EvaluationCache> cache;
  std::shared_ptr<RunHistory> history;
  std::unique_ptr<detail::Recorder> recorder;
  int iteration = 0;
  Rng rng;

  Eigen::Index n() const { return iterate.size(); }
  SampleStencil stencil() const { return SampleStencil(iterate, DirectionMatrix(directions), anchors); }
};

/// Validates the configuration, evaluates f(x0) and draws D_0: p mutually
/// orthogonal random directions of length delta0.
inline SolverState initialize(const SolverConfig& config, const Vector& x0, ObjectiveFn objective,
                              ResidualFn residuals = {}) {
  const Eigen::Index n = x0.size();
  config.validate(n);
  if (!x0.allFinite()) throw ArgumentError("initialize: x0 must be finite");
  if (config.model_kind == ModelKind::SquareOfLinear && !residuals)
    throw ArgumentError("initialize: the square-of-linear model needs a residual map");

  SolverState st;
  st.config = config;
  st.iterate = x0;
  st.radius = config.delta0;
  st.rng.seed(config.seed);
  st.history = std::make_shared<RunHistory>();
  st.history->config = config;
  st.history->n = n;
  // f(x0) is always evaluated, so the effective budget is at least one.
  st.cache = std::make_unique<EvaluationCache>(std::move(objective), std::move(residuals),
                                               std::max<std::size_t>(1, config.evaluation_budget(n)));
  st.recorder = std::make_unique<detail::Recorder>(st.history, n);
  st.recorder->delta = st.radius;
  detail::Recorder* rec = st.recorder.get();
  st.cache->set_listener([rec](const Vector& x, std::size_t c, double f) { rec->on_eval(x, c, f); });
  st.fval = st.cache->value(x0);

  const auto gen = generate_directions(n, Matrix(n, 0), config.p, config.delta0, config.sketch_bound(n), st.rng);
  st.directions = gen.directions;
  st.anchors.assign(static_cast<std::size_t>(config.p), std::nullopt);
  return st;
}

/// Criticality branch: shrink the radius and the direction set by gamma_dec,
/// keep the iterate. Scaled sample points are new, so anchors are dropped.
inline void criticality_update(SolverState& st, const SubspaceModel&) {
  st.radius *= st.config.gamma_dec;
  st.directions *= st.config.gamma_dec;
  std::fill(st.anchors.begin(), st.anchors.end(), std::nullopt);
}

/// Directions kept for the next iteration, each with the exact sample point it
/// points to from the new iterate.
struct RetainedBlock {
  Matrix columns;
  std::vector<std::optional<Vector>> anchors;
};

/// Pruning applied to the p selected candidates: remove p_rand by sequential
/// removal, drop columns longer than eps_rad * delta_next, then remove one at a
/// time while sigma_min < eps_geo (or the block is numerically rank
/// deficient). Returns surviving column indices in their original order.
inline std::vector<Eigen::Index> prune_block(const Matrix& cols, double delta_next, const SolverConfig& config) {
  std::vector<Eigen::Index> index;
  if (cols.cols() <= config.p_rand) return index;
  index = removal_pass(cols, delta_next, config.p_rand).kept;

  const double max_len = config.eps_rad * delta_next;
  std::erase_if(index, [&](Eigen::Index k) { return cols.col(k).norm() > max_len; });

  auto block_of = [&](const std::vector<Eigen::Index>& idx) {
    Matrix b(cols.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) b.col(static_cast<Eigen::Index>(j)) = cols.col(idx[j]);
    return b;
  };
  const double eps_geo = config.geometry_tolerance();
  while (!index.empty()) {
    const Matrix b = block_of(index);
    const Vector s = singular_values(b);
    const double smin = s(s.size() - 1);
    if (smin >= eps_geo && smin >= kRankTolerance * std::max(1.0, s(0))) break;
    std::vector<Eigen::Index> next;
    for (Eigen::Index k : removal_pass(b, delta_next, 1).kept) next.push_back(index[static_cast<std::size_t>(k)]);
    index = std::move(next);
  }
  return index;
}

/// Builds D^U_{k+1}: candidates {x_k + s_k - x_{k+1}} and
/// {x_k + d_i + d_j - x_{k+1} : d_i, d_j in [0 D_k]} without zeros or
/// duplicates; keep the p shortest (ties broken lexicographically), then
/// prune_block.
inline RetainedBlock build_du(const SampleStencil& stencil, const Vector& trial, const Vector& x_next,
                              double delta_next, const SolverConfig& config) {
  struct Candidate {
    Vector dir;
    Vector point;
    double norm;
  };
  const int p = stencil.p();
  std::vector<Candidate> cands;
  std::unordered_set<PointKey, PointKeyHash> seen;
  auto add = [&](Vector point) {
    Vector dir = point - x_next;
    if ((dir.array() == 0.0).all()) return;
    if (!seen.insert(PointKey(point)).second) return;
    const double nrm = dir.norm();
    cands.push_back({std::move(dir), std::move(point), nrm});
  };
  add(trial);
  for (int i = 0; i <= p; ++i)
    for (int j = i; j <= p; ++j) add(stencil.point(i, j));

  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    if (a.norm != b.norm) return a.norm < b.norm;
    return std::lexicographical_compare(a.dir.data(), a.dir.data() + a.dir.size(), b.dir.data(),
                                        b.dir.data() + b.dir.size());
  });
  cands.resize(std::min<std::size_t>(static_cast<std::size_t>(config.p), cands.size()));

  Matrix cols(x_next.size(), static_cast<Eigen::Index>(cands.size()));
  for (std::size_t j = 0; j < cands.size(); ++j) cols.col(static_cast<Eigen::Index>(j)) = cands[j].dir;

  RetainedBlock out;
  const auto kept = prune_block(cols, delta_next, config);
  out.columns.resize(x_next.size(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t j = 0; j < kept.size(); ++j) {
    out.columns.col(static_cast<Eigen::Index>(j)) = cols.col(kept[j]);
    out.anchors.emplace_back(cands[static_cast<std::size_t>(kept[j])].point);
  }
  return out;
}

/// D_{k+1} = [D^U  G] where G holds p - |D^U| fresh random directions of
/// length delta_next orthogonal to span(D^U).
inline Matrix assemble_directions(const Matrix& retained, int p, double delta_next, double m_a, Rng& rng) {
  const Eigen::Index n = retained.rows();
  const int q = p - static_cast<int>(retained.cols());
  Matrix out(n, p);
  out.leftCols(retained.cols()) = retained;
  if (q > 0) {
    out.rightCols(q) = generate_directions(n, orthonormal_basis(retained), q, delta_next, m_a, rng).directions;
  }
  return out;
}

/// Convenience form taking D_k, x_k, x_{k+1} and s_k directly.
inline RetainedBlock build_du(const Matrix& d_k, const Vector& x_k, const Vector& x_next, const Vector& s_k,
                              double delta_next, const SolverConfig& config) {
  return build_du(SampleStencil(x_k, DirectionMatrix(d_k)), Vector(x_k + s_k), x_next, delta_next, config);
}

struct StepOutcome {
  double rho = 0.0;
  Vector trial;
  double f_trial = 0.0;
  TrsSolution solution;
};

/// Trust-region branch: solve the subproblem, evaluate the trial point, update
/// the radius, move to the best evaluated candidate, and rebuild the direction
/// set from recycled and fresh random directions.
inline StepOutcome tr_step(SolverState& st, const SubspaceModel& model) {
  const SolverConfig& c = st.config;
  const SampleStencil stencil = st.stencil();
  StepOutcome out;
  out.solution = solve_subproblem(model, st.radius);
  const Vector s = model.q_basis * out.solution.step;
  out.trial = st.iterate + s;
  out.f_trial = st.cache->value(out.trial);

  const double pred = out.solution.predicted_decrease;
  if (pred > 1e-15 * std::max(1.0, std::abs(st.fval))) {
    out.rho = (st.fval - out.f_trial) / pred;
  } else {
    out.rho = -std::numeric_limits<double>::infinity();
  }

  double next_radius = st.radius;
  if (out.rho < c.eta1) {
    next_radius = c.gamma_dec * st.radius;
  } else if (out.rho > c.eta2 && out.solution.step.norm() >= 0.95 * st.radius) {
    next_radius = std::min(c.gamma_inc * st.radius, c.delta_max);
  }

  // Best already-evaluated point among {x_k + s_k} and {x_k + d_i + d_j}.
  Vector x_next = st.iterate;
  double f_next = st.fval;
  auto consider = [&](const Vector& x, double f) {
    if (f < f_next) {
      f_next = f;
      x_next = x;
    }
  };
  consider(out.trial, out.f_trial);
  const int p = stencil.p();
  for (int i = 0; i <= p; ++i) {
    for (int j = i; j <= p; ++j) {
      Vector pt = stencil.point(i, j);
      if (auto f = st.cache->find(pt)) consider(pt, *f);
    }
  }

  RetainedBlock keep = build_du(stencil, out.trial, x_next, next_radius, c);
  Matrix next_d = assemble_directions(keep.columns, c.p, next_radius, c.sketch_bound(st.n()), st.rng);
  keep.anchors.resize(static_cast<std::size_t>(c.p), std::nullopt);

  st.iterate = std::move(x_next);
  st.fval = f_next;
  st.radius = next_radius;
  st.directions = std::move(next_d);
  st.anchors = std::move(keep.anchors);
  return out;
}

/// Runs the loop until the radius drops below delta_min, the evaluation budget
/// is spent, a numerical failure occurs, or the observer asks to stop.
inline RunHistory run(const SolverConfig& config, const Vector& x0, ObjectiveFn objective, ResidualFn residuals = {},
                      const IterationObserver& observer = {}) {
  SolverState st = initialize(config, x0, std::move(objective), std::move(residuals));
  RunHistory& h = *st.history;
  detail::Recorder& rec = *st.recorder;

  while (h.termination == Termination::Running) {
    if (st.cache->remaining() == 0) {
      h.termination = Termination::Budget;
      break;
    }
    rec.k = st.iteration;
    rec.delta = st.radius;
    IterationInfo info;
    info.k = st.iteration;
    info.radius_before = st.radius;
    try {
      const SubspaceModel model = build_model(config.model_kind, *st.cache, st.stencil());
      h.max_model_hessian_norm = std::max(h.max_model_hessian_norm, symmetric_norm(model.hessian));
      info.model_gradient_norm = model.gradient.norm();
      if (!model.gradient.allFinite() || !model.hessian.allFinite()) throw NumericError("model has non-finite coefficients");
      if (config.mu * info.model_gradient_norm < st.radius) {
        info.kind = IterationKind::Criticality;
        info.rho = std::numeric_limits<double>::quiet_NaN();
        criticality_update(st, model);
      } else {
        info.kind = IterationKind::Step;
        info.rho = tr_step(st, model).rho;
      }
    } catch (const BudgetExhausted&) {
      h.termination = Termination::Budget;
      break;
    } catch (const Error& e) {
      h.termination = Termination::NumericFailure;
      h.message = e.what();
      break;
    }
    ++st.iteration;
    info.radius_after = st.radius;
    info.f = st.fval;
    info.iterate = &st.iterate;
    info.directions = &st.directions;
    info.evaluations = st.cache->evaluations();
    if (observer && !observer(info)) {
      h.termination = Termination::Stopped;
      break;
    }
    if (st.radius < config.delta_min) h.termination = Termination::SmallRadius;
  }

  h.iterations = st.iteration;
  h.evaluations = st.cache->evaluations();
  h.final_x = rec.best_x();
  h.final_f = h.best();
  h.wall_seconds = rec.elapsed();
  return h;
}

}  // namespace qarsta
