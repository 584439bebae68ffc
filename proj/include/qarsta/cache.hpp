#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qarsta/errors.hpp"
#include "qarsta/linalg.hpp"

namespace qarsta {

using ObjectiveFn = std::function<double(const Vector&)>;
using ResidualFn = std::function<Vector(const Vector&)>;

/// Exact identity of a point: the bit patterns of its coordinates.
struct PointKey {
  std::vector<std::uint64_t> bits;

  explicit PointKey(const Vector& x) : bits(static_cast<std::size_t>(x.size())) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      // +0.0 and -0.0 are the same point.
      const double v = x(i) == 0.0 ? 0.0 : x(i);
      bits[static_cast<std::size_t>(i)] = std::bit_cast<std::uint64_t>(v);
    }
  }
  bool operator==(const PointKey&) const = default;
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const noexcept {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the words
    for (std::uint64_t w : k.bits) {
      h ^= w;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

/// Memoized objective values keyed by exact point identity, with a hard
/// evaluation budget. When a residual map is supplied, each evaluation calls it
/// once and the objective is 1/2 ||g(x)||^2; the scalar objective is unused.
///
/// All members lock an internal mutex, so every distinct point is evaluated
/// exactly once even under concurrent use.
class EvaluationCache {
 public:
  /// Called after each fresh evaluation with (point, evaluation count, value).
  using Listener = std::function<void(const Vector&, std::size_t, double)>;

  explicit EvaluationCache(ObjectiveFn objective, ResidualFn residuals = {},
                           std::size_t budget = std::numeric_limits<std::size_t>::max())
      : objective_(std::move(objective)), residuals_(std::move(residuals)), budget_(budget) {
    if (!objective_ && !residuals_) throw ArgumentError("EvaluationCache: need an objective or a residual map");
  }

  EvaluationCache(const EvaluationCache&) = delete;
  EvaluationCache& operator=(const EvaluationCache&) = delete;

  bool has_residuals() const { return static_cast<bool>(residuals_); }

  void set_listener(Listener l) {
    std::lock_guard lock(mutex_);
    listener_ = std::move(l);
  }

  /// f(x), evaluating at most once per distinct point. Throws BudgetExhausted
  /// when x is new and the budget is spent, NumericError on a non-finite value.
  double value(const Vector& x) { return entry(x).value; }

  /// Residual vector g(x); requires a residual map.
  Vector residual(const Vector& x) {
    if (!has_residuals()) throw ArgumentError("EvaluationCache: no residual map configured");
    return entry(x).residual;
  }

  std::optional<double> find(const Vector& x) const {
    std::lock_guard lock(mutex_);
    auto it = table_.find(PointKey(x));
    if (it == table_.end()) return std::nullopt;
    return it->second.value;
  }

  bool contains(const Vector& x) const { return find(x).has_value(); }

  std::size_t evaluations() const {
    std::lock_guard lock(mutex_);
    return count_;
  }
  std::size_t budget() const { return budget_; }
  std::size_t remaining() const {
    std::lock_guard lock(mutex_);
    return budget_ - count_;
  }

 private:
  struct Entry {
    double value = 0.0;
    Vector residual;
  };

  const Entry& entry(const Vector& x) {
    std::lock_guard lock(mutex_);
    PointKey key(x);
    if (auto it = table_.find(key); it != table_.end()) return it->second;
    if (count_ >= budget_) throw BudgetExhausted();
    Entry e;
    if (residuals_) {
      e.residual = residuals_(x);
      e.value = 0.5 * e.residual.squaredNorm();
    } else {
      e.value = objective_(x);
    }
    ++count_;
    if (!std::isfinite(e.value)) {
      throw NumericError("objective is not finite at evaluation " + std::to_string(count_));
    }
    auto [it, inserted] = table_.emplace(std::move(key), std::move(e));
    if (listener_) listener_(x, count_, it->second.value);
    return it->second;
  }

  ObjectiveFn objective_;
  ResidualFn residuals_;
  std::size_t budget_;
  std::size_t count_ = 0;
  Listener listener_;
  std::unordered_map<PointKey, Entry, PointKeyHash> table_;
  mutable std::mutex mutex_;
};

}  // namespace qarsta
