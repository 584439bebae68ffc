#pragma once

// Performance and data profiles over solved statuses, with CSV and SVG output.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "qarsta/bench.hpp"
#include "qarsta/io.hpp"

namespace qarsta {

enum class ProfileKind { Performance, Data };
enum class Measure { Evals, Time };

inline std::string_view profile_kind_name(ProfileKind k) { return k == ProfileKind::Performance ? "perf" : "data"; }
inline std::string_view measure_name(Measure m) { return m == Measure::Evals ? "evals" : "time"; }

inline constexpr double kDefaultTimeCap = 60.0;

/// Step-function curves sampled at every breakpoint. fractions[s][i] is the
/// share of instances solver s has solved at abscissae[i].
struct ProfileTable {
  ProfileKind kind = ProfileKind::Performance;
  Measure measure = Measure::Evals;
  double tau = 0.0;
  std::size_t instances = 0;
  std::vector<std::string> solvers;
  std::vector<double> abscissae;
  std::vector<std::vector<double>> fractions;

  /// The curve of solver s at an arbitrary abscissa (right-continuous steps).
  double value(std::size_t s, double x) const {
    const auto it = std::upper_bound(abscissae.begin(), abscissae.end(), x);
    if (it == abscissae.begin()) return 0.0;
    return fractions.at(s)[static_cast<std::size_t>(it - abscissae.begin()) - 1];
  }
  /// Fraction of instances solver s solves at all.
  double limit(std::size_t s) const { return fractions.at(s).empty() ? 0.0 : fractions.at(s).back(); }
};

namespace detail {

using InstanceKey = std::tuple<std::string, Eigen::Index, std::uint64_t>;

struct MeasureGrid {
  std::vector<std::string> solvers;
  std::vector<InstanceKey> instances;
  // measure[s][i]: +inf when unsolved
  std::vector<std::vector<double>> measure;
};

inline bool same_tau(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

inline MeasureGrid collect(const std::vector<SolvedStatus>& statuses, double tau, Measure measure, double cap) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  MeasureGrid g;
  std::map<std::string, std::size_t> solver_index;
  std::map<InstanceKey, std::size_t> instance_index;
  std::vector<const SolvedStatus*> rows;
  bool any_time = false;
  for (const auto& s : statuses) {
    if (!same_tau(s.tau, tau)) continue;
    rows.push_back(&s);
    if (solver_index.emplace(s.solver_id, g.solvers.size()).second) g.solvers.push_back(s.solver_id);
    InstanceKey key{s.problem, s.n, s.seed};
    if (instance_index.emplace(key, g.instances.size()).second) g.instances.push_back(key);
    any_time = any_time || s.time_to_tau.has_value();
  }
  if (g.solvers.empty() || g.instances.empty())
    throw ArgumentError("no status rows at tau = " + format_double(tau));
  if (measure == Measure::Time && !any_time)
    throw ArgumentError("results carry no timing data; rerun bench with --timing");

  g.measure.assign(g.solvers.size(), std::vector<double>(g.instances.size(), inf));
  for (const SolvedStatus* s : rows) {
    double m = inf;
    if (measure == Measure::Evals && s->evals_to_tau) m = static_cast<double>(*s->evals_to_tau);
    if (measure == Measure::Time && s->evals_to_tau && s->time_to_tau) m = *s->time_to_tau;
    if (m > cap) m = inf;
    g.measure[solver_index.at(s->solver_id)][instance_index.at({s->problem, s->n, s->seed})] = m;
  }
  bool any = false;
  for (const auto& row : g.measure)
    for (double m : row) any = any || std::isfinite(m);
  if (!any) throw EmptyProfileError("no solver solved any problem at tau = " + format_double(tau));
  return g;
}

inline ProfileTable tabulate(ProfileKind kind, Measure measure, double tau, const std::vector<std::string>& solvers,
                             const std::vector<std::vector<double>>& values) {
  ProfileTable t;
  t.kind = kind;
  t.measure = measure;
  t.tau = tau;
  t.solvers = solvers;
  t.instances = values.front().size();
  for (const auto& row : values)
    for (double v : row)
      if (std::isfinite(v)) t.abscissae.push_back(v);
  std::sort(t.abscissae.begin(), t.abscissae.end());
  t.abscissae.erase(std::unique(t.abscissae.begin(), t.abscissae.end()), t.abscissae.end());
  const double count = static_cast<double>(t.instances);
  for (const auto& row : values) {
    std::vector<double> sorted(row);
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> curve;
    curve.reserve(t.abscissae.size());
    for (double a : t.abscissae) {
      const auto solved = std::upper_bound(sorted.begin(), sorted.end(), a) - sorted.begin();
      curve.push_back(static_cast<double>(solved) / count);
    }
    t.fractions.push_back(std::move(curve));
  }
  return t;
}

}  // namespace detail

/// Fraction of instances whose measure is within a factor alpha of the best
/// solver's on that instance. Instances are (problem, n, seed) triples.
inline ProfileTable performance_profile(const std::vector<SolvedStatus>& statuses, double tau,
                                        Measure measure = Measure::Evals) {
  const auto g = detail::collect(statuses, tau, measure, std::numeric_limits<double>::infinity());
  auto ratios = g.measure;
  for (std::size_t i = 0; i < g.instances.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : g.measure) best = std::min(best, row[i]);
    for (auto& row : ratios) {
      if (!std::isfinite(row[i])) continue;
      // A zero-second best time would make every ratio infinite; treat ties at
      // zero as ratio 1.
      row[i] = best > 0.0 ? row[i] / best : (row[i] > 0.0 ? std::numeric_limits<double>::infinity() : 1.0);
    }
  }
  return detail::tabulate(ProfileKind::Performance, measure, tau, g.solvers, ratios);
}

/// Fraction of instances solved within a measure of beta. Time measures
/// above time_cap count as unsolved.
inline ProfileTable data_profile(const std::vector<SolvedStatus>& statuses, double tau,
                                 Measure measure = Measure::Evals, double time_cap = kDefaultTimeCap) {
  if (!(time_cap > 0.0)) throw ArgumentError("data_profile: time cap must be positive");
  const double cap = measure == Measure::Time ? time_cap : std::numeric_limits<double>::infinity();
  const auto g = detail::collect(statuses, tau, measure, cap);
  return detail::tabulate(ProfileKind::Data, measure, tau, g.solvers, g.measure);
}

inline void write_profile_csv(std::ostream& os, const ProfileTable& t) {
  os << "abscissa";
  for (const auto& s : t.solvers) os << ',' << s;
  os << '\n';
  for (std::size_t i = 0; i < t.abscissae.size(); ++i) {
    os << format_double(t.abscissae[i]);
    for (const auto& curve : t.fractions) os << ',' << format_double(curve[i]);
    os << '\n';
  }
}

/// Self-contained SVG step chart. Performance profiles use a log2 x axis.
inline void write_profile_svg(std::ostream& os, const ProfileTable& t) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const double W = 720, H = 480, left = 70, right = 200, top = 40, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  const bool logx = t.kind == ProfileKind::Performance;
  auto tx = [&](double a) { return logx ? std::log2(a) : a; };
  const double x0 = 0.0;
  double x1 = t.abscissae.empty() ? 1.0 : tx(t.abscissae.back());
  if (x1 <= x0) x1 = x0 + 1.0;
  x1 *= 1.05;
  auto px = [&](double a) { return left + (tx(a) - x0) / (x1 - x0) * pw; };
  auto py = [&](double f) { return top + (1.0 - f) * ph; };
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
  };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
     << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left + pw / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
     << (logx ? "Performance" : "Data") << " profile (" << measure_name(t.measure) << ", tau = " << num(t.tau)
     << ")</text>\n";
  os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double f = i / 5.0;
    os << "<line x1=\"" << left - 4 << "\" y1=\"" << py(f) << "\" x2=\"" << left << "\" y2=\"" << py(f)
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << left - 8 << "\" y=\"" << py(f) + 4 << "\" text-anchor=\"end\">" << num(f) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double v = x0 + (x1 - x0) * i / 5.0;
    const double sx = left + pw * i / 5.0;
    os << "<line x1=\"" << sx << "\" y1=\"" << top + ph << "\" x2=\"" << sx << "\" y2=\"" << top + ph + 4
       << "\" stroke=\"black\"/>";
    os << "<text x=\"" << sx << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
       << num(logx ? std::exp2(v) : v) << "</text>\n";
  }
  os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
     << (logx ? "performance ratio (log2 scale)" : (t.measure == Measure::Evals ? "evaluations" : "seconds"))
     << "</text>\n";
  os << "<text transform=\"translate(18," << top + ph / 2
     << ") rotate(-90)\" text-anchor=\"middle\">fraction solved</text>\n";

  const double xstart = logx ? 1.0 : 0.0;
  for (std::size_t s = 0; s < t.solvers.size(); ++s) {
    const char* color = palette[s % (sizeof palette / sizeof *palette)];
    std::ostringstream path;
    double prev = 0.0;
    path << "M" << px(xstart) << ',' << py(0.0);
    for (std::size_t i = 0; i < t.abscissae.size(); ++i) {
      const double f = t.fractions[s][i];
      path << " L" << px(t.abscissae[i]) << ',' << py(prev) << " L" << px(t.abscissae[i]) << ',' << py(f);
      prev = f;
    }
    path << " L" << left + pw << ',' << py(prev);
    os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    const double ly = top + 16.0 * static_cast<double>(s) + 8;
    os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
       << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << t.solvers[s] << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace qarsta
