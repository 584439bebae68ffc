#pragma once

// Persistence: run histories as JSON lines, solved statuses as CSV.

#include <charconv>
#include <cmath>
#include <limits>
#include <type_traits>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "qarsta/bench.hpp"

namespace qarsta {

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline nlohmann::json config_json(const SolverConfig& c) {
  nlohmann::json j = {
      {"model", std::string(model_tag(c.model_kind))},
      {"p", c.p},
      {"p_rand", c.p_rand},
      {"delta0", c.delta0},
      {"delta_min", c.delta_min},
      {"delta_max", c.delta_max},
      {"gamma_dec", c.gamma_dec},
      {"gamma_inc", c.gamma_inc},
      {"eta1", c.eta1},
      {"eta2", c.eta2},
      {"mu", c.mu},
      {"eps_rad", c.eps_rad},
      {"eps_geo", c.geometry_tolerance()},
      {"seed", c.seed},
  };
  if (c.m_a) j["m_a"] = *c.m_a;
  if (c.budget) j["budget"] = *c.budget;
  return j;
}

struct HistoryHeader {
  std::string problem;
  Eigen::Index n = 0;
};

/// Header line with the config, seed and outcome, then one line per
/// improvement: {"evals","f","k","delta"}.
inline void write_history_jsonl(std::ostream& os, const RunHistory& h, const HistoryHeader& meta = {}) {
  nlohmann::json head = {
      {"type", "header"},
      {"config", config_json(h.config)},
      {"seed", h.config.seed},
      {"n", meta.n > 0 ? meta.n : h.n},
      {"termination", std::string(termination_name(h.termination))},
      {"evaluations", h.evaluations},
      {"iterations", h.iterations},
      {"final_f", h.final_f},
      {"max_model_hessian_norm", h.max_model_hessian_norm},
  };
  if (!meta.problem.empty()) head["problem"] = meta.problem;
  if (!h.message.empty()) head["message"] = h.message;
  os << head.dump() << '\n';
  for (const auto& r : h.records) {
    os << nlohmann::json{{"evals", r.evals}, {"f", r.f}, {"k", r.k}, {"delta", r.delta}}.dump() << '\n';
  }
}

/// Reads back the improvement records (the header is returned separately).
inline std::vector<HistoryRecord> read_history_jsonl(std::istream& is, nlohmann::json* header = nullptr) {
  std::vector<HistoryRecord> out;
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ArgumentError(std::string("malformed history line: ") + e.what());
    }
    if (first && j.value("type", "") == "header") {
      if (header) *header = j;
      first = false;
      continue;
    }
    first = false;
    HistoryRecord r;
    r.evals = j.at("evals").get<std::size_t>();
    r.f = j.at("f").get<double>();
    r.k = j.at("k").get<std::size_t>();
    r.delta = j.at("delta").get<double>();
    out.push_back(r);
  }
  return out;
}

inline const char* kResultsHeader = "solver_id,problem,n,seed,tau,evals_to_tau,time_to_tau,final_f,termination";

inline void write_results_csv(std::ostream& os, const std::vector<SolvedStatus>& rows) {
  os << kResultsHeader << '\n';
  for (const auto& s : rows) {
    os << s.solver_id << ',' << s.problem << ',' << s.n << ',' << s.seed << ',' << format_double(s.tau) << ',';
    if (s.evals_to_tau) os << *s.evals_to_tau;
    os << ',';
    if (s.time_to_tau) os << format_double(*s.time_to_tau);
    os << ',' << format_double(s.final_f) << ',' << s.termination << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_number(const std::string& text, std::size_t line_no, const char* column) {
  T value{};
  const char* end = text.data() + text.size();
  auto res = std::from_chars(text.data(), end, value);
  if (res.ec != std::errc{} || res.ptr != end) {
    if constexpr (std::is_floating_point_v<T>) {
      if (text == "nan") return std::numeric_limits<T>::quiet_NaN();
      if (text == "inf") return std::numeric_limits<T>::infinity();
      if (text == "-inf") return -std::numeric_limits<T>::infinity();
    }
    throw ArgumentError("results CSV line " + std::to_string(line_no) + ": bad " + column + " value '" + text + "'");
  }
  return value;
}

}  // namespace detail

inline std::vector<SolvedStatus> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ArgumentError("results CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw ArgumentError("results CSV has an unexpected header: " + line);
  std::vector<SolvedStatus> rows;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != 9) {
      throw ArgumentError("results CSV line " + std::to_string(line_no) + ": expected 9 fields, got " +
                          std::to_string(cells.size()));
    }
    SolvedStatus s;
    s.solver_id = cells[0];
    s.problem = cells[1];
    s.n = detail::parse_number<Eigen::Index>(cells[2], line_no, "n");
    s.seed = detail::parse_number<std::uint64_t>(cells[3], line_no, "seed");
    s.tau = detail::parse_number<double>(cells[4], line_no, "tau");
    if (!cells[5].empty()) s.evals_to_tau = detail::parse_number<std::size_t>(cells[5], line_no, "evals_to_tau");
    if (!cells[6].empty()) s.time_to_tau = detail::parse_number<double>(cells[6], line_no, "time_to_tau");
    s.final_f = detail::parse_number<double>(cells[7], line_no, "final_f");
    s.termination = cells[8];
    rows.push_back(std::move(s));
  }
  return rows;
}

}  // namespace qarsta
