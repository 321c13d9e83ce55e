#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "windfc/error.hpp"
#include "windfc/text.hpp"

namespace windfc {

namespace detail {
inline void require_pair(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size())
    throw InvalidInput("metric inputs differ in length (" + std::to_string(actual.size()) + " vs " +
                       std::to_string(predicted.size()) + ")");
  if (actual.empty()) throw InvalidInput("metric inputs are empty");
}
}  // namespace detail

inline double rmse(std::span<const double> actual, std::span<const double> predicted) {
  detail::require_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double r = actual[i] - predicted[i];
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(actual.size()));
}

inline double mae(std::span<const double> actual, std::span<const double> predicted) {
  detail::require_pair(actual, predicted);
  double sum = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) sum += std::abs(actual[i] - predicted[i]);
  return sum / static_cast<double>(actual.size());
}

struct EvalReport {
  std::string approach_name;
  double rmse = 0.0;  // kW
  double mae = 0.0;   // kW
  std::size_t n = 0;
  std::vector<double> per_hour_errors;  // predicted - actual, optional

  static EvalReport evaluate(std::string name, std::span<const double> actual, std::span<const double> predicted,
                             bool keep_residuals = true) {
    EvalReport r{std::move(name), windfc::rmse(actual, predicted), windfc::mae(actual, predicted), actual.size(), {}};
    if (keep_residuals)
      for (std::size_t i = 0; i < actual.size(); ++i) r.per_hour_errors.push_back(predicted[i] - actual[i]);
    return r;
  }
};

inline void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"approach", r.approach_name}, {"rmse_kw", r.rmse}, {"mae_kw", r.mae}, {"n", r.n}};
  if (!r.per_hour_errors.empty()) j["residuals_kw"] = r.per_hour_errors;
}

/// Percentage reduction of `candidate` relative to `baseline`.
inline std::optional<double> percent_reduction(double baseline, double candidate) {
  if (baseline == 0.0) return candidate == 0.0 ? std::optional<double>(0.0) : std::nullopt;
  return (baseline - candidate) / baseline * 100.0;
}

struct Reduction {
  std::size_t baseline = 0;   // index into reports
  std::size_t candidate = 0;
  std::optional<double> rmse_pct;
  std::optional<double> mae_pct;
};

struct Comparison {
  std::vector<EvalReport> reports;
  std::vector<Reduction> reductions;  // every ordered pair baseline != candidate

  const Reduction& reduction(std::size_t baseline, std::size_t candidate) const {
    for (const auto& r : reductions)
      if (r.baseline == baseline && r.candidate == candidate) return r;
    throw InvalidInput("no reduction for that pair");
  }
};

inline Comparison compare(std::vector<EvalReport> reports) {
  if (reports.empty()) throw InvalidInput("compare: need at least one report");
  Comparison c;
  c.reports = std::move(reports);
  for (std::size_t b = 0; b < c.reports.size(); ++b)
    for (std::size_t k = 0; k < c.reports.size(); ++k) {
      if (b == k) continue;
      c.reductions.push_back({b, k, percent_reduction(c.reports[b].rmse, c.reports[k].rmse),
                              percent_reduction(c.reports[b].mae, c.reports[k].mae)});
    }
  return c;
}

inline void to_json(nlohmann::json& j, const Comparison& c) {
  j = nlohmann::json::object();
  auto rows = nlohmann::json::array();
  for (const auto& r : c.reports) rows.push_back({{"approach", r.approach_name}, {"rmse_kw", r.rmse}, {"mae_kw", r.mae}, {"n", r.n}});
  j["reports"] = rows;
  auto red = nlohmann::json::array();
  for (const auto& r : c.reductions) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    red.push_back({{"baseline", c.reports[r.baseline].approach_name},
                   {"candidate", c.reports[r.candidate].approach_name},
                   {"rmse_reduction_pct", opt(r.rmse_pct)},
                   {"mae_reduction_pct", opt(r.mae_pct)}});
  }
  j["reductions"] = red;
}

/// Aligned plain-text table of reports followed by pairwise reductions.
inline std::string format_table(const Comparison& c) {
  std::size_t width = 8;
  for (const auto& r : c.reports) width = std::max(width, r.approach_name.size());
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-*s  %12s  %12s\n", static_cast<int>(width), "approach", "RMSE(kW)", "MAE(kW)");
  out += buf;
  for (const auto& r : c.reports) {
    std::snprintf(buf, sizeof(buf), "%-*s  %12.3f  %12.3f\n", static_cast<int>(width), r.approach_name.c_str(), r.rmse,
                  r.mae);
    out += buf;
  }
  if (c.reductions.empty()) return out;
  out += "\nreductions (baseline -> candidate)\n";
  for (const auto& r : c.reductions) {
    auto pct = [](const std::optional<double>& v) {
      char b[32];
      if (v)
        std::snprintf(b, sizeof(b), "%7.2f%%", *v);
      else
        std::snprintf(b, sizeof(b), "%8s", "n/a");
      return std::string(b);
    };
    out += "  " + c.reports[r.baseline].approach_name + " -> " + c.reports[r.candidate].approach_name +
           ": RMSE " + pct(r.rmse_pct) + ", MAE " + pct(r.mae_pct) + "\n";
  }
  return out;
}

/// CSV of per-step residuals, one column per report.
inline void write_residuals_csv(std::ostream& out, std::span<const std::int64_t> timestamps,
                                std::span<const EvalReport> reports) {
  out << "timestamp";
  for (const auto& r : reports) out << ',' << r.approach_name;
  out << '\n';
  for (std::size_t i = 0; i < timestamps.size(); ++i) {
    out << timestamps[i];
    for (const auto& r : reports) out << ',' << (i < r.per_hour_errors.size() ? text::format_number(r.per_hour_errors[i]) : "");
    out << '\n';
  }
}

}  // namespace windfc
