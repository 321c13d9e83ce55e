#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "windfc/dataset.hpp"
#include "windfc/error.hpp"

namespace windfc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Cleaning

/// Audit of `clean`: every removed record is refilled, so the two index lists
/// are equal and together name exactly the altered records.
struct CleanReport {
  std::vector<std::size_t> removed_indices;
  std::vector<std::size_t> filled_indices;
  std::map<std::string, std::size_t> rules_fired;

  bool empty() const { return removed_indices.empty() && filled_indices.empty(); }
};

inline void to_json(nlohmann::json& j, const CleanReport& r) {
  j = nlohmann::json{{"removed_indices", r.removed_indices},
                     {"filled_indices", r.filled_indices},
                     {"rules_fired", r.rules_fired}};
}

struct CleanResult {
  std::vector<SampleRecord> records;
  CleanReport report;
};

namespace detail {

inline bool any_non_finite(const SampleRecord& r) {
  if (!std::isfinite(r.wind_speed) || !std::isfinite(r.power) || !std::isfinite(r.ambient_temp) ||
      !std::isfinite(r.blade_angle))
    return true;
  for (double v : r.extra)
    if (!std::isfinite(v)) return true;
  return false;
}

inline double mean_or_one(const std::optional<double>& a, const std::optional<double>& b) {
  if (a && b) return 0.5 * (*a + *b);
  return a ? *a : *b;
}

}  // namespace detail

/// Removes records with negative (or non-finite) wind speed or power, or any
/// non-finite channel, and refills each vacancy with the mean of the nearest
/// valid record before and after it. Edge vacancies copy their one neighbor.
inline CleanResult clean(std::span<const SampleRecord> records) {
  if (records.empty()) throw InvalidInput("clean: empty input");
  CleanResult out;
  out.records.assign(records.begin(), records.end());

  std::vector<bool> invalid(records.size(), false);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    bool bad = false;
    if (r.wind_speed < 0.0) {
      ++out.report.rules_fired["negative_wind_speed"];
      bad = true;
    }
    if (r.power < 0.0) {
      ++out.report.rules_fired["negative_power"];
      bad = true;
    }
    if (detail::any_non_finite(r)) {
      ++out.report.rules_fired["non_finite"];
      bad = true;
    }
    invalid[i] = bad;
    if (bad) out.report.removed_indices.push_back(i);
  }
  if (out.report.removed_indices.size() == records.size())
    throw InvalidInput("clean: every record is invalid, nothing to fill from");

  std::vector<std::optional<std::size_t>> prev(records.size()), next(records.size());
  std::optional<std::size_t> last;
  for (std::size_t i = 0; i < records.size(); ++i) {
    prev[i] = last;
    if (!invalid[i]) last = i;
  }
  last.reset();
  for (std::size_t i = records.size(); i-- > 0;) {
    next[i] = last;
    if (!invalid[i]) last = i;
  }

  for (auto i : out.report.removed_indices) {
    const SampleRecord* a = prev[i] ? &records[*prev[i]] : nullptr;
    const SampleRecord* b = next[i] ? &records[*next[i]] : nullptr;
    auto pick = [&](double SampleRecord::*field) {
      return detail::mean_or_one(a ? std::optional<double>(a->*field) : std::nullopt,
                                 b ? std::optional<double>(b->*field) : std::nullopt);
    };
    auto& r = out.records[i];
    r.wind_speed = pick(&SampleRecord::wind_speed);
    r.power = pick(&SampleRecord::power);
    r.ambient_temp = pick(&SampleRecord::ambient_temp);
    if (a && b) {
      const double sa = std::sin(detail::deg2rad(a->blade_angle)) + std::sin(detail::deg2rad(b->blade_angle));
      const double ca = std::cos(detail::deg2rad(a->blade_angle)) + std::cos(detail::deg2rad(b->blade_angle));
      r.blade_angle = detail::circular_mean_deg(sa, ca);
    } else {
      r.blade_angle = (a ? a : b)->blade_angle;
    }
    const auto& src = a ? *a : *b;
    r.extra.resize(src.extra.size());
    for (std::size_t e = 0; e < r.extra.size(); ++e) {
      r.extra[e] = detail::mean_or_one(a ? std::optional<double>(a->extra[e]) : std::nullopt,
                                       b ? std::optional<double>(b->extra[e]) : std::nullopt);
    }
    out.report.filled_indices.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Min-max normalization

/// Per-column minimum and maximum of a training matrix. Immutable once fitted.
class NormStats {
 public:
  NormStats() = default;
  NormStats(std::vector<double> mins, std::vector<double> maxs) : min_(std::move(mins)), max_(std::move(maxs)) {
    if (min_.size() != max_.size()) throw InvalidInput("NormStats: min/max length mismatch");
    for (std::size_t c = 0; c < min_.size(); ++c)
      if (!(max_[c] >= min_[c])) throw InvalidInput("NormStats: max < min in column " + std::to_string(c));
  }

  std::size_t columns() const noexcept { return min_.size(); }
  const std::vector<double>& mins() const noexcept { return min_; }
  const std::vector<double>& maxs() const noexcept { return max_; }
  bool degenerate(std::size_t c) const { return max_[c] == min_[c]; }

  bool operator==(const NormStats&) const = default;

 private:
  std::vector<double> min_;
  std::vector<double> max_;
};

inline NormStats fit_norm(const Matrix& training) {
  if (training.rows() == 0 || training.cols() == 0) throw InvalidInput("fit_norm: empty training matrix");
  std::vector<double> mins(training.cols()), maxs(training.cols());
  for (Eigen::Index c = 0; c < training.cols(); ++c) {
    mins[c] = training.col(c).minCoeff();
    maxs[c] = training.col(c).maxCoeff();
  }
  return NormStats(std::move(mins), std::move(maxs));
}

namespace detail {
inline void require_columns(const NormStats& stats, const Matrix& data) {
  if (static_cast<std::size_t>(data.cols()) != stats.columns())
    throw InvalidInput("normalization column mismatch: stats have " + std::to_string(stats.columns()) +
                       " columns, data has " + std::to_string(data.cols()));
}
}  // namespace detail

/// (x - min) / (max - min) per column, no clamping. Degenerate columns map
/// to 0.5.
inline Matrix apply_norm(const NormStats& stats, const Matrix& data) {
  detail::require_columns(stats, data);
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const double lo = stats.mins()[c], hi = stats.maxs()[c];
    if (hi == lo) {
      out.col(c).setConstant(0.5);
    } else {
      out.col(c) = (data.col(c).array() - lo) / (hi - lo);
    }
  }
  return out;
}

inline Matrix invert_norm(const NormStats& stats, const Matrix& data) {
  detail::require_columns(stats, data);
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index c = 0; c < data.cols(); ++c) {
    const double lo = stats.mins()[c], hi = stats.maxs()[c];
    if (hi == lo) {
      out.col(c).setConstant(lo);
    } else {
      out.col(c) = data.col(c).array() * (hi - lo) + lo;
    }
  }
  return out;
}

inline void to_json(nlohmann::json& j, const NormStats& s) {
  j = nlohmann::json{{"min", s.mins()}, {"max", s.maxs()}};
}

}  // namespace windfc
