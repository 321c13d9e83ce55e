#pragma once

// SCADA time-series ingestion, hourly/daily aggregation and a seeded synthetic
// wind-farm generator.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "windfc/error.hpp"
#include "windfc/random.hpp"
#include "windfc/text.hpp"

namespace windfc {

inline constexpr std::int64_t kStepMinutes = 10;
inline constexpr std::size_t kRecordsPerHour = 6;
inline constexpr std::size_t kRecordsPerDay = 144;

/// One 10-minute SCADA observation. Timestamps are abstract minutes.
struct SampleRecord {
  std::int64_t timestamp = 0;
  double wind_speed = 0.0;    // m/s
  double blade_angle = 0.0;   // degrees in [0, 360)
  double ambient_temp = 0.0;  // deg C
  double power = 0.0;         // kW
  std::vector<double> extra;  // values for Series::extra_names, same order

  bool operator==(const SampleRecord&) const = default;
};

/// A time series of records sharing one set of auxiliary channel names.
struct Series {
  std::vector<std::string> extra_names;
  std::vector<SampleRecord> records;

  bool operator==(const Series&) const = default;
};

struct Signature1 {
  double ws_max = 0, ws_min = 0, ws_mean = 0;
  double t_max = 0, t_min = 0, t_mean = 0;

  std::vector<double> to_vector() const { return {ws_max, ws_min, ws_mean, t_max, t_min, t_mean}; }
  bool operator==(const Signature1&) const = default;
};

struct Signature2 {
  double wp_max = 0, wp_min = 0, wp_mean = 0;

  std::vector<double> to_vector() const { return {wp_max, wp_min, wp_mean}; }
  bool operator==(const Signature2&) const = default;
};

inline Signature1 compute_signature1(std::span<const SampleRecord> records) {
  if (records.empty()) throw InvalidInput("signature of an empty record window");
  Signature1 s;
  s.ws_max = s.ws_min = records.front().wind_speed;
  s.t_max = s.t_min = records.front().ambient_temp;
  double ws_sum = 0.0, t_sum = 0.0;
  for (const auto& r : records) {
    s.ws_max = std::max(s.ws_max, r.wind_speed);
    s.ws_min = std::min(s.ws_min, r.wind_speed);
    s.t_max = std::max(s.t_max, r.ambient_temp);
    s.t_min = std::min(s.t_min, r.ambient_temp);
    ws_sum += r.wind_speed;
    t_sum += r.ambient_temp;
  }
  const auto n = static_cast<double>(records.size());
  // Clamp guards the ordering invariant against summation rounding on
  // constant windows.
  s.ws_mean = std::clamp(ws_sum / n, s.ws_min, s.ws_max);
  s.t_mean = std::clamp(t_sum / n, s.t_min, s.t_max);
  return s;
}

inline Signature2 compute_signature2(std::span<const SampleRecord> records) {
  if (records.empty()) throw InvalidInput("signature of an empty record window");
  Signature2 s;
  s.wp_max = s.wp_min = records.front().power;
  double sum = 0.0;
  for (const auto& r : records) {
    s.wp_max = std::max(s.wp_max, r.power);
    s.wp_min = std::min(s.wp_min, r.power);
    sum += r.power;
  }
  s.wp_mean = std::clamp(sum / static_cast<double>(records.size()), s.wp_min, s.wp_max);
  return s;
}

/// A day of 144 ten-minute records with its meteorological (s1) and power
/// (s2) signatures.
struct DayUnit {
  int day_index = 0;
  std::vector<SampleRecord> records;
  Signature1 s1;
  Signature2 s2;

  void recompute_signatures() {
    s1 = compute_signature1(records);
    s2 = compute_signature2(records);
  }
};

// ---------------------------------------------------------------------------
// CSV

/// Column names of the required channels.
struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string wind_speed = "wind_speed";
  std::string blade_angle = "blade_angle";
  std::string ambient_temp = "ambient_temp";
  std::string power = "power";

  bool operator==(const CsvSchema&) const = default;
};

struct RowReject {
  std::size_t line = 0;  // 1-based file line
  std::string column;
  std::string reason;
};

struct IngestResult {
  Series series;
  std::vector<RowReject> rejects;
};

namespace detail {

inline void require_spacing(std::span<const SampleRecord> records) {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].timestamp - records[i - 1].timestamp != kStepMinutes) {
      throw InvalidInput("records are not equally spaced at 10 minutes (position " +
                         std::to_string(i) + ", timestamp " +
                         std::to_string(records[i].timestamp) + ")");
    }
  }
}

inline double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0) r += 360.0;
  return r >= 360.0 ? 0.0 : r;
}

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Direction of the mean of unit vectors (sin_sum, cos_sum), in [0, 360).
inline double circular_mean_deg(double sin_sum, double cos_sum) {
  return wrap_degrees(std::atan2(sin_sum, cos_sum) * 180.0 / std::numbers::pi);
}

}  // namespace detail

/// Parses SCADA CSV text. Rows with an unparseable required field are skipped
/// and listed in `rejects`; auxiliary columns that fail to parse become NaN.
inline IngestResult parse_csv(std::istream& in, const CsvSchema& schema,
                              const std::string& source = "<stream>") {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!text::trim(line).empty()) break;
  }
  if (text::trim(line).empty()) throw InvalidInput(source + ": missing header row");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // BOM

  const auto header = text::split(line, ',');
  auto column_of = [&](const std::string& name, const char* role) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw InvalidInput(source + ": missing required column '" + name + "' (" + role + ")");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_ts = column_of(schema.timestamp, "timestamp");
  const std::size_t c_ws = column_of(schema.wind_speed, "wind speed");
  const std::size_t c_ba = column_of(schema.blade_angle, "blade angle");
  const std::size_t c_t = column_of(schema.ambient_temp, "temperature");
  const std::size_t c_p = column_of(schema.power, "power");

  IngestResult result;
  std::vector<std::size_t> extra_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == c_ts || c == c_ws || c == c_ba || c == c_t || c == c_p) continue;
    extra_cols.push_back(c);
    result.series.extra_names.push_back(header[c]);
  }

  struct Row {
    SampleRecord record;
    std::size_t line;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    const auto cells = text::split(line, ',');
    if (cells.size() != header.size()) {
      result.rejects.push_back({line_no, "", "expected " + std::to_string(header.size()) +
                                                 " fields, found " + std::to_string(cells.size())});
      continue;
    }
    SampleRecord r;
    const auto ts = text::parse_int(cells[c_ts]);
    if (!ts) {
      result.rejects.push_back({line_no, header[c_ts], "unparseable timestamp"});
      continue;
    }
    r.timestamp = *ts;
    bool ok = true;
    auto numeric = [&](std::size_t c, double& dst) {
      if (!ok) return;
      const auto v = text::parse_double(cells[c]);
      if (!v) {
        result.rejects.push_back({line_no, header[c], "non-numeric value '" + cells[c] + "'"});
        ok = false;
        return;
      }
      dst = *v;
    };
    numeric(c_ws, r.wind_speed);
    numeric(c_ba, r.blade_angle);
    numeric(c_t, r.ambient_temp);
    numeric(c_p, r.power);
    if (!ok) continue;
    r.extra.reserve(extra_cols.size());
    for (auto c : extra_cols) r.extra.push_back(text::parse_double(cells[c]).value_or(std::nan("")));
    rows.push_back({std::move(r), line_no});
  }

  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return a.record.timestamp < b.record.timestamp;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].record.timestamp == rows[i - 1].record.timestamp) {
      throw InvalidInput(source + ": duplicate timestamp " + std::to_string(rows[i].record.timestamp) +
                         " at line " + std::to_string(std::max(rows[i].line, rows[i - 1].line)));
    }
  }
  result.series.records.reserve(rows.size());
  for (auto& row : rows) result.series.records.push_back(std::move(row.record));
  return result;
}

inline IngestResult ingest_csv(const std::string& path, const CsvSchema& schema = {}) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open CSV file '" + path + "'");
  return parse_csv(in, schema, path);
}

/// Writes `series` with the column names in `schema`; numbers use the
/// shortest round-trip representation.
inline void write_csv(std::ostream& out, const Series& series, const CsvSchema& schema = {}) {
  out << schema.timestamp << ',' << schema.wind_speed << ',' << schema.blade_angle << ','
      << schema.ambient_temp << ',' << schema.power;
  for (const auto& name : series.extra_names) out << ',' << name;
  out << '\n';
  for (const auto& r : series.records) {
    out << r.timestamp << ',' << text::format_number(r.wind_speed) << ','
        << text::format_number(r.blade_angle) << ',' << text::format_number(r.ambient_temp) << ','
        << text::format_number(r.power);
    for (double v : r.extra) out << ',' << text::format_number(v);
    out << '\n';
  }
}

/// Result of re-establishing the 10-minute grid.
struct GridFillResult {
  Series series;
  std::vector<std::size_t> inserted;  // positions of placeholder records
};

/// Inserts NaN placeholder records for missing 10-minute slots so the series
/// is equally spaced; `clean` then fills the placeholders from neighbors.
inline GridFillResult fill_missing_slots(const Series& in) {
  GridFillResult out;
  out.series.extra_names = in.extra_names;
  const double nan = std::nan("");
  for (std::size_t i = 0; i < in.records.size(); ++i) {
    if (i > 0) {
      const auto gap = in.records[i].timestamp - in.records[i - 1].timestamp;
      if (gap % kStepMinutes != 0)
        throw InvalidInput("timestamp " + std::to_string(in.records[i].timestamp) +
                           " is off the 10-minute grid");
      for (auto t = in.records[i - 1].timestamp + kStepMinutes; t < in.records[i].timestamp;
           t += kStepMinutes) {
        out.inserted.push_back(out.series.records.size());
        out.series.records.push_back(
            {t, nan, nan, nan, nan, std::vector<double>(in.extra_names.size(), nan)});
      }
    }
    out.series.records.push_back(in.records[i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct HourlyResult {
  std::vector<SampleRecord> records;
  std::size_t dropped = 0;  // trailing 10-minute records outside a full hour
};

/// Sums power and averages the other channels over consecutive groups of six
/// 10-minute records. Blade angle is averaged through its sine/cosine
/// components.
inline HourlyResult aggregate_hourly(std::span<const SampleRecord> records) {
  if (records.size() < kRecordsPerHour)
    throw InvalidInput("hourly aggregation needs at least 6 records, got " +
                       std::to_string(records.size()));
  detail::require_spacing(records);
  HourlyResult out;
  const std::size_t hours = records.size() / kRecordsPerHour;
  out.dropped = records.size() - hours * kRecordsPerHour;
  out.records.reserve(hours);
  for (std::size_t h = 0; h < hours; ++h) {
    const auto group = records.subspan(h * kRecordsPerHour, kRecordsPerHour);
    SampleRecord agg;
    agg.timestamp = group.front().timestamp;
    agg.extra.assign(group.front().extra.size(), 0.0);
    double sin_sum = 0.0, cos_sum = 0.0;
    for (const auto& r : group) {
      agg.power += r.power;
      agg.wind_speed += r.wind_speed;
      agg.ambient_temp += r.ambient_temp;
      sin_sum += std::sin(detail::deg2rad(r.blade_angle));
      cos_sum += std::cos(detail::deg2rad(r.blade_angle));
      for (std::size_t e = 0; e < agg.extra.size() && e < r.extra.size(); ++e) agg.extra[e] += r.extra[e];
    }
    constexpr double n = static_cast<double>(kRecordsPerHour);
    agg.wind_speed /= n;
    agg.ambient_temp /= n;
    for (auto& e : agg.extra) e /= n;
    agg.blade_angle = detail::circular_mean_deg(sin_sum, cos_sum);
    out.records.push_back(std::move(agg));
  }
  return out;
}

struct SliceResult {
  std::vector<DayUnit> days;
  std::size_t dropped = 0;  // trailing records outside a full day
};

inline SliceResult slice_days(std::span<const SampleRecord> records) {
  if (records.size() < kRecordsPerDay)
    throw InvalidInput("slicing days needs at least 144 records, got " + std::to_string(records.size()));
  detail::require_spacing(records);
  SliceResult out;
  const std::size_t n_days = records.size() / kRecordsPerDay;
  out.dropped = records.size() - n_days * kRecordsPerDay;
  out.days.reserve(n_days);
  for (std::size_t d = 0; d < n_days; ++d) {
    DayUnit day;
    day.day_index = static_cast<int>(d);
    const auto window = records.subspan(d * kRecordsPerDay, kRecordsPerDay);
    day.records.assign(window.begin(), window.end());
    day.recompute_signatures();
    out.days.push_back(std::move(day));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generator

/// Idealized turbine power curve.
struct PowerCurveParams {
  double cut_in = 3.0;         // m/s
  double rated_speed = 12.0;   // m/s
  double cut_out = 25.0;       // m/s
  double rated_power = 2000.0; // kW
  double noise_std = 50.0;     // kW

  void validate() const {
    if (!(0.0 < cut_in && cut_in < rated_speed && rated_speed < cut_out))
      throw InvalidInput("power curve requires 0 < cut_in < rated_speed < cut_out");
    if (!(rated_power > 0.0)) throw InvalidInput("power curve requires rated_power > 0");
    if (!(noise_std >= 0.0)) throw InvalidInput("power curve requires noise_std >= 0");
  }

  bool operator==(const PowerCurveParams&) const = default;
};

/// Noise-free power at `wind_speed`: zero below cut-in and above cut-out,
/// cubic up to rated speed, flat at rated power in between.
inline double power_curve(double wind_speed, const PowerCurveParams& p) {
  if (wind_speed < p.cut_in || wind_speed > p.cut_out) return 0.0;
  if (wind_speed >= p.rated_speed) return p.rated_power;
  const double lo = p.cut_in * p.cut_in * p.cut_in;
  const double hi = p.rated_speed * p.rated_speed * p.rated_speed;
  return p.rated_power * (wind_speed * wind_speed * wind_speed - lo) / (hi - lo);
}

/// Name of the synthetic auxiliary channel: a turbine-internal temperature
/// that tracks output and is therefore not known ahead of time.
inline constexpr const char* kSynthMachineTemp = "machine_temp";

/// Generates `days` days of 10-minute records. Wind speed is an AR(1)
/// anomaly around a diurnal mean; temperature a diurnal sinusoid on a slow
/// AR(1) drift; blade angle a wrapped random walk.
inline Series synth_generate(std::uint64_t seed, int days, const PowerCurveParams& params = {}) {
  if (days < 1) throw InvalidInput("synthetic generation needs days >= 1");
  params.validate();

  constexpr double kDayMinutes = 1440.0;
  constexpr double kWindBase = 7.5;
  constexpr double kWindDiurnal = 1.5;
  constexpr double kWindPersistence = 0.995;
  constexpr double kWindShock = 0.32;
  constexpr double kWindTurbulence = 0.4;
  constexpr double kTempBase = 14.0;
  constexpr double kTempDiurnal = 5.0;
  constexpr double kTempPersistence = 0.998;
  constexpr double kTempShock = 0.12;
  constexpr double kBladeStep = 2.0;
  const double tau = 2.0 * std::numbers::pi;

  Rng rng = make_rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 360.0);

  Series out;
  out.extra_names = {kSynthMachineTemp};
  const std::size_t n = static_cast<std::size_t>(days) * kRecordsPerDay;
  out.records.reserve(n);

  double wind_anomaly = gauss(rng) * kWindShock / std::sqrt(1.0 - kWindPersistence * kWindPersistence);
  double temp_drift = gauss(rng) * 2.0;
  double blade = uniform(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t t = static_cast<std::int64_t>(i) * kStepMinutes;
    const double phase = tau * static_cast<double>(t % 1440) / kDayMinutes;

    wind_anomaly = kWindPersistence * wind_anomaly + kWindShock * gauss(rng);
    const double wind_mean = kWindBase + kWindDiurnal * std::sin(phase - tau / 4.0);
    const double ws = std::max(0.0, wind_mean + wind_anomaly + kWindTurbulence * gauss(rng));

    temp_drift = kTempPersistence * temp_drift + kTempShock * gauss(rng);
    const double temp =
        kTempBase + temp_drift + kTempDiurnal * std::sin(phase - tau * 0.375) + 0.3 * gauss(rng);

    blade = detail::wrap_degrees(blade + kBladeStep * gauss(rng));

    const double noise = params.noise_std * gauss(rng);
    const double power = std::max(0.0, power_curve(ws, params) + noise);
    const double machine_temp = temp + 25.0 * power / params.rated_power + 0.5 * gauss(rng);

    out.records.push_back({t, ws, blade, temp, power, {machine_temp}});
  }
  return out;
}

}  // namespace windfc
