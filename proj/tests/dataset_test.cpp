#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "windfc/dataset.hpp"

using namespace windfc;

namespace {

std::vector<SampleRecord> constant_day(double ws, double temp, double power) {
  std::vector<SampleRecord> out;
  for (std::size_t i = 0; i < kRecordsPerDay; ++i)
    out.push_back({static_cast<std::int64_t>(i) * kStepMinutes, ws, 0.0, temp, power, {}});
  return out;
}

}  // namespace

TEST(Signature, ConstantSeries) {
  const auto day = constant_day(7.0, 12.0, 500.0);
  const auto s1 = compute_signature1(day);
  EXPECT_EQ(s1.ws_min, 7.0);
  EXPECT_EQ(s1.ws_mean, 7.0);
  EXPECT_EQ(s1.ws_max, 7.0);
  EXPECT_EQ(s1.t_mean, 12.0);
  const auto s2 = compute_signature2(day);
  EXPECT_EQ(s2.wp_max, 500.0);
  EXPECT_EQ(s2.wp_mean, 500.0);
}

TEST(Signature, MeanBetweenExtremes) {
  auto day = constant_day(5.0, 10.0, 100.0);
  for (std::size_t i = 0; i < day.size(); ++i) {
    day[i].wind_speed = 3.0 + 0.1 * static_cast<double>(i % 17);
    day[i].power = 1e6 / (1.0 + static_cast<double>(i));
  }
  const auto s1 = compute_signature1(day);
  EXPECT_LE(s1.ws_min, s1.ws_mean);
  EXPECT_LE(s1.ws_mean, s1.ws_max);
  const auto s2 = compute_signature2(day);
  EXPECT_LE(s2.wp_min, s2.wp_mean);
  EXPECT_LE(s2.wp_mean, s2.wp_max);
}

TEST(Csv, ParsesAndSorts) {
  std::istringstream in(
      "timestamp,power,wind_speed,blade_angle,ambient_temp,rotor\n"
      "10,200,5.5,90,11,3\n"
      "0,100,5,80,10,2\n");
  const auto r = parse_csv(in, {});
  ASSERT_EQ(r.series.records.size(), 2u);
  EXPECT_EQ(r.series.extra_names, std::vector<std::string>{"rotor"});
  EXPECT_EQ(r.series.records[0].timestamp, 0);
  EXPECT_EQ(r.series.records[0].power, 100.0);
  EXPECT_EQ(r.series.records[1].extra, std::vector<double>{3.0});
  EXPECT_TRUE(r.rejects.empty());
}

TEST(Csv, RejectsNonNumericRowsWithLine) {
  std::istringstream in(
      "timestamp,wind_speed,blade_angle,ambient_temp,power\n"
      "0,5,80,10,100\n"
      "10,abc,80,10,100\n"
      "20,5,80,10,120\n");
  const auto r = parse_csv(in, {});
  EXPECT_EQ(r.series.records.size(), 2u);
  ASSERT_EQ(r.rejects.size(), 1u);
  EXPECT_EQ(r.rejects[0].line, 3u);
  EXPECT_EQ(r.rejects[0].column, "wind_speed");
}

TEST(Csv, MissingColumnThrows) {
  std::istringstream in("timestamp,wind_speed,blade_angle,power\n0,5,80,100\n");
  try {
    parse_csv(in, {});
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("ambient_temp"), std::string::npos);
  }
}

TEST(Csv, DuplicateTimestampNamesLine) {
  std::istringstream in(
      "timestamp,wind_speed,blade_angle,ambient_temp,power\n"
      "0,5,80,10,100\n"
      "0,6,80,10,100\n");
  try {
    parse_csv(in, {});
    FAIL() << "expected InvalidInput";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
}

TEST(Csv, SchemaMapping) {
  std::istringstream in("t,ws,ba,at,p\n0,5,80,10,100\n");
  CsvSchema schema{"t", "ws", "ba", "at", "p"};
  const auto r = parse_csv(in, schema);
  ASSERT_EQ(r.series.records.size(), 1u);
  EXPECT_EQ(r.series.records[0].wind_speed, 5.0);
}

TEST(Csv, WriteReadRoundTrip) {
  const Series s = synth_generate(3, 1);
  std::stringstream buf;
  write_csv(buf, s);
  const auto r = parse_csv(buf, {});
  EXPECT_EQ(r.series, s);
}

TEST(Grid, FillsMissingSlotsWithPlaceholders) {
  Series s;
  s.records = {{0, 5, 0, 10, 100, {}}, {30, 6, 0, 10, 200, {}}};
  const auto g = fill_missing_slots(s);
  ASSERT_EQ(g.series.records.size(), 4u);
  EXPECT_EQ(g.inserted, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(g.series.records[2].timestamp, 20);
  EXPECT_TRUE(std::isnan(g.series.records[1].power));
}

TEST(Grid, OffGridTimestampThrows) {
  Series s;
  s.records = {{0, 5, 0, 10, 100, {}}, {15, 6, 0, 10, 200, {}}};
  EXPECT_THROW(fill_missing_slots(s), InvalidInput);
}

TEST(Hourly, SumsPowerAndAveragesSpeed) {
  std::vector<SampleRecord> recs;
  for (int i = 0; i < 6; ++i) recs.push_back({i * 10, static_cast<double>(i), 0.0, 10.0, 100.0, {}});
  const auto h = aggregate_hourly(recs);
  ASSERT_EQ(h.records.size(), 1u);
  EXPECT_DOUBLE_EQ(h.records[0].power, 600.0);
  EXPECT_DOUBLE_EQ(h.records[0].wind_speed, 2.5);
  EXPECT_EQ(h.dropped, 0u);
}

TEST(Hourly, BladeAngleCircularMean) {
  std::vector<SampleRecord> recs;
  for (int i = 0; i < 6; ++i) recs.push_back({i * 10, 1.0, i % 2 == 0 ? 350.0 : 10.0, 0.0, 0.0, {}});
  const auto h = aggregate_hourly(recs);
  const double a = h.records[0].blade_angle;
  EXPECT_LT(std::min(a, 360.0 - a), 1e-9);
}

TEST(Hourly, ReportsDroppedTail) {
  std::vector<SampleRecord> recs;
  for (int i = 0; i < 8; ++i) recs.push_back({i * 10, 1.0, 0.0, 0.0, 1.0, {}});
  const auto h = aggregate_hourly(recs);
  EXPECT_EQ(h.records.size(), 1u);
  EXPECT_EQ(h.dropped, 2u);
}

TEST(Hourly, UnevenSpacingThrows) {
  std::vector<SampleRecord> recs;
  for (int i = 0; i < 6; ++i) recs.push_back({i * 10 + (i == 3 ? 5 : 0), 1.0, 0.0, 0.0, 1.0, {}});
  EXPECT_THROW(aggregate_hourly(recs), InvalidInput);
}

TEST(Slice, DaysAndTail) {
  const Series s = synth_generate(1, 3);
  std::vector<SampleRecord> recs = s.records;
  recs.resize(2 * kRecordsPerDay + 10);
  const auto sl = slice_days(recs);
  ASSERT_EQ(sl.days.size(), 2u);
  EXPECT_EQ(sl.dropped, 10u);
  EXPECT_EQ(sl.days[1].day_index, 1);
  EXPECT_EQ(sl.days[1].records.front().timestamp, recs[kRecordsPerDay].timestamp);
}

TEST(Slice, TooFewRecordsThrows) {
  const Series s = synth_generate(1, 1);
  std::vector<SampleRecord> recs(s.records.begin(), s.records.begin() + 100);
  EXPECT_THROW(slice_days(recs), InvalidInput);
}

TEST(Slice, SignaturesReproducible) {
  const Series s = synth_generate(9, 4);
  for (auto day : slice_days(s.records).days) {
    const auto s1 = day.s1;
    const auto s2 = day.s2;
    day.recompute_signatures();
    EXPECT_EQ(day.s1, s1);
    EXPECT_EQ(day.s2, s2);
  }
}

TEST(PowerCurve, Regimes) {
  PowerCurveParams p;
  EXPECT_EQ(power_curve(2.9, p), 0.0);
  EXPECT_EQ(power_curve(p.rated_speed, p), p.rated_power);
  EXPECT_EQ(power_curve(20.0, p), p.rated_power);
  EXPECT_EQ(power_curve(25.5, p), 0.0);
  double prev = 0.0;
  for (double ws = p.cut_in; ws < p.rated_speed; ws += 0.25) {
    const double v = power_curve(ws, p);
    EXPECT_GE(v, prev);
    prev = v;
  }
}

TEST(PowerCurve, InvalidParamsThrow) {
  PowerCurveParams p;
  p.cut_in = 13.0;
  EXPECT_THROW(synth_generate(1, 1, p), InvalidInput);
  EXPECT_THROW(synth_generate(1, 0), InvalidInput);
}

TEST(Synth, DeterministicAndShaped) {
  const Series a = synth_generate(7, 2);
  const Series b = synth_generate(7, 2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.records.size(), 2 * kRecordsPerDay);
  EXPECT_NE(a, synth_generate(8, 2));
  for (const auto& r : a.records) {
    EXPECT_GE(r.power, 0.0);
    EXPECT_GE(r.wind_speed, 0.0);
    EXPECT_GE(r.blade_angle, 0.0);
    EXPECT_LT(r.blade_angle, 360.0);
  }
}

TEST(Synth, NoiseFreePowerFollowsCurve) {
  PowerCurveParams p;
  p.noise_std = 0.0;
  const Series s = synth_generate(11, 5, p);
  for (const auto& r : s.records) {
    EXPECT_EQ(r.power, power_curve(r.wind_speed, p));
    if (r.wind_speed < p.cut_in) EXPECT_EQ(r.power, 0.0);
  }
}
