#include "loadcast/preprocess.hpp"
#include "loadcast/synthetic.hpp"

#include <doctest.h>

#include <set>

using namespace loadcast;

namespace {

const std::int64_t kStart = days_from_civil({2023, 9, 23}) * kSecondsPerDay;

HourlySeries resampled(const SyntheticData& data, Resolution r) {
  return resample_to_hourly(data.records, {native_value_kind(r), records_per_hour(r)});
}

double autocorrelation(const Eigen::VectorXd& x, Eigen::Index lag) {
  const double mean = x.mean();
  const Eigen::ArrayXd centered = x.array() - mean;
  const double denom = centered.square().sum();
  double num = 0.0;
  for (Eigen::Index i = lag; i < x.size(); ++i) num += centered[i] * centered[i - lag];
  return num / denom;
}

// Tame profile for exact-recovery oracles: structure dominates noise, so no
// natural value comes near the z = 3 line while 8-sigma spikes stand clear.
ClimateProfile tame_profile() {
  ClimateProfile p;
  p.name = "tame";
  p.base_load_kw = 1.0;
  for (int h = 0; h < 24; ++h)
    p.daily_shape[static_cast<std::size_t>(h)] =
        1.0 + 0.25 * std::sin(2.0 * 3.14159265358979323846 * (h - 12) / 24.0);
  p.weekend_multiplier = 1.0;
  p.temp_annual_mean_c = 15.0;
  p.temp_annual_amplitude_c = 2.0;
  p.temp_diurnal_amplitude_c = 1.0;
  p.temp_noise_std_c = 0.3;
  p.coupling_kw_per_c = 0.02;
  p.noise_std_kw = 0.02;
  p.noise_ar1 = 0.7;
  p.volatility = 0.0;
  return p;
}

}  // namespace

TEST_CASE("generation is byte-identical per seed") {
  const ClimateProfile profile = tropical_profile();
  const std::int64_t end = kStart + 20 * kSecondsPerDay;
  InjectionSpec inject;
  inject.outlier_count = 3;
  inject.gap_count = 2;
  const SyntheticData a = generate(profile, kStart, end, Resolution::ThirtyMinutes, 99, inject);
  const SyntheticData b = generate(profile, kStart, end, Resolution::ThirtyMinutes, 99, inject);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].timestamp == b.records[i].timestamp);
    CHECK(a.records[i].value == b.records[i].value);
    CHECK(a.records[i].temperature_c == b.records[i].temperature_c);
  }
  CHECK(a.log.outliers == b.log.outliers);
  CHECK(a.log.gaps == b.log.gaps);

  const SyntheticData c = generate(profile, kStart, end, Resolution::ThirtyMinutes, 100, inject);
  CHECK(c.records[5].value != a.records[5].value);  // seed actually matters
}

TEST_CASE("load never drops below the floor") {
  ClimateProfile profile = maritime_profile();
  profile.coupling_kw_per_c = -0.5;  // try hard to push the load negative
  const SyntheticData data =
      generate(profile, kStart, kStart + 60 * kSecondsPerDay, Resolution::ThirtyMinutes, 3);
  for (const RawRecord& r : data.records) CHECK(*r.value >= 0.01);
}

TEST_CASE("degenerate profile yields a constant series") {
  ClimateProfile p = tame_profile();
  p.noise_std_kw = 0.0;
  p.temp_noise_std_c = 0.0;
  p.coupling_kw_per_c = 0.0;
  p.daily_shape.fill(1.0);
  const SyntheticData data =
      generate(p, kStart, kStart + 10 * kSecondsPerDay, Resolution::ThirtyMinutes, 5);
  const HourlySeries s = resampled(data, Resolution::ThirtyMinutes);
  for (Eigen::Index i = 0; i < s.size(); ++i) CHECK(s.load_kw[i] == s.load_kw[0]);
}

TEST_CASE("maritime coupling makes load and temperature anticorrelated") {
  const SyntheticData data = generate(maritime_profile(), kStart, kStart + 365 * kSecondsPerDay,
                                      Resolution::ThirtyMinutes, 11);
  const HourlySeries s = resampled(data, Resolution::ThirtyMinutes);
  const Eigen::ArrayXd load = s.load_kw.array() - s.load_kw.mean();
  const Eigen::ArrayXd temp = s.temperature_c.array() - s.temperature_c.mean();
  const double corr =
      (load * temp).sum() / std::sqrt(load.square().sum() * temp.square().sum());
  CHECK(corr < -0.05);
}

TEST_CASE("tropical daily rhythm is more persistent than maritime") {
  const std::int64_t end = kStart + 288 * kSecondsPerDay;
  const HourlySeries trop = resampled(
      generate(tropical_profile(), kStart, end, Resolution::ThirtyMinutes, 21), Resolution::ThirtyMinutes);
  const HourlySeries mari = resampled(
      generate(maritime_profile(), kStart, end, Resolution::OneMinute, 21), Resolution::OneMinute);
  CHECK(autocorrelation(trop.load_kw, 24) > autocorrelation(mari.load_kw, 24));
}

TEST_CASE("one-minute energy and thirty-minute power emissions agree after resampling") {
  const ClimateProfile p = tame_profile();
  const std::int64_t end = kStart + 15 * kSecondsPerDay;
  const HourlySeries a =
      resampled(generate(p, kStart, end, Resolution::OneMinute, 31), Resolution::OneMinute);
  const HourlySeries b =
      resampled(generate(p, kStart, end, Resolution::ThirtyMinutes, 31), Resolution::ThirtyMinutes);
  REQUIRE(a.size() == b.size());
  CHECK((a.load_kw - b.load_kw).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("native record counts reflect the resolution and the gaps") {
  const ClimateProfile p = tame_profile();
  const std::int64_t end = kStart + 30 * kSecondsPerDay;
  InjectionSpec inject;
  inject.gap_count = 2;
  inject.gap_min_hours = 3;
  inject.gap_max_hours = 5;
  const SyntheticData data = generate(p, kStart, end, Resolution::OneMinute, 41, inject);
  Eigen::Index gap_hours = 0;
  for (const auto& [first, last] : data.log.gaps) gap_hours += last - first + 1;
  CHECK(data.records.size() == static_cast<std::size_t>((720 - gap_hours) * 60));
}

TEST_CASE("pipeline recovery: injected spikes and gaps are found exactly") {
  const ClimateProfile p = tame_profile();
  const std::int64_t end = kStart + 90 * kSecondsPerDay;
  InjectionSpec inject;
  inject.outlier_count = 8;
  inject.outlier_sigma = 8.0;
  inject.gap_count = 4;
  inject.gap_min_hours = 1;
  inject.gap_max_hours = 30;
  const SyntheticData data = generate(p, kStart, end, Resolution::ThirtyMinutes, 77, inject);
  const HourlySeries s = resampled(data, Resolution::ThirtyMinutes);

  // outlier oracle: the injected hour indices, nothing else
  const auto mask = detect_outliers(s, {3.0, OutlierReplacement::DatasetMedian});
  std::set<Eigen::Index> expected;
  for (const auto& [idx, magnitude] : data.log.outliers) expected.insert(idx);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    CHECK(mask[static_cast<std::size_t>(i)] == (expected.count(i) > 0));

  // gap oracle: exactly the injected ranges are missing
  std::set<Eigen::Index> gap_hours;
  for (const auto& [first, last] : data.log.gaps)
    for (Eigen::Index i = first; i <= last; ++i) gap_hours.insert(i);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    CHECK(is_missing(s.load_kw[i]) == (gap_hours.count(i) > 0));

  // imputation touches exactly the gaps and leaves nothing missing
  const HourlySeries filled = impute(s, 2);
  CHECK(filled.missing_load_count() == 0);
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (gap_hours.count(i) == 0) CHECK(filled.load_kw[i] == s.load_kw[i]);
}
