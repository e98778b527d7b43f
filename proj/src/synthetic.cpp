#include "loadcast/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace loadcast {

void ClimateProfile::validate() const {
  if (!(base_load_kw > 0.0)) throw std::invalid_argument("ClimateProfile: base load must be > 0");
  if (noise_std_kw < 0.0) throw std::invalid_argument("ClimateProfile: noise std must be >= 0");
  if (!(noise_ar1 > -1.0 && noise_ar1 < 1.0))
    throw std::invalid_argument("ClimateProfile: noise_ar1 must be in (-1, 1)");
  if (volatility < 0.0 || volatility > 1.0)
    throw std::invalid_argument("ClimateProfile: volatility must be in [0, 1]");
}

ClimateProfile maritime_profile() {
  ClimateProfile p;
  p.name = "maritime";
  p.base_load_kw = 1.2;
  p.daily_shape = {0.55, 0.52, 0.50, 0.50, 0.50, 0.52, 0.68, 0.95, 1.05, 0.90, 0.80, 0.85,
                   0.95, 0.85, 0.80, 0.90, 1.20, 1.65, 1.85, 1.75, 1.50, 1.20, 0.90, 0.68};
  p.weekend_multiplier = 1.10;
  p.temp_annual_mean_c = 10.0;
  p.temp_annual_amplitude_c = 7.0;
  p.temp_annual_peak_doy = 196;  // mid July
  p.temp_diurnal_amplitude_c = 1.5;
  p.temp_noise_std_c = 0.8;
  p.coupling_kw_per_c = -0.03;  // heating load rises as it gets colder
  p.noise_std_kw = 0.08;
  p.noise_ar1 = 0.7;
  p.volatility = 0.008;
  return p;
}

ClimateProfile tropical_profile() {
  ClimateProfile p;
  p.name = "tropical";
  p.base_load_kw = 1.05;
  p.daily_shape = {0.70, 0.65, 0.62, 0.60, 0.60, 0.65, 0.80, 0.95, 1.00, 1.05, 1.15, 1.25,
                   1.35, 1.40, 1.40, 1.35, 1.30, 1.35, 1.50, 1.55, 1.45, 1.25, 1.00, 0.82};
  p.weekend_multiplier = 1.05;
  p.temp_annual_mean_c = 28.0;
  p.temp_annual_amplitude_c = 2.5;
  p.temp_diurnal_amplitude_c = 4.0;
  p.temp_noise_std_c = 0.5;
  p.coupling_kw_per_c = 0.045;  // cooling load rises with temperature
  p.noise_std_kw = 0.05;
  p.noise_ar1 = 0.7;
  p.volatility = 0.002;
  return p;
}

std::string to_string(Resolution r) {
  return r == Resolution::OneMinute ? "1min" : "30min";
}

Resolution resolution_from_string(const std::string& text) {
  if (text == "1min") return Resolution::OneMinute;
  if (text == "30min") return Resolution::ThirtyMinutes;
  throw std::invalid_argument("unknown resolution '" + text + "' (expected '1min' or '30min')");
}

int records_per_hour(Resolution r) { return r == Resolution::OneMinute ? 60 : 2; }

ValueKind native_value_kind(Resolution r) {
  return r == Resolution::OneMinute ? ValueKind::EnergyWh : ValueKind::PowerKw;
}

namespace {

constexpr double kLoadFloorKw = 0.01;
constexpr double kPi = 3.14159265358979323846;

}  // namespace

SyntheticData generate(const ClimateProfile& profile, std::int64_t start_epoch_s,
                       std::int64_t end_epoch_s, Resolution resolution, std::uint64_t seed,
                       const InjectionSpec& inject) {
  profile.validate();
  if (start_epoch_s >= end_epoch_s) throw std::invalid_argument("generate: start must precede end");
  const std::int64_t start = start_epoch_s / kSecondsPerHour * kSecondsPerHour;
  const Eigen::Index hours = static_cast<Eigen::Index>((end_epoch_s - start) / kSecondsPerHour);
  if (hours < 1) throw std::invalid_argument("generate: span shorter than one hour");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::VectorXd temp(hours), load(hours);
  // Diurnal temperature peaks at 15:00; the annual peak day is per profile.
  const double innovation_std =
      profile.noise_std_kw * std::sqrt(1.0 - profile.noise_ar1 * profile.noise_ar1);
  double ar_state = profile.noise_std_kw > 0.0 ? profile.noise_std_kw * gauss(rng) : 0.0;

  for (Eigen::Index i = 0; i < hours; ++i) {
    const std::int64_t ts = start + i * kSecondsPerHour;
    const CalendarFeatures cal = calendar_of(ts);
    const double annual =
        profile.temp_annual_amplitude_c *
        std::cos(2.0 * kPi * (cal.day_of_year - profile.temp_annual_peak_doy) / 365.25);
    const double diurnal =
        profile.temp_diurnal_amplitude_c * std::sin(2.0 * kPi * (cal.hour_of_day - 9) / 24.0);
    temp[i] = profile.temp_annual_mean_c + annual + diurnal + profile.temp_noise_std_c * gauss(rng);

    if (i > 0) ar_state = profile.noise_ar1 * ar_state + innovation_std * gauss(rng);
    double kw = profile.base_load_kw * profile.daily_shape[static_cast<std::size_t>(cal.hour_of_day)];
    if (cal.is_weekend) kw *= profile.weekend_multiplier;
    kw += profile.coupling_kw_per_c * (temp[i] - profile.temp_annual_mean_c);
    kw += ar_state;
    if (unit(rng) < profile.volatility) {
      const double magnitude = (4.0 + 4.0 * unit(rng)) * profile.noise_std_kw;
      kw += unit(rng) < 0.5 ? magnitude : -magnitude;
    }
    load[i] = std::max(kLoadFloorKw, kw);
  }

  // Injections stay clear of both ends so gaps survive resampling and the
  // imputation prefix rule.
  InjectionLog log;
  const Eigen::Index margin = std::min<Eigen::Index>(24, hours / 4);
  std::vector<bool> in_gap(static_cast<std::size_t>(hours), false);

  for (int g = 0; g < inject.gap_count; ++g) {
    const int len_lo = std::max(1, inject.gap_min_hours);
    const int len_hi = std::max(len_lo, inject.gap_max_hours);
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      std::uniform_int_distribution<int> len_pick(len_lo, len_hi);
      const Eigen::Index len = len_pick(rng);
      if (hours - 2 * margin - len <= 0) break;
      std::uniform_int_distribution<Eigen::Index> start_pick(margin, hours - margin - len - 1);
      const Eigen::Index first = start_pick(rng);
      bool clash = false;
      for (Eigen::Index t = std::max<Eigen::Index>(0, first - 1); t <= first + len && !clash; ++t)
        clash = in_gap[static_cast<std::size_t>(t)];
      if (clash) continue;
      for (Eigen::Index t = first; t < first + len; ++t) in_gap[static_cast<std::size_t>(t)] = true;
      log.gaps.emplace_back(first, first + len - 1);
      placed = true;
    }
    if (!placed) throw std::runtime_error("generate: could not place the requested gaps");
  }

  if (inject.outlier_count > 0) {
    const double mean = load.mean();
    const double clean_std = std::sqrt((load.array() - mean).square().mean());
    std::vector<bool> taken(static_cast<std::size_t>(hours), false);
    for (int o = 0; o < inject.outlier_count; ++o) {
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        std::uniform_int_distribution<Eigen::Index> pick(margin, hours - margin - 1);
        const Eigen::Index idx = pick(rng);
        if (taken[static_cast<std::size_t>(idx)] || in_gap[static_cast<std::size_t>(idx)]) continue;
        const double magnitude = inject.outlier_sigma * clean_std;
        load[idx] += magnitude;
        taken[static_cast<std::size_t>(idx)] = true;
        log.outliers.emplace_back(idx, magnitude);
        placed = true;
      }
      if (!placed) throw std::runtime_error("generate: could not place the requested outliers");
    }
    std::sort(log.outliers.begin(), log.outliers.end());
  }
  std::sort(log.gaps.begin(), log.gaps.end());

  const int per_hour = records_per_hour(resolution);
  const std::int64_t step = kSecondsPerHour / per_hour;
  const ValueKind kind = native_value_kind(resolution);

  SyntheticData out;
  out.log = std::move(log);
  out.records.reserve(static_cast<std::size_t>(hours) * static_cast<std::size_t>(per_hour));
  for (Eigen::Index i = 0; i < hours; ++i) {
    if (in_gap[static_cast<std::size_t>(i)]) continue;
    for (int r = 0; r < per_hour; ++r) {
      RawRecord rec;
      rec.timestamp = start + i * kSecondsPerHour + r * step;
      rec.kind = kind;
      rec.value = kind == ValueKind::EnergyWh ? load[i] * 1000.0 / per_hour : load[i];
      rec.temperature_c = temp[i];
      out.records.push_back(rec);
    }
  }
  return out;
}

}  // namespace loadcast
