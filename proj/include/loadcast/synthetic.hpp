#pragma once

#include "loadcast/time_series.hpp"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace loadcast {

/// Parameters of one climate's residential load and weather character.
struct ClimateProfile {
  std::string name;
  double base_load_kw = 1.0;
  std::array<double, 24> daily_shape{};  // multiplicative factors per hour
  double weekend_multiplier = 1.0;
  double temp_annual_mean_c = 15.0;
  double temp_annual_amplitude_c = 6.0;
  int temp_annual_peak_doy = 196;  // day of year of the warmest part of the cycle
  double temp_diurnal_amplitude_c = 3.0;
  double temp_noise_std_c = 0.5;
  double coupling_kw_per_c = 0.0;  // negative for heating climates, positive for cooling
  double noise_std_kw = 0.05;      // stationary AR(1) noise level
  double noise_ar1 = 0.7;
  double volatility = 0.0;  // per-hour probability of a natural heavy-tail spike
  void validate() const;
};

ClimateProfile maritime_profile();
ClimateProfile tropical_profile();

enum class Resolution { OneMinute, ThirtyMinutes };

std::string to_string(Resolution r);
Resolution resolution_from_string(const std::string& text);
int records_per_hour(Resolution r);
ValueKind native_value_kind(Resolution r);  // 1-min sources meter Wh, 30-min sources meter kW

/// Deliberate defects whose ground truth feeds oracle tests.
struct InjectionSpec {
  int outlier_count = 0;
  double outlier_sigma = 8.0;  // spike height in clean-series standard deviations
  int gap_count = 0;
  int gap_min_hours = 1;
  int gap_max_hours = 30;
};

struct InjectionLog {
  std::vector<std::pair<Eigen::Index, double>> outliers;          // hour index, added kW
  std::vector<std::pair<Eigen::Index, Eigen::Index>> gaps;        // inclusive hour ranges
};

struct SyntheticData {
  std::vector<RawRecord> records;
  InjectionLog log;
};

/// Seeded generation of native-resolution records over [start, end):
/// load = base * shape[hour] * weekend factor + coupling * (temp - annual
/// mean) + AR(1) noise, floored at 0.01 kW; temperature = annual + diurnal
/// sinusoids + noise. Injected spikes and gaps land on the hourly grid and
/// are recorded in the log. Byte-identical output per (profile, seed).
SyntheticData generate(const ClimateProfile& profile, std::int64_t start_epoch_s,
                       std::int64_t end_epoch_s, Resolution resolution, std::uint64_t seed,
                       const InjectionSpec& inject = {});

}  // namespace loadcast
