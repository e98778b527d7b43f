#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace loadcast {

// All timestamps are UTC unix seconds; hours are the canonical resolution.
inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;
inline constexpr int kHoursPerWeek = 168;

/// Missing values are quiet NaNs throughout the toolkit.
inline double missing_value() { return std::numeric_limits<double>::quiet_NaN(); }
inline bool is_missing(double v) { return std::isnan(v); }

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1-12
  int day = 1;    // 1-31
};

/// Days since 1970-01-01 in the proleptic Gregorian calendar.
std::int64_t days_from_civil(const CivilDate& date);
CivilDate civil_from_days(std::int64_t days);

/// Parses an RFC 3339 instant ("2023-09-23T14:00:00Z", offsets allowed) to unix seconds.
std::int64_t parse_rfc3339(const std::string& text);
std::string format_rfc3339(std::int64_t epoch_s);

/// Parses "YYYY-MM-DD"; throws on malformed input.
CivilDate parse_date(const std::string& text);
std::string format_date(const CivilDate& date);

struct CalendarFeatures {
  int hour_of_day = 0;  // 0-23
  int day_of_week = 0;  // 0-6, Monday = 0
  int day_of_year = 1;  // 1-366
  bool is_weekend = false;
};

CalendarFeatures calendar_of(std::int64_t epoch_s);

enum class ValueKind { EnergyWh, PowerKw };

std::string to_string(ValueKind kind);
ValueKind value_kind_from_string(const std::string& text);

/// One meter reading at native resolution. Empty CSV cells map to absent optionals.
struct RawRecord {
  std::int64_t timestamp = 0;
  std::optional<double> value;  // Wh or kW depending on kind
  ValueKind kind = ValueKind::PowerKw;
  std::optional<double> temperature_c;
};

struct ResamplePolicy {
  ValueKind kind = ValueKind::PowerKw;
  int records_per_hour = 1;  // expected native records per hour, used for coverage
};

/// Hour-indexed load/temperature series. Index i covers
/// [start + i*3600, start + (i+1)*3600); gaps are explicit NaN entries.
struct HourlySeries {
  std::int64_t start = 0;         // hour-aligned unix seconds
  Eigen::VectorXd load_kw;        // average kW per hour, NaN where missing
  Eigen::VectorXd temperature_c;  // NaN where missing
  Eigen::VectorXd coverage;       // fraction of the hour backed by source records

  Eigen::Index size() const { return load_kw.size(); }
  std::int64_t timestamp_at(Eigen::Index i) const { return start + i * kSecondsPerHour; }
  Eigen::Index missing_load_count() const;
  Eigen::Index missing_temperature_count() const;

  /// Contiguous sub-series of `length` hours starting at index `offset`.
  HourlySeries slice(Eigen::Index offset, Eigen::Index length) const;
};

/// Aggregates native-resolution records onto the hourly grid spanning
/// [first record hour, last record hour]. Energy sources sum Wh and convert to
/// average kW; power sources take the in-hour mean. Hours without records are
/// missing, not zero.
HourlySeries resample_to_hourly(const std::vector<RawRecord>& records,
                                const ResamplePolicy& policy);

}  // namespace loadcast
