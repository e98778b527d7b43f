#include "loadcast/time_series.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace loadcast {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) { return a - floor_div(a, b) * b; }

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

}  // namespace

// Howard Hinnant's proleptic Gregorian day algorithms.
std::int64_t days_from_civil(const CivilDate& date) {
  int y = date.year;
  const int m = date.month;
  const int d = date.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t days) {
  days += 719468;
  const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

namespace {

int parse_int(const std::string& s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) throw std::invalid_argument("timestamp too short: '" + s + "'");
  int value = 0;
  const auto* first = s.data() + pos;
  auto [ptr, ec] = std::from_chars(first, first + len, value);
  if (ec != std::errc() || ptr != first + len)
    throw std::invalid_argument("bad numeric field in timestamp: '" + s + "'");
  return value;
}

void validate_civil(const CivilDate& d) {
  static constexpr std::array<int, 12> days_in{31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (d.month < 1 || d.month > 12) throw std::invalid_argument("month out of range");
  int dim = days_in[static_cast<std::size_t>(d.month - 1)];
  if (d.month == 2 && is_leap(d.year)) dim = 29;
  if (d.day < 1 || d.day > dim) throw std::invalid_argument("day out of range");
}

}  // namespace

CivilDate parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw std::invalid_argument("expected YYYY-MM-DD, got '" + text + "'");
  CivilDate d{parse_int(text, 0, 4), parse_int(text, 5, 2), parse_int(text, 8, 2)};
  validate_civil(d);
  return d;
}

std::string format_date(const CivilDate& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", date.year, date.month, date.day);
  return buf;
}

std::int64_t parse_rfc3339(const std::string& text) {
  // YYYY-MM-DDTHH:MM:SS[.frac][Z|+hh:mm|-hh:mm]; naive instants are taken as UTC.
  if (text.size() < 19) throw std::invalid_argument("timestamp too short: '" + text + "'");
  if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != 't' && text[10] != ' ') ||
      text[13] != ':' || text[16] != ':')
    throw std::invalid_argument("malformed RFC 3339 timestamp: '" + text + "'");
  CivilDate date{parse_int(text, 0, 4), parse_int(text, 5, 2), parse_int(text, 8, 2)};
  validate_civil(date);
  const int hh = parse_int(text, 11, 2);
  const int mm = parse_int(text, 14, 2);
  const int ss = parse_int(text, 17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw std::invalid_argument("time out of range: '" + text + "'");

  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;  // fractional seconds are truncated
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
  }
  std::int64_t offset_s = 0;
  if (pos < text.size()) {
    const char c = text[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      if (pos + 6 > text.size() || text[pos + 3] != ':')
        throw std::invalid_argument("malformed UTC offset: '" + text + "'");
      const int oh = parse_int(text, pos + 1, 2);
      const int om = parse_int(text, pos + 4, 2);
      offset_s = (c == '+' ? 1 : -1) * (oh * 3600 + om * 60);
      pos += 6;
    }
  }
  if (pos != text.size()) throw std::invalid_argument("trailing characters in timestamp: '" + text + "'");
  return days_from_civil(date) * kSecondsPerDay + hh * 3600 + mm * 60 + ss - offset_s;
}

std::string format_rfc3339(std::int64_t epoch_s) {
  const CivilDate d = civil_from_days(floor_div(epoch_s, kSecondsPerDay));
  const std::int64_t sod = floor_mod(epoch_s, kSecondsPerDay);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month, d.day,
                static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                static_cast<int>(sod % 60));
  return buf;
}

CalendarFeatures calendar_of(std::int64_t epoch_s) {
  const std::int64_t days = floor_div(epoch_s, kSecondsPerDay);
  const std::int64_t sod = floor_mod(epoch_s, kSecondsPerDay);
  CalendarFeatures f;
  f.hour_of_day = static_cast<int>(sod / 3600);
  f.day_of_week = static_cast<int>(floor_mod(days + 3, 7));  // 1970-01-01 was a Thursday
  const CivilDate date = civil_from_days(days);
  f.day_of_year = static_cast<int>(days - days_from_civil({date.year, 1, 1})) + 1;
  f.is_weekend = f.day_of_week >= 5;
  return f;
}

std::string to_string(ValueKind kind) {
  return kind == ValueKind::EnergyWh ? "wh" : "kw";
}

ValueKind value_kind_from_string(const std::string& text) {
  if (text == "wh" || text == "Wh" || text == "energy_wh") return ValueKind::EnergyWh;
  if (text == "kw" || text == "kW" || text == "power_kw") return ValueKind::PowerKw;
  throw std::invalid_argument("unknown value kind '" + text + "' (expected 'wh' or 'kw')");
}

Eigen::Index HourlySeries::missing_load_count() const {
  return (load_kw.array().isNaN()).count();
}

Eigen::Index HourlySeries::missing_temperature_count() const {
  return (temperature_c.array().isNaN()).count();
}

HourlySeries HourlySeries::slice(Eigen::Index offset, Eigen::Index length) const {
  if (offset < 0 || length < 0 || offset + length > size())
    throw std::out_of_range("HourlySeries::slice out of range");
  HourlySeries out;
  out.start = timestamp_at(offset);
  out.load_kw = load_kw.segment(offset, length);
  out.temperature_c = temperature_c.segment(offset, length);
  out.coverage = coverage.segment(offset, length);
  return out;
}

HourlySeries resample_to_hourly(const std::vector<RawRecord>& records,
                                const ResamplePolicy& policy) {
  if (records.empty()) throw std::invalid_argument("resample_to_hourly: no records");
  if (policy.records_per_hour < 1)
    throw std::invalid_argument("resample_to_hourly: records_per_hour must be >= 1");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].kind != policy.kind)
      throw std::invalid_argument("resample_to_hourly: record value tag does not match policy");
    if (i > 0 && records[i].timestamp <= records[i - 1].timestamp)
      throw std::invalid_argument("resample_to_hourly: timestamps must be strictly increasing");
  }

  const std::int64_t first_hour = floor_div(records.front().timestamp, kSecondsPerHour);
  const std::int64_t last_hour = floor_div(records.back().timestamp, kSecondsPerHour);
  const Eigen::Index n = static_cast<Eigen::Index>(last_hour - first_hour + 1);

  HourlySeries out;
  out.start = first_hour * kSecondsPerHour;
  out.load_kw = Eigen::VectorXd::Constant(n, missing_value());
  out.temperature_c = Eigen::VectorXd::Constant(n, missing_value());
  out.coverage = Eigen::VectorXd::Zero(n);

  Eigen::VectorXd load_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXi load_count = Eigen::VectorXi::Zero(n);
  Eigen::VectorXd temp_sum = Eigen::VectorXd::Zero(n);
  Eigen::VectorXi temp_count = Eigen::VectorXi::Zero(n);

  for (const RawRecord& r : records) {
    const Eigen::Index h =
        static_cast<Eigen::Index>(floor_div(r.timestamp, kSecondsPerHour) - first_hour);
    if (r.value) {
      load_sum[h] += *r.value;
      ++load_count[h];
    }
    if (r.temperature_c) {
      temp_sum[h] += *r.temperature_c;
      ++temp_count[h];
    }
  }

  for (Eigen::Index h = 0; h < n; ++h) {
    if (load_count[h] > 0) {
      // Summed Wh over one hour equals Wh/1000 kWh, numerically the average kW.
      out.load_kw[h] = policy.kind == ValueKind::EnergyWh ? load_sum[h] / 1000.0
                                                          : load_sum[h] / load_count[h];
      out.coverage[h] =
          std::min(1.0, static_cast<double>(load_count[h]) / policy.records_per_hour);
    }
    if (temp_count[h] > 0) out.temperature_c[h] = temp_sum[h] / temp_count[h];
  }
  return out;
}

}  // namespace loadcast
