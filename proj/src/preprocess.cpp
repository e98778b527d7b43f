#include "loadcast/preprocess.hpp"

#include <algorithm>
#include <stdexcept>

namespace loadcast {

void OutlierPolicy::validate() const {
  if (!(z_threshold > 0.0)) throw std::invalid_argument("OutlierPolicy: z_threshold must be > 0");
}

void SeasonRange::validate() const {
  if (days_from_civil(start_date) > days_from_civil(end_date))
    throw std::invalid_argument("SeasonRange '" + name + "': start_date after end_date");
}

std::vector<bool> detect_outliers(const HourlySeries& series, const OutlierPolicy& policy) {
  policy.validate();
  const Eigen::Index n = series.size();
  std::vector<bool> mask(static_cast<std::size_t>(n), false);

  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_missing(series.load_kw[i])) {
      sum += series.load_kw[i];
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("detect_outliers: all load values are missing");
  const double mean = sum / static_cast<double>(count);

  double sq = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!is_missing(series.load_kw[i])) sq += (series.load_kw[i] - mean) * (series.load_kw[i] - mean);
  const double std_dev = std::sqrt(sq / static_cast<double>(count));
  if (std_dev == 0.0) return mask;  // nothing can deviate

  for (Eigen::Index i = 0; i < n; ++i) {
    if (is_missing(series.load_kw[i])) continue;
    if (std::abs(series.load_kw[i] - mean) / std_dev > policy.z_threshold)
      mask[static_cast<std::size_t>(i)] = true;
  }
  return mask;
}

namespace {

double dataset_median(const Eigen::VectorXd& values) {
  std::vector<double> present;
  present.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index i = 0; i < values.size(); ++i)
    if (!is_missing(values[i])) present.push_back(values[i]);
  if (present.empty()) throw std::invalid_argument("median of an all-missing series");
  const std::size_t mid = present.size() / 2;
  std::nth_element(present.begin(), present.begin() + static_cast<std::ptrdiff_t>(mid),
                   present.end());
  if (present.size() % 2 == 1) return present[mid];
  const double hi = present[mid];
  const double lo = *std::max_element(present.begin(), present.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace

HourlySeries replace_outliers(const HourlySeries& series, const std::vector<bool>& mask,
                              const OutlierPolicy& policy) {
  if (mask.size() != static_cast<std::size_t>(series.size()))
    throw std::invalid_argument("replace_outliers: mask length does not match series");
  HourlySeries out = series;
  const bool any = std::find(mask.begin(), mask.end(), true) != mask.end();
  if (!any) return out;
  const double fill = policy.replacement == OutlierReplacement::DatasetMedian
                          ? dataset_median(series.load_kw)
                          : missing_value();
  for (Eigen::Index i = 0; i < out.size(); ++i)
    if (mask[static_cast<std::size_t>(i)]) out.load_kw[i] = fill;
  return out;
}

namespace {

// Shared by load and temperature: previous-hour carry for short runs,
// same-hour-previous-week for long runs (previous-hour fallback).
Eigen::Index impute_column(Eigen::VectorXd& values, int short_gap_max, const char* what) {
  Eigen::Index filled = 0;
  const Eigen::Index n = values.size();
  Eigen::Index i = 0;
  while (i < n) {
    if (!is_missing(values[i])) {
      ++i;
      continue;
    }
    Eigen::Index run_end = i;
    while (run_end + 1 < n && is_missing(values[run_end + 1])) ++run_end;
    const Eigen::Index run_len = run_end - i + 1;
    for (Eigen::Index j = i; j <= run_end; ++j) {
      if (run_len <= short_gap_max) {
        if (j == 0 || is_missing(values[j - 1]))
          throw std::invalid_argument(std::string("impute: ") + what +
                                      " gap with no previous hour at index " + std::to_string(j));
        values[j] = values[j - 1];
      } else if (j >= kHoursPerWeek && !is_missing(values[j - kHoursPerWeek])) {
        values[j] = values[j - kHoursPerWeek];
      } else if (j > 0 && !is_missing(values[j - 1])) {
        values[j] = values[j - 1];
      } else {
        throw std::invalid_argument(std::string("impute: ") + what +
                                    " gap with no previous hour at index " + std::to_string(j));
      }
      ++filled;
    }
    i = run_end + 1;
  }
  return filled;
}

}  // namespace

HourlySeries impute(const HourlySeries& series, int short_gap_max, ImputeStats* stats) {
  if (short_gap_max < 0) throw std::invalid_argument("impute: short_gap_max must be >= 0");
  HourlySeries out = series;
  ImputeStats local;

  // Count the split between short and long fills before mutating.
  {
    Eigen::Index i = 0;
    const Eigen::Index n = out.size();
    while (i < n) {
      if (!is_missing(out.load_kw[i])) {
        ++i;
        continue;
      }
      Eigen::Index run_end = i;
      while (run_end + 1 < n && is_missing(out.load_kw[run_end + 1])) ++run_end;
      const Eigen::Index run_len = run_end - i + 1;
      (run_len <= short_gap_max ? local.load_short_filled : local.load_long_filled) += run_len;
      i = run_end + 1;
    }
  }

  impute_column(out.load_kw, short_gap_max, "load");
  if ((out.temperature_c.array().isNaN()).count() < out.temperature_c.size())
    local.temperature_filled = impute_column(out.temperature_c, short_gap_max, "temperature");

  if (stats) *stats = local;
  return out;
}

std::map<std::string, HourlySeries> split_seasons(const HourlySeries& series,
                                                  const std::vector<SeasonRange>& ranges) {
  std::map<std::string, HourlySeries> out;
  for (const SeasonRange& range : ranges) {
    range.validate();
    const std::int64_t lo = days_from_civil(range.start_date) * kSecondsPerDay;
    const std::int64_t hi = (days_from_civil(range.end_date) + 1) * kSecondsPerDay;  // exclusive
    const std::int64_t series_lo = series.start;
    const std::int64_t series_hi = series.start + series.size() * kSecondsPerHour;
    const std::int64_t begin = std::max(lo, series_lo);
    const std::int64_t end = std::min(hi, series_hi);
    HourlySeries slice;
    if (begin < end) {
      const Eigen::Index offset = static_cast<Eigen::Index>((begin - series_lo) / kSecondsPerHour);
      const Eigen::Index length = static_cast<Eigen::Index>((end - begin) / kSecondsPerHour);
      slice = series.slice(offset, length);
    } else {
      slice.start = lo;
      slice.load_kw = Eigen::VectorXd(0);
      slice.temperature_c = Eigen::VectorXd(0);
      slice.coverage = Eigen::VectorXd(0);
    }
    out[range.name] = std::move(slice);
  }
  return out;
}

}  // namespace loadcast
