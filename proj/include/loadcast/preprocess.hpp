#pragma once

#include "loadcast/time_series.hpp"

#include <map>
#include <string>
#include <vector>

namespace loadcast {

enum class OutlierReplacement { TreatAsMissing, DatasetMedian };

struct OutlierPolicy {
  double z_threshold = 3.0;
  OutlierReplacement replacement = OutlierReplacement::DatasetMedian;
  void validate() const;
};

/// Global z-score flags over the non-missing load values. A zero-variance
/// series flags nothing; an all-missing series is rejected.
std::vector<bool> detect_outliers(const HourlySeries& series, const OutlierPolicy& policy);

/// Flagged entries become NaN or the dataset median per policy; everything
/// else is bitwise unchanged.
HourlySeries replace_outliers(const HourlySeries& series, const std::vector<bool>& mask,
                              const OutlierPolicy& policy);

struct ImputeStats {
  Eigen::Index load_short_filled = 0;  // previous-hour fills
  Eigen::Index load_long_filled = 0;   // same-hour-previous-week fills (incl. fallbacks)
  Eigen::Index temperature_filled = 0;
};

/// Fills load gaps: runs of <= short_gap_max hours carry the previous hour
/// forward; longer runs take the value at t - 168 h, falling back to the
/// previous hour. Temperature follows the same rules (an all-missing
/// temperature column passes through untouched). A gap with no previous hour
/// to chain from is rejected with the index of the first unfillable hour.
HourlySeries impute(const HourlySeries& series, int short_gap_max, ImputeStats* stats = nullptr);

struct SeasonRange {
  std::string name;
  CivilDate start_date;  // inclusive
  CivilDate end_date;    // inclusive
  void validate() const;
};

/// One independent slice per range; hours qualify by UTC calendar date.
/// Ranges that miss the series entirely yield empty slices.
std::map<std::string, HourlySeries> split_seasons(const HourlySeries& series,
                                                  const std::vector<SeasonRange>& ranges);

}  // namespace loadcast
