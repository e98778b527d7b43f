#pragma once

#include "loadcast/time_series.hpp"

#include <filesystem>
#include <vector>

namespace loadcast {

/// Reads `timestamp,load,temperature` rows (RFC 3339 timestamps, empty cells
/// for missing values). The load unit comes from the caller, never inferred.
std::vector<RawRecord> read_records_csv(const std::filesystem::path& path, ValueKind kind);

void write_records_csv(const std::filesystem::path& path, const std::vector<RawRecord>& records);

/// Hourly series exported with the same schema; load is always kW.
void write_hourly_csv(const std::filesystem::path& path, const HourlySeries& series);
HourlySeries read_hourly_csv(const std::filesystem::path& path);

}  // namespace loadcast
