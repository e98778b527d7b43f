#include "loadcast/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace loadcast {

namespace {

constexpr const char* kHeader = "timestamp,load,temperature";

std::optional<double> parse_cell(const std::string& cell, const std::filesystem::path& path,
                                 std::size_t line_no) {
  if (cell.empty()) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                             ": bad numeric cell '" + cell + "'");
  return value;
}

std::string format_cell(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::vector<RawRecord> read_records_csv(const std::filesystem::path& path, ValueKind kind) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader)
    throw std::runtime_error(path.string() + ": expected header '" + kHeader + "', got '" + line +
                             "'");

  std::vector<RawRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != 3)
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected 3 cells, got " + std::to_string(cells.size()));
    RawRecord r;
    r.timestamp = parse_rfc3339(cells[0]);
    r.value = parse_cell(cells[1], path, line_no);
    r.temperature_c = parse_cell(cells[2], path, line_no);
    r.kind = kind;
    records.push_back(r);
  }
  return records;
}

void write_records_csv(const std::filesystem::path& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << kHeader << '\n';
  for (const RawRecord& r : records) {
    out << format_rfc3339(r.timestamp) << ',';
    if (r.value) out << format_cell(*r.value);
    out << ',';
    if (r.temperature_c) out << format_cell(*r.temperature_c);
    out << '\n';
  }
}

void write_hourly_csv(const std::filesystem::path& path, const HourlySeries& series) {
  std::vector<RawRecord> records(static_cast<std::size_t>(series.size()));
  for (Eigen::Index i = 0; i < series.size(); ++i) {
    RawRecord& r = records[static_cast<std::size_t>(i)];
    r.timestamp = series.timestamp_at(i);
    r.kind = ValueKind::PowerKw;
    if (!is_missing(series.load_kw[i])) r.value = series.load_kw[i];
    if (!is_missing(series.temperature_c[i])) r.temperature_c = series.temperature_c[i];
  }
  write_records_csv(path, records);
}

HourlySeries read_hourly_csv(const std::filesystem::path& path) {
  auto records = read_records_csv(path, ValueKind::PowerKw);
  if (records.empty()) throw std::runtime_error(path.string() + ": no rows");
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].timestamp % kSecondsPerHour != 0)
      throw std::runtime_error(path.string() + ": timestamps must be hour-aligned");
    if (i > 0 && records[i].timestamp != records[i - 1].timestamp + kSecondsPerHour)
      throw std::runtime_error(path.string() + ": hourly rows must be consecutive");
  }
  HourlySeries out;
  out.start = records.front().timestamp;
  const Eigen::Index n = static_cast<Eigen::Index>(records.size());
  out.load_kw = Eigen::VectorXd::Constant(n, missing_value());
  out.temperature_c = Eigen::VectorXd::Constant(n, missing_value());
  out.coverage = Eigen::VectorXd::Ones(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const RawRecord& r = records[static_cast<std::size_t>(i)];
    if (r.value) out.load_kw[i] = *r.value;
    if (r.temperature_c) out.temperature_c[i] = *r.temperature_c;
    if (!r.value) out.coverage[i] = 0.0;
  }
  return out;
}

}  // namespace loadcast
