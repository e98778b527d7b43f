#include "loadcast/plot.hpp"

#include "loadcast/time_series.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace loadcast {

namespace {

constexpr double kWidth = 960.0, kHeight = 420.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string polyline(const std::vector<std::int64_t>& ts,
                     const Eigen::Ref<const Eigen::VectorXd>& values, double y_min, double y_max,
                     const char* color) {
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double span = y_max > y_min ? y_max - y_min : 1.0;
  std::string points;
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    const double x = kLeft + plot_w * static_cast<double>(i) /
                                 std::max<double>(1.0, static_cast<double>(values.size() - 1));
    const double y = kTop + plot_h * (1.0 - (values[i] - y_min) / span);
    points += fmt(x) + "," + fmt(y) + " ";
  }
  (void)ts;
  return "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
         "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
}

}  // namespace

void write_overlay_svg(const std::filesystem::path& path, const std::string& title,
                       const std::vector<std::int64_t>& timestamps,
                       const Eigen::Ref<const Eigen::VectorXd>& actual,
                       const Eigen::Ref<const Eigen::VectorXd>& predicted,
                       const std::string& model_label) {
  if (actual.size() != predicted.size() ||
      actual.size() != static_cast<Eigen::Index>(timestamps.size()))
    throw std::invalid_argument("write_overlay_svg: series must align");
  if (actual.size() == 0) throw std::invalid_argument("write_overlay_svg: empty series");

  double y_min = std::min(actual.minCoeff(), predicted.minCoeff());
  double y_max = std::max(actual.maxCoeff(), predicted.maxCoeff());
  const double pad = 0.05 * std::max(1e-9, y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "  <text x=\"" << kLeft << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">"
      << title << "</text>\n";

  // axes
  out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n";
  out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";

  // y ticks
  for (int i = 0; i <= 4; ++i) {
    const double v = y_min + (y_max - y_min) * i / 4.0;
    const double y = kTop + plot_h * (1.0 - static_cast<double>(i) / 4.0);
    out << "  <text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(v)
        << "</text>\n";
    out << "  <line x1=\"" << kLeft - 4 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
  }

  // x ticks: hour offsets from the window start
  const int n = static_cast<int>(actual.size());
  const int tick_step = n > 48 ? 48 : 4;
  for (int i = 0; i < n; i += tick_step) {
    const double x = kLeft + plot_w * static_cast<double>(i) / std::max(1, n - 1);
    out << "  <line x1=\"" << fmt(x) << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << fmt(x)
        << "\" y2=\"" << kTop + plot_h + 4 << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << fmt(x) << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << i
        << "</text>\n";
  }
  out << "  <text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">hours from "
      << format_rfc3339(timestamps.front()) << "</text>\n";
  out << "  <text x=\"18\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 "
      << kTop + plot_h / 2 << ")\">load (kW)</text>\n";

  out << polyline(timestamps, actual, y_min, y_max, "#1f77b4");
  out << polyline(timestamps, predicted, y_min, y_max, "#d62728");

  // legend
  out << "  <line x1=\"" << kLeft + plot_w - 180 << "\" y1=\"18\" x2=\"" << kLeft + plot_w - 160
      << "\" y2=\"18\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  out << "  <text x=\"" << kLeft + plot_w - 154
      << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"12\">actual</text>\n";
  out << "  <line x1=\"" << kLeft + plot_w - 100 << "\" y1=\"18\" x2=\"" << kLeft + plot_w - 80
      << "\" y2=\"18\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  out << "  <text x=\"" << kLeft + plot_w - 74
      << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"12\">" << model_label << "</text>\n";
  out << "</svg>\n";
}

std::vector<std::filesystem::path> export_plots(const std::filesystem::path& dir,
                                                const std::string& scenario,
                                                const std::string& model,
                                                const std::vector<std::int64_t>& timestamps,
                                                const Eigen::Ref<const Eigen::VectorXd>& actual,
                                                const Eigen::Ref<const Eigen::VectorXd>& predicted,
                                                std::vector<std::string>& warnings) {
  std::vector<std::filesystem::path> written;
  if (predicted.size() == 0) {
    warnings.push_back("plots: no predictions for " + scenario + "/" + model + ", skipped");
    return written;
  }
  std::filesystem::create_directories(dir);
  const struct {
    const char* suffix;
    Eigen::Index hours;
    const char* label;
  } windows[] = {{"2w", 336, "two weeks"}, {"1d", 24, "one day"}};
  for (const auto& w : windows) {
    Eigen::Index span = w.hours;
    if (span > actual.size()) {
      warnings.push_back("plots: " + scenario + "/" + model + " " + w.label + " window clipped to " +
                         std::to_string(actual.size()) + " h");
      span = actual.size();
    }
    const std::filesystem::path path = dir / (scenario + "_" + model + "_" + w.suffix + ".svg");
    const std::vector<std::int64_t> ts(timestamps.begin(), timestamps.begin() + span);
    write_overlay_svg(path, scenario + " / " + model + " (" + w.label + ")", ts, actual.head(span),
                      predicted.head(span), model);
    written.push_back(path);
  }
  return written;
}

}  // namespace loadcast
