#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace loadcast {

/// Actual-vs-predicted overlay as a standalone SVG (hours on x, kW on y).
void write_overlay_svg(const std::filesystem::path& path, const std::string& title,
                       const std::vector<std::int64_t>& timestamps,
                       const Eigen::Ref<const Eigen::VectorXd>& actual,
                       const Eigen::Ref<const Eigen::VectorXd>& predicted,
                       const std::string& model_label);

/// One two-week (336 h) and one single-day (24 h) overlay per model, windows
/// anchored at the start of the prediction range. Windows longer than the
/// data are clipped with a warning; an empty prediction set emits nothing.
std::vector<std::filesystem::path> export_plots(const std::filesystem::path& dir,
                                                const std::string& scenario,
                                                const std::string& model,
                                                const std::vector<std::int64_t>& timestamps,
                                                const Eigen::Ref<const Eigen::VectorXd>& actual,
                                                const Eigen::Ref<const Eigen::VectorXd>& predicted,
                                                std::vector<std::string>& warnings);

}  // namespace loadcast
