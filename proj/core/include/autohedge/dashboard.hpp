#pragma once

#include <filesystem>
#include <string>

#include "autohedge/episode_io.hpp"

namespace autohedge {

// Four stacked panels: prices, positions, PNL components, reward.
std::string render_dashboard_svg(const EpisodeTable& table, const std::string& title);
void write_dashboard_svg(const EpisodeTable& table, const std::filesystem::path& path,
                         const std::string& title);

}  // namespace autohedge
