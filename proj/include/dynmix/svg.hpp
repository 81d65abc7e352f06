#ifndef DYNMIX_SVG_HPP
#define DYNMIX_SVG_HPP

#include <filesystem>
#include <string>

#include "dynmix/matrix.hpp"

namespace dynmix {

/// Renders a matrix as an SVG heatmap with a diverging blue-white-red color
/// map, symmetric around zero, plus a labeled legend. Purely a viewing aid;
/// the CSV exports are the authoritative artifacts.
void write_heatmap_svg(const Matrix& m, const std::string& title,
                       const std::filesystem::path& path);

[[nodiscard]] std::string heatmap_svg(const Matrix& m, const std::string& title);

}  // namespace dynmix

#endif
