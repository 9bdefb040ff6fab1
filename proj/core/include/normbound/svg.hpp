#ifndef NORMBOUND_SVG_HPP
#define NORMBOUND_SVG_HPP

#include <string>
#include <vector>

namespace normbound {

// Deterministic line charts on a fixed 960x540 canvas: 60px left margin,
// 20px right, 30px top, 40px bottom; five ticks per axis. Non-finite points
// split their polyline. Byte-identical output for identical input.
struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<SvgSeries>& series);

} // namespace normbound

#endif
