#include "normbound/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace normbound {

namespace {

constexpr double kWidth = 960;
constexpr double kHeight = 540;
constexpr double kLeft = 60;
constexpr double kRight = 20;
constexpr double kTop = 30;
constexpr double kBottom = 40;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string px(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = 0;
    double hi = 1;
};

Range finite_range(const std::vector<SvgSeries>& series, bool use_x) {
    Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : series) {
        const auto& v = use_x ? s.x : s.y;
        for (double p : v) {
            if (!std::isfinite(p)) continue;
            r.lo = std::min(r.lo, p);
            r.hi = std::max(r.hi, p);
        }
    }
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) return {0, 1};
    if (r.lo == r.hi) {
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    return r;
}

} // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label,
                              const std::vector<SvgSeries>& series) {
    const Range rx = finite_range(series, true);
    const Range ry = finite_range(series, false);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double v) { return kLeft + (v - rx.lo) / (rx.hi - rx.lo) * plot_w; };
    auto sy = [&](double v) { return kTop + plot_h - (v - ry.lo) / (ry.hi - ry.lo) * plot_h; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"540\" "
           "viewBox=\"0 0 960 540\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"960\" height=\"540\" fill=\"white\"/>\n";
    out += "<text x=\"480\" y=\"20\" text-anchor=\"middle\" font-family=\"monospace\" "
           "font-size=\"14\">" + title + "</text>\n";

    // axes
    out += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop) + "\" x2=\"" + px(kLeft) +
           "\" y2=\"" + px(kTop + plot_h) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + px(kLeft) + "\" y1=\"" + px(kTop + plot_h) + "\" x2=\"" +
           px(kLeft + plot_w) + "\" y2=\"" + px(kTop + plot_h) + "\" stroke=\"black\"/>\n";

    for (int t = 0; t <= 4; ++t) {
        const double fx = rx.lo + (rx.hi - rx.lo) * t / 4.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * t / 4.0;
        const double gx = sx(fx);
        const double gy = sy(fy);
        out += "<line x1=\"" + px(gx) + "\" y1=\"" + px(kTop + plot_h) + "\" x2=\"" + px(gx) +
               "\" y2=\"" + px(kTop + plot_h + 5) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + px(gx) + "\" y=\"" + px(kTop + plot_h + 18) +
               "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" +
               tick_label(fx) + "</text>\n";
        out += "<line x1=\"" + px(kLeft - 5) + "\" y1=\"" + px(gy) + "\" x2=\"" + px(kLeft) +
               "\" y2=\"" + px(gy) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(gy + 3) +
               "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">" +
               tick_label(fy) + "</text>\n";
    }

    out += "<text x=\"" + px(kLeft + plot_w / 2) + "\" y=\"" + px(kHeight - 6) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" + x_label +
           "</text>\n";
    out += "<text x=\"14\" y=\"" + px(kTop + plot_h / 2) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\" "
           "transform=\"rotate(-90 14 " + px(kTop + plot_h / 2) + ")\">" + y_label +
           "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string points;
        auto flush = [&]() {
            if (!points.empty()) {
                out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                       "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
                points.clear();
            }
        };
        for (std::size_t p = 0; p < s.x.size(); ++p) {
            if (!std::isfinite(s.x[p]) || !std::isfinite(s.y[p])) {
                flush();
                continue;
            }
            if (!points.empty()) points.push_back(' ');
            points += px(sx(s.x[p])) + "," + px(sy(s.y[p]));
        }
        flush();
        // legend row
        const double ly = kTop + 14.0 * static_cast<double>(i) + 8.0;
        out += "<rect x=\"" + px(kLeft + plot_w - 150) + "\" y=\"" + px(ly - 7) +
               "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        out += "<text x=\"" + px(kLeft + plot_w - 136) + "\" y=\"" + px(ly + 2) +
               "\" font-family=\"monospace\" font-size=\"10\">" + s.label + "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

} // namespace normbound
