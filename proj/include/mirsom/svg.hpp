#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "mirsom/analysis.hpp"
#include "mirsom/som.hpp"

namespace mirsom {
namespace svg_detail {

inline std::string num(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

// Dark-blue -> teal -> yellow ramp; t in [0, 1].
inline std::string ramp_color(double t) {
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(std::lrint(t < 0.5 ? 40.0 + 60.0 * (t * 2.0) : 100.0 + 153.0 * (t * 2.0 - 1.0)));
    const int g = static_cast<int>(std::lrint(40.0 + 180.0 * t));
    const int b = static_cast<int>(std::lrint(100.0 + 80.0 * (1.0 - t) - 60.0 * t));
    char buf[16];
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

inline const std::array<const char*, 8>& group_palette() {
    static const std::array<const char*, 8> colors = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                                                      "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    return colors;
}

inline std::string esc(const std::string& s) {
    std::string out;
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace svg_detail

// Lattice heatmap with optional group-labeled placement markers. Cell color
// scales linearly between the value extremes.
inline std::string svg_heatmap(std::size_t rows, std::size_t cols, const std::vector<double>& values,
                               const std::vector<Placement>& placements,
                               const std::map<std::string, std::string>& group_of,
                               const std::string& title) {
    using svg_detail::esc;
    using svg_detail::num;
    const double cell = 26.0, margin = 46.0;
    const double width = margin * 2 + cell * static_cast<double>(cols);
    const double height = margin * 2 + cell * static_cast<double>(rows) + 20.0;

    double lo = values.empty() ? 0.0 : values[0], hi = lo;
    for (double v : values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    std::map<std::string, std::size_t> group_index;
    for (const auto& p : placements) {
        auto it = group_of.find(p.id);
        const std::string g = it != group_of.end() ? it->second : "?";
        group_index.emplace(g, group_index.size());
    }

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
           num(height, 0) + "\" font-family=\"monospace\" font-size=\"11\">\n";
    out += "<text x=\"" + num(margin) + "\" y=\"20\">" + esc(title) + "</text>\n";
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) {
            const double t = (values[r * cols + c] - lo) / span;
            out += "<rect x=\"" + num(margin + cell * static_cast<double>(c)) + "\" y=\"" +
                   num(margin + cell * static_cast<double>(r)) + "\" width=\"" + num(cell) +
                   "\" height=\"" + num(cell) + "\" fill=\"" + svg_detail::ramp_color(t) + "\"/>\n";
        }

    std::map<std::pair<std::size_t, std::size_t>, int> occupancy;
    for (const auto& p : placements) {
        auto it = group_of.find(p.id);
        const std::string g = it != group_of.end() ? it->second : "?";
        const std::size_t gi = group_index[g] % svg_detail::group_palette().size();
        const int slot = occupancy[{p.row, p.col}]++;
        // Fan out multiple markers on one neuron so none is hidden.
        const double off = 4.0 * static_cast<double>(slot % 3) - 4.0;
        const double cx = margin + cell * (static_cast<double>(p.col) + 0.5) + off;
        const double cy = margin + cell * (static_cast<double>(p.row) + 0.5) +
                          4.0 * static_cast<double>(slot / 3);
        out += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"4\" fill=\"" +
               svg_detail::group_palette()[gi] + "\" stroke=\"white\" stroke-width=\"0.8\"/>\n";
    }

    double legend_x = margin;
    const double legend_y = margin + cell * static_cast<double>(rows) + 16.0;
    for (const auto& [g, gi] : group_index) {
        out += "<circle cx=\"" + num(legend_x + 5.0) + "\" cy=\"" + num(legend_y - 4.0) +
               "\" r=\"4\" fill=\"" +
               svg_detail::group_palette()[gi % svg_detail::group_palette().size()] + "\"/>\n";
        out += "<text x=\"" + num(legend_x + 13.0) + "\" y=\"" + num(legend_y) + "\">" + esc(g) +
               "</text>\n";
        legend_x += 13.0 + 8.0 * static_cast<double>(g.size()) + 18.0;
    }
    out += "</svg>\n";
    return out;
}

// Difference-profile line plot: delta in black, per-side std profiles in
// light strokes. Bin 0 is skipped unless the profile says otherwise.
inline std::string svg_diff_profile(const DifferenceProfile& prof, const std::string& title) {
    using svg_detail::num;
    const double margin = 50.0, plot_w = 720.0, plot_h = 240.0;
    const double width = margin * 2 + plot_w, height = margin * 2 + plot_h + 20.0;
    const std::size_t first = prof.omit_fundamental ? 1 : 0;
    const std::size_t n = prof.delta.size();

    double lo = 0.0, hi = 0.0;
    for (std::size_t k = first; k < n; ++k) {
        lo = std::min({lo, prof.delta[k], -prof.std_lower[k]});
        hi = std::max({hi, prof.delta[k], prof.std_upper[k]});
    }
    const double span = hi > lo ? hi - lo : 1.0;
    auto X = [&](std::size_t k) {
        return margin + plot_w * static_cast<double>(k - first) / static_cast<double>(n - first - 1);
    };
    auto Y = [&](double v) { return margin + plot_h * (1.0 - (v - lo) / span); };

    auto polyline = [&](auto value_at, const char* stroke, const char* extra) {
        std::string pts;
        for (std::size_t k = first; k < n; ++k) {
            pts += num(X(k)) + "," + num(Y(value_at(k)));
            if (k + 1 < n) pts += " ";
        }
        return "<polyline fill=\"none\" stroke=\"" + std::string(stroke) + "\" " + extra +
               " points=\"" + pts + "\"/>\n";
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
           num(height, 0) + "\" font-family=\"monospace\" font-size=\"11\">\n";
    out += "<text x=\"" + num(margin) + "\" y=\"20\">" + svg_detail::esc(title) + "</text>\n";
    out += "<line x1=\"" + num(margin) + "\" y1=\"" + num(Y(0.0)) + "\" x2=\"" +
           num(margin + plot_w) + "\" y2=\"" + num(Y(0.0)) + "\" stroke=\"#cccccc\"/>\n";
    for (std::size_t cent = 0; cent <= 1200; cent += 200) {
        if (cent < first) continue;
        const double x = X(cent);
        out += "<line x1=\"" + num(x) + "\" y1=\"" + num(margin + plot_h) + "\" x2=\"" + num(x) +
               "\" y2=\"" + num(margin + plot_h + 5.0) + "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + num(x - 12.0) + "\" y=\"" + num(margin + plot_h + 18.0) + "\">" +
               std::to_string(cent) + "</text>\n";
    }
    out += polyline([&](std::size_t k) { return prof.std_upper[k]; }, "#9ecae1", "stroke-width=\"0.6\"");
    out += polyline([&](std::size_t k) { return -prof.std_lower[k]; }, "#fdae6b", "stroke-width=\"0.6\"");
    out += polyline([&](std::size_t k) { return prof.delta[k]; }, "black", "stroke-width=\"1.2\"");
    out += "</svg>\n";
    return out;
}

// Per-neuron miniature bar charts: bars ordered by importance rank left to
// right, bar height = strength of that feature at the BMU.
inline std::string svg_importance_grid(const SomGrid& grid,
                                       const std::vector<std::pair<Placement, std::vector<FeatureImportance>>>& panels,
                                       const std::string& title) {
    using svg_detail::num;
    const double cell = 40.0, margin = 46.0;
    const double width = margin * 2 + cell * static_cast<double>(grid.cols);
    const double height = margin * 2 + cell * static_cast<double>(grid.rows);

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width, 0) + "\" height=\"" +
           num(height, 0) + "\" font-family=\"monospace\" font-size=\"10\">\n";
    out += "<text x=\"" + num(margin) + "\" y=\"20\">" + svg_detail::esc(title) + "</text>\n";
    for (std::size_t r = 0; r < grid.rows; ++r)
        for (std::size_t c = 0; c < grid.cols; ++c)
            out += "<rect x=\"" + num(margin + cell * static_cast<double>(c)) + "\" y=\"" +
                   num(margin + cell * static_cast<double>(r)) + "\" width=\"" + num(cell) +
                   "\" height=\"" + num(cell) + "\" fill=\"none\" stroke=\"#dddddd\"/>\n";

    for (const auto& [placement, ranking] : panels) {
        const double x0 = margin + cell * static_cast<double>(placement.col) + 3.0;
        const double y0 = margin + cell * static_cast<double>(placement.row) + cell - 4.0;
        const double bar_w = (cell - 6.0) / static_cast<double>(ranking.size());
        for (std::size_t i = 0; i < ranking.size(); ++i) {
            const double h = std::clamp(ranking[i].strength, 0.0, 1.0) * (cell - 10.0);
            out += "<rect x=\"" + num(x0 + bar_w * static_cast<double>(i)) + "\" y=\"" +
                   num(y0 - h) + "\" width=\"" + num(bar_w * 0.8) + "\" height=\"" + num(h) +
                   "\" fill=\"#3b6ea5\"/>\n";
        }
    }
    out += "</svg>\n";
    return out;
}

}  // namespace mirsom
