#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "mirsom/common.hpp"
#include "mirsom/som.hpp"

namespace mirsom {

struct NormalizationRecord {
    std::vector<double> means;
    std::vector<double> stds;               // population std per dimension
    std::vector<std::uint8_t> zero_variance;  // flagged dimensions map to all-zeros
};

inline std::vector<double> apply_normalization(std::span<const double> v,
                                               const NormalizationRecord& rec) {
    if (v.size() != rec.means.size())
        throw ValidationError("apply_normalization: dimension mismatch");
    std::vector<double> out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        out[k] = rec.zero_variance[k] ? 0.0 : (v[k] - rec.means[k]) / rec.stds[k];
    return out;
}

// Per-dimension z-scoring across the corpus. The record is persisted so new
// pieces can be projected onto an existing map with the same transform.
inline std::pair<std::vector<std::vector<double>>, NormalizationRecord> normalize_features(
    const std::vector<std::vector<double>>& corpus) {
    if (corpus.size() < 2) throw DataError("normalization needs at least 2 pieces");
    const std::size_t dim = corpus[0].size();
    for (const auto& v : corpus)
        if (v.size() != dim) throw ValidationError("normalize_features: ragged corpus");

    NormalizationRecord rec;
    rec.means.assign(dim, 0.0);
    rec.stds.assign(dim, 1.0);
    rec.zero_variance.assign(dim, 0);
    std::vector<double> column(corpus.size());
    for (std::size_t k = 0; k < dim; ++k) {
        for (std::size_t p = 0; p < corpus.size(); ++p) column[p] = corpus[p][k];
        rec.means[k] = mean_of(column);
        const double sd = pop_std_of(column);
        if (sd > 0.0)
            rec.stds[k] = sd;
        else
            rec.zero_variance[k] = 1;
    }

    std::vector<std::vector<double>> normalized;
    normalized.reserve(corpus.size());
    for (const auto& v : corpus) normalized.push_back(apply_normalization(v, rec));
    return {std::move(normalized), std::move(rec)};
}

struct DifferenceProfile {
    std::vector<double> delta;      // upper-right mean minus lower-left mean, per bin
    std::vector<double> std_upper;
    std::vector<double> std_lower;
    bool omit_fundamental = true;   // bin 0 reported separately in displays
    std::size_t upper_count = 0;    // pieces (or neurons) contributing per side
    std::size_t lower_count = 0;
};

struct DiffOptions {
    bool swap_sides = false;        // flips which triangle the anti-diagonal row belongs to
    bool mean_over_neurons = false; // average neuron weights instead of piece histograms
    bool include_bin0 = false;
};

// Anti-diagonal split: neuron (r, c) is lower-left iff r + c >= rows - 1,
// so the diagonal itself counts as lower-left unless swapped.
inline bool is_lower_left(std::size_t r, std::size_t c, std::size_t rows, bool swap_sides = false) {
    const bool ll = r + c >= rows - 1;
    return swap_sides ? !ll : ll;
}

namespace analysis_detail {

struct SideAccum {
    std::vector<std::vector<double>> members;

    void add(std::span<const double> v) { members.emplace_back(v.begin(), v.end()); }

    void mean_std(std::vector<double>& mean, std::vector<double>& sd, std::size_t dim) const {
        mean.assign(dim, 0.0);
        sd.assign(dim, 0.0);
        if (members.empty()) return;
        for (const auto& v : members)
            for (std::size_t k = 0; k < dim; ++k) mean[k] += v[k];
        for (auto& m : mean) m /= static_cast<double>(members.size());
        for (const auto& v : members)
            for (std::size_t k = 0; k < dim; ++k) {
                const double d = v[k] - mean[k];
                sd[k] += d * d;
            }
        for (auto& s : sd) s = std::sqrt(s / static_cast<double>(members.size()));
    }
};

}  // namespace analysis_detail

// Mean tonal vector per triangle and their difference. Histograms keyed by
// piece id; each placed piece contributes to the side its neuron falls in.
inline DifferenceProfile triangular_split_diff(
    const SomGrid& grid, const std::vector<Placement>& placements,
    const std::map<std::string, std::vector<double>>& histograms, const DiffOptions& opt = {}) {
    analysis_detail::SideAccum upper, lower;
    const std::size_t dim = grid.dim;

    if (opt.mean_over_neurons) {
        for (std::size_t r = 0; r < grid.rows; ++r)
            for (std::size_t c = 0; c < grid.cols; ++c)
                (is_lower_left(r, c, grid.rows, opt.swap_sides) ? lower : upper)
                    .add(grid.weight(r, c));
    } else {
        for (const auto& p : placements) {
            auto it = histograms.find(p.id);
            if (it == histograms.end())
                throw ValidationError("triangular_split_diff: no histogram for piece " + p.id);
            if (it->second.size() != dim)
                throw ValidationError("triangular_split_diff: histogram length mismatch for " + p.id);
            (is_lower_left(p.row, p.col, grid.rows, opt.swap_sides) ? lower : upper).add(it->second);
        }
    }

    if (upper.members.empty()) throw DataError("upper-right triangle holds no pieces");
    if (lower.members.empty()) throw DataError("lower-left triangle holds no pieces");

    DifferenceProfile prof;
    prof.omit_fundamental = !opt.include_bin0;
    prof.upper_count = upper.members.size();
    prof.lower_count = lower.members.size();
    std::vector<double> mean_u, mean_l;
    upper.mean_std(mean_u, prof.std_upper, dim);
    lower.mean_std(mean_l, prof.std_lower, dim);
    prof.delta.resize(dim);
    for (std::size_t k = 0; k < dim; ++k) prof.delta[k] = mean_u[k] - mean_l[k];
    return prof;
}

struct GroupStat {
    std::string group;
    double centroid_row = 0.0;
    double centroid_col = 0.0;
    std::size_t count = 0;
};

struct SeparationReport {
    std::vector<GroupStat> groups;
    double mean_intra = 0.0;  // mean lattice distance within groups
    double mean_inter = 0.0;  // mean lattice distance across groups
    double purity = 0.0;
    bool degenerate = false;  // all pieces on one neuron
    // Boundary diagnostics (filled for exactly 2 groups): u-matrix maximum on
    // the straight lattice path between the group centroids, versus the median
    // u-value over neurons that hold at least one piece.
    bool boundary_defined = false;
    double boundary_max_u = 0.0;
    double occupied_median_u = 0.0;
    double boundary_ratio = 0.0;
};

namespace analysis_detail {

inline double lattice_dist(const Placement& a, const Placement& b) {
    const double dr = static_cast<double>(a.row) - static_cast<double>(b.row);
    const double dc = static_cast<double>(a.col) - static_cast<double>(b.col);
    return std::sqrt(dr * dr + dc * dc);
}

// Integer lattice cells along the segment between two cells (Bresenham).
inline std::vector<std::pair<long long, long long>> lattice_line(long long r0, long long c0,
                                                                 long long r1, long long c1) {
    std::vector<std::pair<long long, long long>> cells;
    const long long dr = std::llabs(r1 - r0), dc = std::llabs(c1 - c0);
    const long long sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
    long long err = (dr > dc ? dr : -dc) / 2;
    long long r = r0, c = c0;
    while (true) {
        cells.emplace_back(r, c);
        if (r == r1 && c == c1) break;
        const long long e2 = err;
        if (e2 > -dr) {
            err -= dc;
            r += sr;
        }
        if (e2 < dc) {
            err += dr;
            c += sc;
        }
    }
    return cells;
}

}  // namespace analysis_detail

inline SeparationReport separation_report(const std::vector<Placement>& placements,
                                          const std::map<std::string, std::string>& group_of,
                                          const UMatrix& um) {
    std::map<std::string, GroupStat> stats;
    std::vector<std::string> labels(placements.size());
    for (std::size_t i = 0; i < placements.size(); ++i) {
        auto it = group_of.find(placements[i].id);
        if (it == group_of.end())
            throw ValidationError("separation_report: no group label for piece " + placements[i].id);
        labels[i] = it->second;
        auto& g = stats[it->second];
        g.group = it->second;
        g.centroid_row += static_cast<double>(placements[i].row);
        g.centroid_col += static_cast<double>(placements[i].col);
        ++g.count;
    }
    if (stats.size() < 2) throw DataError("separation needs at least 2 groups, got " +
                                          std::to_string(stats.size()));

    SeparationReport rep;
    for (auto& [name, g] : stats) {
        g.centroid_row /= static_cast<double>(g.count);
        g.centroid_col /= static_cast<double>(g.count);
        rep.groups.push_back(g);
    }

    double intra_sum = 0.0, inter_sum = 0.0;
    std::size_t intra_n = 0, inter_n = 0;
    std::size_t pure = 0;
    bool any_spread = false;
    for (std::size_t i = 0; i < placements.size(); ++i) {
        double nearest_same = std::numeric_limits<double>::infinity();
        double nearest_diff = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < placements.size(); ++j) {
            if (j == i) continue;
            const double d = analysis_detail::lattice_dist(placements[i], placements[j]);
            if (d > 0.0) any_spread = true;
            if (labels[i] == labels[j]) {
                nearest_same = std::min(nearest_same, d);
                if (j > i) {
                    intra_sum += d;
                    ++intra_n;
                }
            } else {
                nearest_diff = std::min(nearest_diff, d);
                if (j > i) {
                    inter_sum += d;
                    ++inter_n;
                }
            }
        }
        if (nearest_diff > nearest_same) ++pure;
    }
    rep.mean_intra = intra_n > 0 ? intra_sum / static_cast<double>(intra_n) : 0.0;
    rep.mean_inter = inter_n > 0 ? inter_sum / static_cast<double>(inter_n) : 0.0;
    rep.degenerate = !any_spread;
    rep.purity = rep.degenerate
                     ? 0.0
                     : static_cast<double>(pure) / static_cast<double>(placements.size());

    if (rep.groups.size() == 2 && um.rows > 0 && um.cols > 0) {
        const auto& a = rep.groups[0];
        const auto& b = rep.groups[1];
        const auto path = analysis_detail::lattice_line(
            std::llround(a.centroid_row), std::llround(a.centroid_col),
            std::llround(b.centroid_row), std::llround(b.centroid_col));
        double mx = 0.0;
        for (const auto& [r, c] : path)
            mx = std::max(mx, um.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c)));
        std::vector<double> occupied;
        for (const auto& p : placements) occupied.push_back(um.at(p.row, p.col));
        std::sort(occupied.begin(), occupied.end());
        const double med = occupied.empty()
                               ? 0.0
                               : (occupied.size() % 2 == 1
                                      ? occupied[occupied.size() / 2]
                                      : 0.5 * (occupied[occupied.size() / 2 - 1] +
                                               occupied[occupied.size() / 2]));
        rep.boundary_defined = true;
        rep.boundary_max_u = mx;
        rep.occupied_median_u = med;
        rep.boundary_ratio = med > 0.0 ? mx / med : std::numeric_limits<double>::infinity();
    }
    return rep;
}

}  // namespace mirsom
