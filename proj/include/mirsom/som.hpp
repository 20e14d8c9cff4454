#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mirsom/common.hpp"

namespace mirsom {

struct Placement {
    std::string id;
    std::size_t row = 0;
    std::size_t col = 0;
    double correlation = 0.0;
};

struct UMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// Ricker wavelet: positive center, negative surround. The negative lobe is
// what makes this a Mexican hat rather than a Gaussian; far neurons are
// pushed away slightly during training.
inline double mexican_hat(double dist, double sigma) {
    const double q = (dist * dist) / (sigma * sigma);
    return (1.0 - q) * std::exp(-0.5 * q);
}

struct SomGrid {
    std::size_t rows = 0, cols = 0, dim = 0;
    std::vector<double> weights;  // row-major neurons, contiguous dim floats each
    std::uint64_t rng_seed = 0;
    std::size_t cycles_trained = 0;
    std::mt19937_64 rng;  // continues from init through training; not persisted

    std::span<double> weight(std::size_t r, std::size_t c) {
        return {weights.data() + (r * cols + c) * dim, dim};
    }
    std::span<const double> weight(std::size_t r, std::size_t c) const {
        return {weights.data() + (r * cols + c) * dim, dim};
    }
    std::size_t neuron_count() const { return rows * cols; }
};

struct TrainOptions {
    std::size_t cycles = 500;
    double alpha_start = 0.5;
    double alpha_end = 0.01;
    double sigma_end = 1.0;  // sigma starts at max(rows, cols)/2
};

inline SomGrid som_init(std::size_t rows, std::size_t cols, std::size_t dim, std::uint64_t seed) {
    if (rows == 0 || cols == 0 || dim == 0)
        throw ValidationError("som_init: rows, cols and dim must be positive");
    SomGrid g;
    g.rows = rows;
    g.cols = cols;
    g.dim = dim;
    g.rng_seed = seed;
    g.rng.seed(seed);
    g.weights.resize(rows * cols * dim);
    for (auto& w : g.weights) w = uniform01(g.rng);
    return g;
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
    const double n = static_cast<double>(a.size());
    double sa = 0.0, sb = 0.0, saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sa += a[i];
        sb += b[i];
        saa += a[i] * a[i];
        sbb += b[i] * b[i];
        sab += a[i] * b[i];
    }
    const double va = n * saa - sa * sa;
    const double vb = n * sbb - sb * sb;
    if (va <= 0.0 || vb <= 0.0) return 0.0;  // a constant side carries no correlation
    return std::clamp((n * sab - sa * sb) / std::sqrt(va * vb), -1.0, 1.0);
}

inline bool is_constant_vector(std::span<const double> v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[0]) return false;
    return true;
}

// Highest Pearson correlation over all neurons; ties go to the earliest
// neuron in row-major order.
inline Placement best_match(const SomGrid& grid, std::span<const double> v,
                            const std::string& id = "") {
    if (v.size() != grid.dim) throw ValidationError("best_match: vector length != grid dim");
    if (is_constant_vector(v))
        throw DataError("degenerate input: constant feature vector" + (id.empty() ? "" : " for " + id));

    const double n = static_cast<double>(grid.dim);
    double sv = 0.0, svv = 0.0;
    for (double x : v) {
        sv += x;
        svv += x * x;
    }
    const double var_v = n * svv - sv * sv;

    Placement best;
    best.id = id;
    double best_corr = -2.0;
    for (std::size_t r = 0; r < grid.rows; ++r)
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const double* w = grid.weights.data() + (r * grid.cols + c) * grid.dim;
            double sw = 0.0, sww = 0.0, svw = 0.0;
            for (std::size_t i = 0; i < grid.dim; ++i) {
                sw += w[i];
                sww += w[i] * w[i];
                svw += v[i] * w[i];
            }
            const double var_w = n * sww - sw * sw;
            double corr = 0.0;
            if (var_v > 0.0 && var_w > 0.0)
                corr = std::clamp((n * svw - sv * sw) / std::sqrt(var_v * var_w), -1.0, 1.0);
            if (corr > best_corr) {
                best_corr = corr;
                best.row = r;
                best.col = c;
            }
        }
    best.correlation = best_corr;
    return best;
}

// Sequential Kohonen training: per cycle the vectors are presented in a
// freshly shuffled order; every presentation moves the whole lattice toward
// (or, in the hat's negative surround, away from) the vector. Learning rate
// and neighborhood width decay linearly across cycles.
inline void som_train(SomGrid& grid, const std::vector<std::vector<double>>& vectors,
                      const TrainOptions& opt = {}) {
    if (opt.cycles == 0) throw ValidationError("som_train: zero cycles requested");
    if (vectors.empty()) throw ValidationError("som_train: no training vectors");
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != grid.dim)
            throw ValidationError("som_train: vector " + std::to_string(i) + " length != grid dim");
        if (is_constant_vector(vectors[i]))
            throw DataError("degenerate input: constant training vector at index " + std::to_string(i));
    }

    // The hat's negative surround repels distant neurons, and iterated
    // repulsion is multiplicative (|1 - alpha*h| > 1): on large maps weights
    // would overflow within a few thousand presentations. Clamping every
    // component to the training data's envelope keeps weights finite while
    // leaving the push-away behavior intact inside it.
    std::vector<double> lo(grid.dim, std::numeric_limits<double>::infinity());
    std::vector<double> hi(grid.dim, -std::numeric_limits<double>::infinity());
    for (const auto& v : vectors)
        for (std::size_t i = 0; i < grid.dim; ++i) {
            lo[i] = std::min(lo[i], v[i]);
            hi[i] = std::max(hi[i], v[i]);
        }

    const double sigma_start = static_cast<double>(std::max(grid.rows, grid.cols)) / 2.0;
    std::vector<std::size_t> order(vectors.size());
    std::iota(order.begin(), order.end(), 0);

    for (std::size_t t = 0; t < opt.cycles; ++t) {
        const double frac =
            opt.cycles > 1 ? static_cast<double>(t) / static_cast<double>(opt.cycles - 1) : 0.0;
        const double alpha = opt.alpha_start + (opt.alpha_end - opt.alpha_start) * frac;
        const double sigma = sigma_start + (opt.sigma_end - sigma_start) * frac;

        seeded_shuffle(order, grid.rng);
        for (std::size_t idx : order) {
            const std::vector<double>& v = vectors[idx];
            const Placement bmu = best_match(grid, v);
            for (std::size_t r = 0; r < grid.rows; ++r)
                for (std::size_t c = 0; c < grid.cols; ++c) {
                    const double dr = static_cast<double>(r) - static_cast<double>(bmu.row);
                    const double dc = static_cast<double>(c) - static_cast<double>(bmu.col);
                    const double h = mexican_hat(std::sqrt(dr * dr + dc * dc), sigma);
                    const double g = alpha * h;
                    double* w = grid.weights.data() + (r * grid.cols + c) * grid.dim;
                    for (std::size_t i = 0; i < grid.dim; ++i)
                        w[i] = std::clamp(w[i] + g * (v[i] - w[i]), lo[i], hi[i]);
                }
        }
    }
    grid.cycles_trained += opt.cycles;
}

// Mean Euclidean distance to the 4-connected lattice neighbors; ridges of
// high value mark cluster boundaries.
inline UMatrix u_matrix(const SomGrid& grid) {
    UMatrix um;
    um.rows = grid.rows;
    um.cols = grid.cols;
    um.values.assign(grid.neuron_count(), 0.0);
    for (std::size_t r = 0; r < grid.rows; ++r)
        for (std::size_t c = 0; c < grid.cols; ++c) {
            const auto w = grid.weight(r, c);
            double sum = 0.0;
            int count = 0;
            const int dr[] = {-1, 1, 0, 0};
            const int dc[] = {0, 0, -1, 1};
            for (int k = 0; k < 4; ++k) {
                const long long nr = static_cast<long long>(r) + dr[k];
                const long long nc = static_cast<long long>(c) + dc[k];
                if (nr < 0 || nc < 0 || nr >= static_cast<long long>(grid.rows) ||
                    nc >= static_cast<long long>(grid.cols))
                    continue;
                const auto wn = grid.weight(static_cast<std::size_t>(nr), static_cast<std::size_t>(nc));
                double d2 = 0.0;
                for (std::size_t i = 0; i < grid.dim; ++i) {
                    const double d = w[i] - wn[i];
                    d2 += d * d;
                }
                sum += std::sqrt(d2);
                ++count;
            }
            um.values[r * grid.cols + c] = count > 0 ? sum / count : 0.0;
        }
    return um;
}

inline std::vector<double> component_plane(const SomGrid& grid, std::size_t k) {
    if (k >= grid.dim) throw UsageError("component_plane: dimension index out of range");
    std::vector<double> plane(grid.neuron_count());
    for (std::size_t n = 0; n < grid.neuron_count(); ++n) plane[n] = grid.weights[n * grid.dim + k];
    return plane;
}

struct FeatureImportance {
    std::size_t dim_index = 0;
    double strength = 0.0;    // BMU weight position within the map's range for this dimension
    double importance = 0.0;  // -|v[k] - w[k]|; closer match ranks higher
};

inline std::vector<FeatureImportance> feature_importance(const SomGrid& grid,
                                                         const Placement& placement,
                                                         std::span<const double> v) {
    if (v.size() != grid.dim) throw ValidationError("feature_importance: vector length != grid dim");
    const auto w = grid.weight(placement.row, placement.col);
    std::vector<FeatureImportance> result(grid.dim);
    for (std::size_t k = 0; k < grid.dim; ++k) {
        double lo = grid.weights[k], hi = grid.weights[k];
        for (std::size_t n = 1; n < grid.neuron_count(); ++n) {
            const double x = grid.weights[n * grid.dim + k];
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
        result[k].dim_index = k;
        result[k].strength = hi > lo ? (w[k] - lo) / (hi - lo) : 0.5;
        result[k].importance = -std::fabs(v[k] - w[k]);
    }
    std::stable_sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        if (a.importance != b.importance) return a.importance > b.importance;
        return a.dim_index < b.dim_index;
    });
    return result;
}

}  // namespace mirsom
