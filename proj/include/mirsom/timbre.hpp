#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mirsom/common.hpp"
#include "mirsom/spectral.hpp"

namespace mirsom {

constexpr double kRoughnessFr = 33.0;        // Hz of maximal roughness
constexpr double kLoudnessFloorDb = -120.0;
constexpr std::size_t kNumBarkBands = 24;

// Critical-band edges in Hz; band B (1-based) spans [edge[B-1], edge[B]).
constexpr std::array<double, kNumBarkBands + 1> kBarkEdges = {
    20.0,    100.0,   200.0,   300.0,   400.0,  510.0,  630.0,  770.0,  920.0,
    1080.0,  1270.0,  1480.0,  1720.0,  2000.0, 2320.0, 2700.0, 3150.0, 3700.0,
    4400.0,  5300.0,  6400.0,  7700.0,  9500.0, 12000.0, 15500.0};

// 1-based band index for a frequency, 0 if below the audible floor.
// Everything at or above the top edge accrues to band 24.
inline std::size_t bark_band_of(double freq_hz) {
    if (freq_hz < kBarkEdges.front()) return 0;
    if (freq_hz >= kBarkEdges.back()) return kNumBarkBands;
    std::size_t b = 1;
    while (b < kNumBarkBands && freq_hz >= kBarkEdges[b]) ++b;
    return b;
}

// Zwicker-style band weighting: flat below band 15, exponential boost above.
inline double sharpness_weight(std::size_t band) {
    if (band < 15) return 1.0;
    return 0.066 * std::exp(0.171 * static_cast<double>(band));
}

struct Partial {
    double freq_hz;
    double amplitude;
};

struct TimbreOptions {
    double partial_rel_threshold = 1e-3;  // fraction of the frame's peak magnitude
    double a_ref = 1.0;                   // loudness reference amplitude
};

struct FrameFeatures {
    double centroid = 0.0;   // Hz
    double roughness = 0.0;
    double sharpness = 0.0;  // acum
    double loudness = kLoudnessFloorDb;  // dB
    bool silent = true;
};

struct TimbreVector {
    double centroid_mean = 0.0, centroid_std = 0.0;
    double roughness_mean = 0.0, roughness_std = 0.0;
    double sharpness_mean = 0.0, sharpness_std = 0.0;
    double loudness_mean = 0.0, loudness_std = 0.0;

    std::array<double, 8> as_array() const {
        return {centroid_mean, centroid_std, roughness_mean, roughness_std,
                sharpness_mean, sharpness_std, loudness_mean, loudness_std};
    }

    static const std::array<std::string, 8>& field_names() {
        static const std::array<std::string, 8> names = {
            "centroid_mean", "centroid_std", "roughness_mean", "roughness_std",
            "sharpness_mean", "sharpness_std", "loudness_mean", "loudness_std"};
        return names;
    }
};

inline double spectral_centroid(const FrameSpectrum& spec) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < spec.magnitudes.size(); ++i) {
        num += spec.freq_at(i) * spec.magnitudes[i];
        den += spec.magnitudes[i];
    }
    if (den <= 0.0) throw DataError("spectral_centroid: all-zero spectrum");
    return num / den;
}

// Partials = interior local maxima above a relative amplitude threshold.
inline std::vector<Partial> pick_partials(const FrameSpectrum& spec, double rel_threshold = 1e-3) {
    const auto& a = spec.magnitudes;
    double peak = 0.0;
    for (double v : a) peak = std::max(peak, v);
    if (peak <= 0.0) return {};
    const double floor = peak * rel_threshold;
    std::vector<Partial> partials;
    for (std::size_t i = 1; i + 1 < a.size(); ++i)
        if (a[i] >= floor && a[i] > a[i - 1] && a[i] > a[i + 1])
            partials.push_back({spec.freq_at(i), a[i]});
    return partials;
}

inline double roughness_of_pair(double a1, double a2, double df_hz) {
    const double x = std::fabs(df_hz) / kRoughnessFr;
    return a1 * a2 * x * std::exp(1.0 - x);
}

inline double roughness(const std::vector<Partial>& partials) {
    double r = 0.0;
    for (std::size_t i = 0; i < partials.size(); ++i)
        for (std::size_t j = i + 1; j < partials.size(); ++j)
            r += roughness_of_pair(partials[i].amplitude, partials[j].amplitude,
                                   partials[j].freq_hz - partials[i].freq_hz);
    return r;
}

inline double roughness(const FrameSpectrum& spec, double rel_threshold = 1e-3) {
    return roughness(pick_partials(spec, rel_threshold));
}

// Band energies L_B, indexable by 1-based band via [B-1].
inline std::array<double, kNumBarkBands> bark_band_energies(const FrameSpectrum& spec) {
    std::array<double, kNumBarkBands> bands{};
    for (std::size_t i = 0; i < spec.magnitudes.size(); ++i) {
        const std::size_t b = bark_band_of(spec.freq_at(i));
        if (b == 0) continue;  // below 20 Hz: outside the critical-band scale
        bands[b - 1] += spec.magnitudes[i] * spec.magnitudes[i];
    }
    return bands;
}

inline double sharpness(const std::array<double, kNumBarkBands>& band_loudness) {
    double num = 0.0, den = 0.0;
    for (std::size_t b = 1; b <= kNumBarkBands; ++b) {
        const double lb = band_loudness[b - 1];
        num += lb * sharpness_weight(b) * static_cast<double>(b);
        den += lb;
    }
    if (den <= 0.0) throw DataError("sharpness: all bands silent");
    return 0.11 * num / den;
}

inline double sharpness(const FrameSpectrum& spec) { return sharpness(bark_band_energies(spec)); }

inline double loudness(const FrameSpectrum& spec, double a_ref = 1.0) {
    const std::size_t n = spec.magnitudes.size();
    double energy = 0.0;
    for (double a : spec.magnitudes) energy += (a / a_ref) * (a / a_ref);
    if (energy <= 0.0) return kLoudnessFloorDb;
    const double l = 20.0 * std::log10(std::sqrt(energy) / static_cast<double>(n));
    return std::max(l, kLoudnessFloorDb);
}

inline FrameFeatures compute_frame_features(const FrameSpectrum& spec, const TimbreOptions& opt = {}) {
    FrameFeatures f;
    double total = 0.0;
    for (double a : spec.magnitudes) total += a;
    if (total <= 0.0) return f;  // silent frame

    const auto bands = bark_band_energies(spec);
    double band_total = 0.0;
    for (double b : bands) band_total += b;
    if (band_total <= 0.0) return f;  // energy only below the band floor: treat as silent

    f.silent = false;
    f.centroid = spectral_centroid(spec);
    f.roughness = roughness(spec, opt.partial_rel_threshold);
    f.sharpness = sharpness(bands);
    f.loudness = loudness(spec, opt.a_ref);
    return f;
}

// Mean and population standard deviation over non-silent frames.
inline TimbreVector aggregate(const std::vector<FrameFeatures>& frames) {
    std::vector<double> c, r, s, l;
    for (const auto& f : frames) {
        if (f.silent) continue;
        c.push_back(f.centroid);
        r.push_back(f.roughness);
        s.push_back(f.sharpness);
        l.push_back(f.loudness);
    }
    if (c.size() < 2)
        throw DataError("piece excluded: fewer than 2 non-silent frames (" + std::to_string(c.size()) + ")");
    TimbreVector tv;
    tv.centroid_mean = mean_of(c);
    tv.centroid_std = pop_std_of(c);
    tv.roughness_mean = mean_of(r);
    tv.roughness_std = pop_std_of(r);
    tv.sharpness_mean = mean_of(s);
    tv.sharpness_std = pop_std_of(s);
    tv.loudness_mean = mean_of(l);
    tv.loudness_std = pop_std_of(l);
    return tv;
}

}  // namespace mirsom
