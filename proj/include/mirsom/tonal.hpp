#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mirsom/common.hpp"
#include "mirsom/notes.hpp"

namespace mirsom {

constexpr std::size_t kTonalBins = 1200;

struct TonalSystem {
    std::vector<double> bins;  // length 1200, unit-maximum normalized
    double octave_base_cents = 0.0;
    std::size_t total_frames = 0;
};

struct TonalOptions {
    std::size_t min_melody_notes = 10;  // below this the piece is excluded
};

// Fold origin: the strongest 1-cent bin over the full eight-octave range.
inline double octave_base(const std::vector<double>& frame_cents) {
    if (frame_cents.empty()) throw DataError("octave_base: no voiced frames");
    std::vector<int> hist(static_cast<std::size_t>(kCentsRange), 0);
    for (double c : frame_cents) {
        long long bin = std::llround(c);
        bin = std::clamp<long long>(bin, 0, static_cast<long long>(hist.size()) - 1);
        ++hist[static_cast<std::size_t>(bin)];
    }
    std::size_t best = 0;
    for (std::size_t b = 1; b < hist.size(); ++b)
        if (hist[b] > hist[best]) best = b;
    return static_cast<double>(best);
}

inline std::size_t fold_bin(double cents, double base) {
    double m = std::fmod(cents - base, 1200.0);
    if (m < 0.0) m += 1200.0;
    auto bin = static_cast<std::size_t>(std::floor(m));
    return bin >= kTonalBins ? 0 : bin;
}

// Accumulates one count per voiced frame of every qualifying note into the
// octave-folded 1-cent histogram, then scales the peak to 1.
inline TonalSystem build_tonal_system(const std::vector<NoteEvent>& events, double base) {
    if (events.empty()) throw DataError("build_tonal_system: no events");
    TonalSystem ts;
    ts.bins.assign(kTonalBins, 0.0);
    ts.octave_base_cents = base;
    for (const auto& e : events)
        for (double c : e.frame_cents) {
            ts.bins[fold_bin(c, base)] += 1.0;
            ++ts.total_frames;
        }
    const double peak = *std::max_element(ts.bins.begin(), ts.bins.end());
    if (peak > 0.0)
        for (auto& b : ts.bins) b /= peak;
    return ts;
}

// Full per-piece tonal analysis from melody-qualifying notes; throws when the
// piece has too few notes to trust the histogram.
inline TonalSystem build_piece_tonal(const std::vector<NoteEvent>& melody_notes,
                                     const TonalOptions& opt = {}) {
    if (melody_notes.size() < opt.min_melody_notes)
        throw DataError("piece excluded: only " + std::to_string(melody_notes.size()) +
                        " melody notes, need " + std::to_string(opt.min_melody_notes));
    std::vector<double> all_frames;
    for (const auto& e : melody_notes)
        all_frames.insert(all_frames.end(), e.frame_cents.begin(), e.frame_cents.end());
    return build_tonal_system(melody_notes, octave_base(all_frames));
}

}  // namespace mirsom
