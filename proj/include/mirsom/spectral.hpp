#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "mirsom/audio.hpp"
#include "mirsom/common.hpp"
#include "mirsom/fft.hpp"

namespace mirsom {

// Magnitude spectrum of one analysis frame. f_i = i * bin_hz.
struct FrameSpectrum {
    std::vector<double> magnitudes;  // non-negative half, N = floor(l/2)+1
    double bin_hz = 0.0;
    std::size_t frame_index = 0;
    double frame_duration = 0.0;  // seconds

    double freq_at(std::size_t i) const { return static_cast<double>(i) * bin_hz; }
};

struct SpectralOptions {
    double frame_seconds = 0.080;
    bool hann_window = false;
};

inline std::size_t frame_length_samples(std::uint32_t sample_rate, double frame_seconds) {
    return static_cast<std::size_t>(std::llround(frame_seconds * static_cast<double>(sample_rate)));
}

// Adjacent non-overlapping frames; the trailing remainder shorter than one
// frame is discarded. Throws if the clip cannot fill a single frame.
inline std::vector<std::span<const double>> frame_clip(const AudioClip& clip,
                                                       const SpectralOptions& opt = {}) {
    const std::size_t l = frame_length_samples(clip.sample_rate, opt.frame_seconds);
    if (l < 2) throw ValidationError("frame length below 2 samples");
    if (clip.samples.size() < l)
        throw DataError("clip too short: " + clip.id + " has " + std::to_string(clip.samples.size()) +
                        " samples, needs " + std::to_string(l));
    const std::size_t count = clip.samples.size() / l;
    std::vector<std::span<const double>> frames;
    frames.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
        frames.emplace_back(clip.samples.data() + i * l, l);
    return frames;
}

inline FrameSpectrum magnitude_spectrum(std::span<const double> frame, std::uint32_t sample_rate,
                                        std::size_t frame_index = 0, bool hann_window = false) {
    const std::size_t l = frame.size();
    if (l < 2) throw ValidationError("spectrum frame needs at least 2 samples");

    std::vector<std::complex<double>> full;
    if (hann_window) {
        std::vector<double> windowed(l);
        for (std::size_t j = 0; j < l; ++j) {
            const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                                  static_cast<double>(l - 1));
            windowed[j] = frame[j] * w;
        }
        full = dft_real(windowed);
    } else {
        full = dft_real(frame);
    }

    FrameSpectrum spec;
    spec.bin_hz = static_cast<double>(sample_rate) / static_cast<double>(l);
    spec.frame_index = frame_index;
    spec.frame_duration = static_cast<double>(l) / static_cast<double>(sample_rate);
    spec.magnitudes.resize(l / 2 + 1);
    for (std::size_t i = 0; i < spec.magnitudes.size(); ++i) spec.magnitudes[i] = std::abs(full[i]);
    return spec;
}

inline std::vector<FrameSpectrum> analyze_clip(const AudioClip& clip, const SpectralOptions& opt = {}) {
    auto frames = frame_clip(clip, opt);
    std::vector<FrameSpectrum> specs;
    specs.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i)
        specs.push_back(magnitude_spectrum(frames[i], clip.sample_rate, i, opt.hann_window));
    return specs;
}

}  // namespace mirsom
