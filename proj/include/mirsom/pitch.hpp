#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "mirsom/audio.hpp"
#include "mirsom/common.hpp"
#include "mirsom/fft.hpp"

namespace mirsom {

constexpr double kCentsOriginHz = 27.5;  // the subcontra A
constexpr double kCentsRange = 9600.0;   // eight octaves

inline double hz_to_cents(double f) {
    if (f <= 0.0) throw std::domain_error("hz_to_cents: frequency must be positive");
    return 1200.0 * std::log2(f / kCentsOriginHz);
}

inline double cents_to_hz(double cents) { return kCentsOriginHz * std::exp2(cents / 1200.0); }

struct PitchFrame {
    double time_s = 0.0;
    bool voiced = false;
    double cents = 0.0;       // valid only when voiced
    double confidence = 0.0;  // 1 - normalized difference minimum, clamped to [0, 1]
};

struct PitchTrack {
    double hop_s = 0.010;
    std::vector<PitchFrame> frames;
};

struct PitchOptions {
    double window_s = 0.025;
    double hop_s = 0.010;
    double fmin_hz = 40.0;
    double fmax_hz = 2000.0;
    double voicing_threshold = 0.45;  // on confidence = 1 - d'
    double dip_threshold = 0.1;       // absolute-threshold dip selection on d'
};

namespace pitch_detail {

// Mean-squared difference per lag for one analysis window. Lags whose overlap
// with the remaining signal is under 2 samples come back as +inf and are
// ignored by the caller.
inline std::vector<double> difference_function(const std::vector<double>& x, std::size_t pos,
                                               std::size_t window, std::size_t tau_max) {
    const std::size_t n = x.size();
    const std::size_t avail = n - pos;
    std::vector<double> delta(tau_max + 1, std::numeric_limits<double>::infinity());
    delta[0] = 0.0;

    if (pos + window + tau_max <= n) {
        // Full-support fast path: d(tau) = E0 + Eshift(tau) - 2*corr(tau) via one FFT.
        const std::size_t ext_len = window + tau_max;
        double e0 = 0.0;
        for (std::size_t j = 0; j < window; ++j) e0 += x[pos + j] * x[pos + j];
        std::vector<double> prefix(ext_len + 1, 0.0);
        for (std::size_t i = 0; i < ext_len; ++i)
            prefix[i + 1] = prefix[i] + x[pos + i] * x[pos + i];

        const std::size_t m = std::bit_ceil(ext_len);
        std::vector<std::complex<double>> head(m), ext(m);
        for (std::size_t j = 0; j < window; ++j) head[j] = x[pos + j];
        for (std::size_t i = 0; i < ext_len; ++i) ext[i] = x[pos + i];
        detail::fft_pow2(head, false);
        detail::fft_pow2(ext, false);
        for (std::size_t i = 0; i < m; ++i) head[i] = std::conj(head[i]) * ext[i];
        detail::fft_pow2(head, true);

        for (std::size_t tau = 1; tau <= tau_max; ++tau) {
            const double eshift = prefix[tau + window] - prefix[tau];
            const double d = e0 + eshift - 2.0 * head[tau].real();
            delta[tau] = std::max(d, 0.0) / static_cast<double>(window);
        }
    } else {
        for (std::size_t tau = 1; tau <= tau_max; ++tau) {
            if (avail < tau + 2) break;
            const std::size_t nt = std::min(window, avail - tau);
            double d = 0.0;
            for (std::size_t j = 0; j < nt; ++j) {
                const double diff = x[pos + j] - x[pos + j + tau];
                d += diff * diff;
            }
            delta[tau] = d / static_cast<double>(nt);
        }
    }
    return delta;
}

inline std::vector<double> cumulative_mean_normalize(const std::vector<double>& delta) {
    std::vector<double> dn(delta.size(), 1.0);
    double runsum = 0.0;
    for (std::size_t tau = 1; tau < delta.size(); ++tau) {
        if (!std::isfinite(delta[tau])) break;
        runsum += delta[tau];
        dn[tau] = runsum > 0.0 ? delta[tau] * static_cast<double>(tau) / runsum : 1.0;
    }
    return dn;
}

}  // namespace pitch_detail

// Frame-level f0 in cents above 27.5 Hz: 25 ms windows at 10 ms hop, a
// cumulative-mean-normalized difference function over the [fmin, fmax] lag
// range, dip selection with parabolic refinement. Frames whose normalized
// match falls below the voicing threshold are left unvoiced.
inline PitchTrack track_f0(const AudioClip& clip, const PitchOptions& opt = {}) {
    const double sr = static_cast<double>(clip.sample_rate);
    const std::size_t window = static_cast<std::size_t>(std::llround(opt.window_s * sr));
    const std::size_t hop = static_cast<std::size_t>(std::llround(opt.hop_s * sr));

    PitchTrack track;
    track.hop_s = opt.hop_s;
    if (window < 4 || hop == 0 || clip.samples.size() < window) return track;

    const std::size_t tau_min =
        std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(sr / opt.fmax_hz)));
    const std::size_t tau_max = static_cast<std::size_t>(std::floor(sr / opt.fmin_hz));
    if (tau_max < tau_min) return track;

    const std::size_t frame_count = (clip.samples.size() - window) / hop + 1;
    track.frames.resize(frame_count);

    for (std::size_t i = 0; i < frame_count; ++i) {
        const std::size_t pos = i * hop;
        PitchFrame& out = track.frames[i];
        out.time_s = static_cast<double>(pos) / sr;

        const auto delta = pitch_detail::difference_function(clip.samples, pos, window, tau_max);
        const auto dn = pitch_detail::cumulative_mean_normalize(delta);

        std::size_t tau_hi = tau_max;
        while (tau_hi >= tau_min && !std::isfinite(delta[tau_hi])) --tau_hi;
        if (tau_hi < tau_min) continue;

        // First dip under the absolute threshold wins; otherwise the global
        // minimum. This resolves the octave ambiguity of periodic signals
        // toward the fundamental.
        std::size_t best = 0;
        for (std::size_t tau = tau_min; tau <= tau_hi; ++tau) {
            if (dn[tau] < opt.dip_threshold && dn[tau] < dn[tau - 1] &&
                (tau == tau_hi || dn[tau] <= dn[tau + 1])) {
                best = tau;
                break;
            }
        }
        if (best == 0) {
            best = tau_min;
            for (std::size_t tau = tau_min + 1; tau <= tau_hi; ++tau)
                if (dn[tau] < dn[best]) best = tau;
        }

        const double dmin = dn[best];
        out.confidence = std::clamp(1.0 - dmin, 0.0, 1.0);
        if (out.confidence < opt.voicing_threshold) continue;

        double tau_refined = static_cast<double>(best);
        if (best > 1 && best < tau_hi && std::isfinite(dn[best - 1]) && std::isfinite(dn[best + 1])) {
            const double dm = dn[best - 1], d0 = dn[best], dp = dn[best + 1];
            const double denom = dm - 2.0 * d0 + dp;
            if (std::fabs(denom) > 1e-12) {
                const double shift = std::clamp(0.5 * (dm - dp) / denom, -1.0, 1.0);
                tau_refined += shift;
            }
        }

        const double f0 = sr / tau_refined;
        if (f0 < opt.fmin_hz || f0 <= 0.0) continue;
        const double cents = hz_to_cents(f0);
        if (cents < 0.0 || cents >= kCentsRange) continue;
        out.voiced = true;
        out.cents = cents;
    }
    return track;
}

}  // namespace mirsom
