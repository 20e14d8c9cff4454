#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace mirsom {

// Radix-2 + Bluestein discrete Fourier transform. Self-contained so every
// transform is bit-reproducible and safe to call from multiple threads.

namespace detail {

// In-place iterative radix-2; n must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n < 2) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

// Chirp angle pi*j^2/n evaluated through j^2 mod 2n to keep the argument small.
inline std::complex<double> chirp(std::size_t j, std::size_t n) {
    const std::uint64_t q = (static_cast<std::uint64_t>(j) * j) % (2ull * n);
    const double ang = std::numbers::pi * static_cast<double>(q) / static_cast<double>(n);
    return {std::cos(ang), std::sin(ang)};
}

}  // namespace detail

// Full n-point forward DFT of a real sequence (any n >= 1).
inline std::vector<std::complex<double>> dft_real(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dft_real: empty input");
    std::vector<std::complex<double>> out(n);
    if (std::has_single_bit(n)) {
        for (std::size_t i = 0; i < n; ++i) out[i] = {x[i], 0.0};
        detail::fft_pow2(out, false);
        return out;
    }
    // Bluestein: X_k = conj(c_k) * (y (*) v)_k with y_j = x_j*conj(c_j), v_j = c_j.
    std::size_t m = std::bit_ceil(2 * n - 1);
    std::vector<std::complex<double>> y(m), v(m);
    for (std::size_t j = 0; j < n; ++j) {
        const std::complex<double> c = detail::chirp(j, n);
        y[j] = std::complex<double>(x[j], 0.0) * std::conj(c);
        v[j] = c;
        if (j != 0) v[m - j] = c;
    }
    detail::fft_pow2(y, false);
    detail::fft_pow2(v, false);
    for (std::size_t j = 0; j < m; ++j) y[j] *= v[j];
    detail::fft_pow2(y, true);
    for (std::size_t k = 0; k < n; ++k) out[k] = std::conj(detail::chirp(k, n)) * y[k];
    return out;
}

// Forward complex FFT over a power-of-two length (used for correlation).
inline void fft_pow2_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    if (!std::has_single_bit(a.size())) throw std::invalid_argument("fft_pow2_inplace: size not a power of two");
    detail::fft_pow2(a, inverse);
}

}  // namespace mirsom
