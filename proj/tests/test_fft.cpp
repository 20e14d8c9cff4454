#include <catch_amalgamated.hpp>

#include <complex>
#include <random>
#include <vector>

#include "mirsom/common.hpp"
#include "mirsom/fft.hpp"

#include "naive_dft.hpp"

using mirsom::dft_real;
using testsupport::naive_dft;

namespace {

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = 2.0 * mirsom::uniform01(rng) - 1.0;
    return x;
}

double max_abs_err(const std::vector<std::complex<double>>& a,
                   const std::vector<std::complex<double>>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("transform matches the quadratic reference for all small sizes", "[fft]") {
    for (std::size_t n = 2; n <= 64; ++n) {
        const auto x = random_signal(n, 100 + n);
        const auto fast = dft_real(x);
        const auto slow = naive_dft(x);
        INFO("n = " << n);
        CHECK(max_abs_err(fast, slow) < 1e-9 * static_cast<double>(n));
    }
}

TEST_CASE("transform matches the reference for awkward composite and prime sizes", "[fft]") {
    for (std::size_t n : {97u, 125u, 343u, 500u, 1103u}) {
        const auto x = random_signal(n, 7 * n);
        const auto fast = dft_real(x);
        const auto slow = naive_dft(x);
        INFO("n = " << n);
        CHECK(max_abs_err(fast, slow) < 1e-8 * static_cast<double>(n));
    }
}

TEST_CASE("impulse transforms to a flat spectrum", "[fft]") {
    std::vector<double> x(16, 0.0);
    x[0] = 1.0;
    const auto spec = dft_real(x);
    for (const auto& v : spec) {
        CHECK(v.real() == Catch::Approx(1.0).margin(1e-12));
        CHECK(v.imag() == Catch::Approx(0.0).margin(1e-12));
    }
}

TEST_CASE("Parseval's identity holds", "[fft]") {
    for (std::size_t n : {32u, 60u, 101u}) {
        const auto x = random_signal(n, n);
        const auto spec = dft_real(x);
        double time_energy = 0.0;
        for (double v : x) time_energy += v * v;
        double freq_energy = 0.0;
        for (const auto& v : spec) freq_energy += std::norm(v);
        freq_energy /= static_cast<double>(n);
        CHECK(freq_energy == Catch::Approx(time_energy).epsilon(1e-10));
    }
}

TEST_CASE("linearity: scaling the input scales the spectrum", "[fft]") {
    const auto x = random_signal(48, 5);
    std::vector<double> x3(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) x3[i] = 3.0 * x[i];
    const auto a = dft_real(x);
    const auto b = dft_real(x3);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK(std::abs(b[i] - 3.0 * a[i]) < 1e-9);
}

TEST_CASE("deterministic RNG helpers are stable across calls", "[fft]") {
    std::mt19937_64 a(42), b(42);
    for (int i = 0; i < 1000; ++i) {
        const double ua = mirsom::uniform01(a);
        const double ub = mirsom::uniform01(b);
        REQUIRE(ua == ub);
        REQUIRE(ua >= 0.0);
        REQUIRE(ua < 1.0);
    }
    std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8}, v2 = v1;
    std::mt19937_64 r1(9), r2(9);
    mirsom::seeded_shuffle(v1, r1);
    mirsom::seeded_shuffle(v2, r2);
    CHECK(v1 == v2);
}
