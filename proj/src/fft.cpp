#include "freqcast/fft.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace freqcast {

namespace {

constexpr double kPi = 3.14159265358979323846;

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey. Length must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& a, bool invert) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * kPi / static_cast<double>(len) * (invert ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

// Bluestein chirp-z transform for arbitrary length, built on radix-2 FFTs of
// size >= 2N-1. The chirp exponent n^2 is reduced mod 2N before the trig call
// to keep the angle small and precise for large N.
void fft_bluestein(std::vector<std::complex<double>>& a, bool invert) {
    const std::size_t n = a.size();
    const double sign = invert ? 1.0 : -1.0;

    std::vector<std::complex<double>> chirp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t sq = (static_cast<std::uint64_t>(i) * i) % (2 * n);
        const double ang = sign * kPi * static_cast<double>(sq) / static_cast<double>(n);
        chirp[i] = std::complex<double>(std::cos(ang), std::sin(ang));
    }

    const std::size_t m = next_power_of_two(2 * n - 1);
    std::vector<std::complex<double>> fa(m, {0.0, 0.0});
    std::vector<std::complex<double>> fb(m, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) fa[i] = a[i] * chirp[i];
    fb[0] = std::conj(chirp[0]);
    for (std::size_t i = 1; i < n; ++i) fb[i] = fb[m - i] = std::conj(chirp[i]);

    fft_radix2(fa, false);
    fft_radix2(fb, false);
    for (std::size_t i = 0; i < m; ++i) fa[i] *= fb[i];
    fft_radix2(fa, true);

    const double scale = 1.0 / static_cast<double>(m);
    for (std::size_t i = 0; i < n; ++i) a[i] = fa[i] * scale * chirp[i];
}

} // namespace

void fft_complex(std::vector<std::complex<double>>& a, bool invert) {
    if (a.empty()) throw std::invalid_argument("empty signal");
    if (a.size() == 1) return;
    if (is_power_of_two(a.size())) {
        fft_radix2(a, invert);
    } else {
        fft_bluestein(a, invert);
    }
}

ComplexSpectrum fft(const std::vector<double>& x) {
    if (x.empty()) throw std::invalid_argument("empty signal");
    std::vector<std::complex<double>> a(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) a[i] = {x[i], 0.0};
    fft_complex(a, false);
    ComplexSpectrum s;
    s.re.resize(a.size());
    s.im.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        s.re[i] = a[i].real();
        s.im[i] = a[i].imag();
    }
    return s;
}

InverseFftResult ifft(const ComplexSpectrum& s) {
    if (s.re.empty()) throw std::invalid_argument("empty signal");
    if (s.re.size() != s.im.size()) throw std::invalid_argument("re/im length mismatch");
    const std::size_t n = s.re.size();
    std::vector<std::complex<double>> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = {s.re[i], s.im[i]};
    fft_complex(a, true);
    InverseFftResult out;
    out.values.resize(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = a[i].real() * scale;
        out.max_imag_residue = std::max(out.max_imag_residue, std::abs(a[i].imag() * scale));
    }
    return out;
}

} // namespace freqcast
