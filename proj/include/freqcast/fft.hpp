#ifndef FREQCAST_FFT_HPP
#define FREQCAST_FFT_HPP

#include <complex>
#include <cstddef>
#include <vector>

namespace freqcast {

/// Unnormalized discrete spectrum of a real signal: bin k holds
/// sum_t x[t] * exp(-2*pi*i*k*t/N).
struct ComplexSpectrum {
    std::vector<double> re;
    std::vector<double> im;

    std::size_t length() const { return re.size(); }
};

/// Result of an inverse transform on a nominally real signal. The imaginary
/// residue is reported so callers can check that the spectrum really was
/// conjugate-symmetric.
struct InverseFftResult {
    std::vector<double> values;
    double max_imag_residue = 0.0;
};

/// In-place complex transform. Power-of-two lengths use iterative radix-2;
/// all other lengths use the Bluestein chirp-z algorithm, so no input is ever
/// silently zero-padded. `invert` computes the unnormalized inverse
/// (exp(+i...) kernel, no 1/N factor).
void fft_complex(std::vector<std::complex<double>>& a, bool invert);

/// Forward DFT of a real signal. Throws std::invalid_argument("empty signal")
/// on empty input.
ComplexSpectrum fft(const std::vector<double>& x);

/// Inverse DFT scaled by 1/N; returns the real part plus the largest absolute
/// imaginary residue seen.
InverseFftResult ifft(const ComplexSpectrum& s);

} // namespace freqcast

#endif
