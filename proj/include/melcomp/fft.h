// Thin real-signal FFT wrapper over FFTW.

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace melcomp::fft {

/// Unnormalized forward DFT of a real signal of length n. Returns the
/// n/2 + 1 non-redundant bins X_0 .. X_{n/2}.
std::vector<std::complex<double>> forward_real(std::span<const double> signal);

/// Real signal y of length n with y[t] = sum_{k=0}^{n-1} X_k e^{2 pi i k t / n}
/// where X is the Hermitian extension of `bins` (bins beyond the given
/// ones are zero). No 1/n factor is applied.
std::vector<double> inverse_real(std::span<const std::complex<double>> bins, std::size_t n);

}  // namespace melcomp::fft
