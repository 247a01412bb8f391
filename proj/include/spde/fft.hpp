#pragma once

#include <complex>
#include <span>

namespace spde::fft {

/// Smallest n >= lo whose prime factors are all in {2, 3, 5}.
int next_fast_size(int lo);

/// Real-to-halfcomplex DFT with the normalization
///   out[k] = (1/n) * sum_j in[j] * exp(-2 pi i j k / n),  k = 0 .. n/2.
/// `out` must provide n/2 + 1 slots where n = in.size().
void forward_real(std::span<const double> in, std::span<std::complex<double>> out);

/// Inverse of forward_real (no extra scaling; the 1/n lives in the forward
/// direction): out[j] = sum_{|k| <= n/2} half[|k|]^(*) * exp(+2 pi i j k / n).
/// `half` must have n/2 + 1 slots where n = out.size(); the Nyquist slot is
/// expected to be real (it is zero everywhere in this codebase).
void inverse_real(std::span<const std::complex<double>> half, std::span<double> out);

} // namespace spde::fft
