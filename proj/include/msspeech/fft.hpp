#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace msspeech {

// In-place radix-2 FFT; x.size() must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& x, bool inverse = false);

std::size_t next_pow2(std::size_t n);

}  // namespace msspeech
