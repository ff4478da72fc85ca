#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace decoh::fft {

/// In-place unnormalised DFT of a row-major rows x cols array with kernel
/// exp(+i 2 pi jk / N) along both axes (FFTW_BACKWARD). Plans use
/// FFTW_ESTIMATE so results do not depend on timing.
void forward_positive_2d(std::vector<std::complex<double>>& data, std::size_t rows, std::size_t cols);

/// Same kernel along one axis of a row-major array (axis 0 = rows).
void transform_axis(std::vector<std::complex<double>>& data, std::size_t rows, std::size_t cols, int axis,
                    int sign);

/// 1D DFT with exp(sign i 2 pi jk / N), unnormalised.
void transform_1d(std::vector<std::complex<double>>& data, int sign);

/// Signed frequency index of DFT bin k for length n: k for k < n/2, k - n otherwise.
inline long signed_index(std::size_t k, std::size_t n) {
  return k < (n + 1) / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

}  // namespace decoh::fft
