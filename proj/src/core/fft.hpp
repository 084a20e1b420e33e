#pragma once

#include <complex>
#include <span>
#include <vector>

#include "core/tensor.hpp"

namespace splitcv {

using Complex = std::complex<double>;

// Unitary n-dimensional DFT over `shape` (both directions scaled by
// 1/sqrt(size)). Backed by FFTW; plans are cached per shape and executed
// through the new-array interface, so calls are safe from any thread.
std::vector<Complex> dft(std::span<const Complex> in, const Shape& shape);
std::vector<Complex> idft(std::span<const Complex> in, const Shape& shape);

std::vector<Complex> dft_real(std::span<const double> in, const Shape& shape);
// Inverse transform keeping the real part. When `max_imag` is given it
// receives the largest discarded imaginary magnitude.
std::vector<double> idft_real(std::span<const Complex> in, const Shape& shape,
                              double* max_imag = nullptr);

// Index of the frequency mirrored through the origin, (k_1..k_d) -> (-k_1..-k_d).
std::size_t mirrored_index(std::size_t index, const Shape& shape);

}  // namespace splitcv
