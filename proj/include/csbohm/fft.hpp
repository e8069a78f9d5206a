#ifndef CSBOHM_FFT_HPP
#define CSBOHM_FFT_HPP

#include <cstddef>

#include "csbohm/grid.hpp"

namespace csbohm {

// Thin FFTW front end. Plans are cached per (size, direction) behind a mutex;
// execution on caller arrays is thread safe.

/// In-place forward DFT, unnormalized (sum convention).
void fft_forward(CVec& data);
/// In-place inverse DFT, normalized by 1/n.
void fft_inverse(CVec& data);

/// 2D transforms on row-major (n1 x n2) data.
void fft2_forward(CVec& data, std::size_t n1, std::size_t n2);
void fft2_inverse(CVec& data, std::size_t n1, std::size_t n2);

/// Angular wavenumbers in FFT ordering: k_j = 2*pi*j/(n*dx) for j < n/2,
/// then the negative branch.
RVec wavenumbers(std::size_t n, double spacing);

/// Spectral derivative of a periodic field sampled on the grid.
CVec spectral_derivative(const CVec& values, const Grid1D& grid);

/// Spectral derivative of a real periodic field (returns the real part).
RVec spectral_derivative(const RVec& values, const Grid1D& grid);

/// Spectral derivative along one axis of a row-major (n1 x n2) field;
/// axis 0 differentiates over the row index, axis 1 over the column index.
CVec spectral_derivative_axis(const CVec& values, std::size_t n1, std::size_t n2,
                              int axis, double spacing);

} // namespace csbohm

#endif
