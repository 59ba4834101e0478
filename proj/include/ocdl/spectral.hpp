#pragma once

#include "ocdl/types.hpp"

namespace ocdl {

// Convention used throughout the library: the forward DFT is unnormalized,
//   X(u,v) = sum_{h,w} x(h,w) exp(-2*pi*i*(u*h/H + v*w/W)),
// and the inverse carries the 1/P factor (P = H*W). Every convolution is
// circular on the H x W lattice.

SpectrumPlane forward_dft(const ImagePlane& plane);
SpectrumPlane forward_dft(const SpectrumPlane& plane);
SpectrumPlane inverse_dft(const SpectrumPlane& spectrum);

/// Inverse DFT keeping the real part. If `max_imag` is given it receives the
/// largest absolute imaginary residue that was discarded.
ImagePlane inverse_dft_real(const SpectrumPlane& spectrum, double* max_imag = nullptr);

/// Batched transforms over a K-plane stack (data-parallel over planes).
SpectrumSet forward_dft(const CoefficientMaps& planes);
CoefficientMaps inverse_dft_real(const SpectrumSet& spectra, double* max_imag = nullptr);

ImagePlane circular_convolve(const ImagePlane& a, const ImagePlane& b);

/// c(p) = sum_q a(q) b(q + p), the adjoint of convolution with `a`.
ImagePlane circular_correlate(const ImagePlane& a, const ImagePlane& b);

/// Places the m x m support at the top-left corner of an H x W zero plane.
ImagePlane pad_filter(const FilterSupport& filter, std::size_t height, std::size_t width);
FilterSupport crop_filter(const ImagePlane& plane, std::size_t side);

CoefficientMaps pad_bank(const FilterBank& bank, std::size_t height, std::size_t width);
SpectrumSet bank_spectra(const FilterBank& bank, std::size_t height, std::size_t width);

/// sum_k d_k * x_k evaluated in the frequency domain.
ImagePlane synthesize(const SpectrumSet& filter_spectra, const SpectrumSet& map_spectra);

}  // namespace ocdl
