#pragma once

#include <functional>
#include <optional>

#include "ocdl/admm.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

/// sign(v) * max(|v| - theta, 0).
double soft_threshold(double v, double theta);

/// Smallest lambda for which all-zero maps solve the sparse coding problem:
/// the largest |correlate(d_k, s)| over filters and pixels.
double lambda_max(const ImagePlane& signal, const FilterBank& dictionary);

/// (1/2) || sum_k d_k * x_k - s ||^2 + lambda sum_k ||x_k||_1, circular.
double csc_objective(const ImagePlane& signal, const FilterBank& dictionary,
                     const CoefficientMaps& maps, double lambda);

/// Data term only: (1/2) || sum_k d_k * x_k - s ||^2.
double reconstruction_error(const ImagePlane& signal, const FilterBank& dictionary,
                            const CoefficientMaps& maps);

/// State handed to a CSC observer after every iteration.
struct CscIterate {
  int iteration;
  double rho;
  const CoefficientMaps& x;
  const CoefficientMaps& y;
  const CoefficientMaps& u;
};

struct CscResult {
  CoefficientMaps maps;
  AdmmStatus status;
  /// Largest imaginary residue discarded by the inverse DFT of the x-update.
  double max_imag_residue = 0.0;
};

struct CscOptions {
  /// Warm start for both x and y; zeros when empty.
  const CoefficientMaps* initial = nullptr;
  std::function<void(const CscIterate&)> observer;
};

/// Convolutional sparse coding by ADMM on the split x = y. The x-update is
/// solved per frequency with the Sherman-Morrison identity; y is the
/// soft-thresholded (over-relaxed) x. Returns the sparse variable y.
CscResult csc_solve(const ImagePlane& signal, const FilterBank& dictionary, double lambda,
                    const AdmmSettings& settings, const CscOptions& options = {});

/// Per-frequency x-update: solves (rho I + conj(d) d^T) chi = rhs for every
/// frequency. Exposed for oracle comparison.
void csc_frequency_solve(const SpectrumSet& filter_spectra, const SpectrumSet& rhs, double rho,
                         SpectrumSet& out);

/// Largest KKT violation, normalized by lambda. Nonzero entries contribute
/// |g + lambda sign(x)|, zero entries max(|g| - lambda, 0), where g is the
/// gradient of the data term. `active_tol` separates zero from nonzero.
struct KktReport {
  double active_violation = 0.0;
  double inactive_violation = 0.0;
};
KktReport kkt_check(const ImagePlane& signal, const FilterBank& dictionary,
                    const CoefficientMaps& maps, double lambda, double active_tol = 1e-6);

}  // namespace ocdl
