#pragma once

#include <functional>

#include "ocdl/admm.hpp"
#include "ocdl/history.hpp"
#include "ocdl/types.hpp"

namespace ocdl::alg2 {

// Exact fit to the latest sample plus approximate history. The history
// arrays are normalized by 1/(N+1):
//   alpha~^N = (1/(N+1)) sum_{n<=N} |x^n|^2
//   beta~^N  = (1/(N+1)) sum_{n<=N} conj(x^n) r^n,   r^n_k = c^n_k * x^n_k
// so alpha~^{N-1} is exactly the 1/N weight the history term needs when
// the dictionary is fitted at sample N.

/// Per frequency p solves
///   (diag(alpha~_k + rho) + (1/N) conj(x) x^T) g
///       = (1/N) conj(x_k) s + beta~_k + rho e_k
/// via Sherman-Morrison. alpha/beta are the N-1 arrays.
SpectrumSet g_update(const SpectrumSet& x_hat, const SpectrumPlane& s_hat,
                     const std::vector<ImagePlane>& alpha, const SpectrumSet& beta,
                     const SpectrumSet& e_hat, std::uint64_t n, double rho);

struct FitIterate {
  int iteration;
  double rho;
  const CoefficientMaps& g;
  const CoefficientMaps& d;
  const CoefficientMaps& v;
};

struct FitResult {
  FilterBank dictionary;
  AdmmStatus status;
};

struct FitOptions {
  std::function<void(const FitIterate&)> observer;
};

/// ADMM fit of the dictionary for sample N = history.sample_count + 1,
/// starting from `initial`. `history` holds the N-1 arrays.
FitResult d_update(const FilterBank& initial, const HistoryPair& history, const ImagePlane& signal,
                   const CoefficientMaps& maps, const AdmmSettings& settings,
                   const FitOptions& options = {});

/// Single-sample refit of the per-sample dictionary c^N with the maps held
/// fixed:  min (1/2P) ||sum_k c_k * x_k - s||^2 + Omega(c), started at
/// `initial`. The 1/P data scale is paired with rho/P, so the iterates and
/// residuals match the 1/2-scaled problem run with rho.
FitResult c_update(const ImagePlane& signal, const CoefficientMaps& maps, const FilterBank& initial,
                   const AdmmSettings& settings, const FitOptions& options = {});

/// alpha~^N = (N/(N+1)) alpha~^{N-1} + (1/(N+1)) |x|^2,
/// beta~^N  = (N/(N+1)) beta~^{N-1}  + (1/(N+1)) conj(x) r.
HistoryPair history_update(const HistoryPair& history, const SpectrumSet& x_hat,
                           const SpectrumSet& r_hat, std::uint64_t n);

/// Dictionary objective at sample N up to a constant:
///   (1/2N) ||sum_k d_k * x_k - s||^2 + (1/2N) sum_{n<N} sum_k ||d_k * x^n_k - r^n_k||^2.
double fit_objective(const FilterBank& dictionary, const HistoryPair& history,
                     const ImagePlane& signal, const CoefficientMaps& maps);

}  // namespace ocdl::alg2
