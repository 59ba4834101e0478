#pragma once

#include <functional>

#include "ocdl/admm.hpp"
#include "ocdl/history.hpp"
#include "ocdl/types.hpp"

namespace ocdl::alg1 {

// Joint (c, d) dictionary update. After coding sample N, the per-sample
// dictionary c and the global dictionary d are optimized together by ADMM
// with auxiliaries f = c and g = d:
//
//   (1/2N) sum_k ||(g_k - f_k) * x_k||^2 + (1/2N) ||sum_k f_k * x_k - s||^2
//     + (1/2N) sum_{n<N} sum_k ||g_k * x_k^n - t_k^n||^2 + Omega(c) + Omega(d)
//
// where the history term enters only through alpha and beta.

/// f-update. Per frequency p solves
///   (diag(|x_k|^2 + N rho) + conj(x) x^T) f = conj(x_k)(z_k + s) + N rho q_k
/// in O(K) via the Sherman-Morrison identity.
SpectrumSet f_update(const SpectrumSet& x_hat, const SpectrumSet& z_hat, const SpectrumPlane& s_hat,
                     const SpectrumSet& q_hat, std::uint64_t n, double rho);

/// g-update: g_k = (beta_k + rho w_k) / (alpha_k + rho), elementwise.
SpectrumSet g_update(const std::vector<ImagePlane>& alpha, const SpectrumSet& beta,
                     const SpectrumSet& w_hat, double rho);

/// beta^N = ((N-1)/N) beta^{N-1} + (1/N) conj(x) (f x). Does not touch beta_prev.
SpectrumSet beta_recompute(const SpectrumSet& beta_prev, const SpectrumSet& x_hat,
                           const SpectrumSet& f_hat, std::uint64_t n);

/// alpha^N = ((N-1)/N) alpha^{N-1} + (1/N) |x|^2.
std::vector<ImagePlane> alpha_update(const std::vector<ImagePlane>& alpha_prev,
                                     const SpectrumSet& x_hat, std::uint64_t n);

struct StepIterate {
  int iteration;
  double rho;
  const CoefficientMaps& f;
  const CoefficientMaps& g;
  const CoefficientMaps& c;
  const CoefficientMaps& d;
  const CoefficientMaps& u;
  const CoefficientMaps& v;
};

struct StepResult {
  FilterBank dictionary;
  /// The per-sample dictionary c^N at exit; trainers discard it.
  FilterBank sample_dictionary;
  HistoryPair history;
  AdmmStatus status;
};

struct StepOptions {
  std::function<void(const StepIterate&)> observer;
};

/// Runs the joint ADMM for sample N = history.sample_count, where `history`
/// already holds alpha^N and beta^{N-1}. beta is recomputed from the frozen
/// beta^{N-1} every iteration and committed from the final f on exit.
StepResult dict_step(const FilterBank& dictionary, const HistoryPair& history,
                     const ImagePlane& signal, const CoefficientMaps& maps,
                     const AdmmSettings& settings, const StepOptions& options = {});

/// Value of the (c, d) objective for sample N given the N-1 history, up to
/// an additive constant independent of (c, d). Spatial-domain units.
double step_objective(const FilterBank& dictionary, const FilterBank& sample_dictionary,
                      const std::vector<ImagePlane>& alpha_prev, const SpectrumSet& beta_prev,
                      const ImagePlane& signal, const CoefficientMaps& maps, std::uint64_t n);

}  // namespace ocdl::alg1
