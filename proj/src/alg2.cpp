#include "ocdl/alg2.hpp"

#include <cmath>

#include "ocdl/dict_space.hpp"
#include "ocdl/parallel.hpp"
#include "ocdl/spectral.hpp"
#include "stack_ops.hpp"

namespace ocdl::alg2 {

namespace {

void check_inputs(const FilterBank& bank, const ImagePlane& signal, const CoefficientMaps& maps) {
  if (bank.size() == 0) throw InvalidArgument("dictionary is empty");
  if (maps.size() != bank.size()) throw InvalidArgument("map count differs from filter count");
  for (const auto& m : maps) {
    if (!m.same_shape(signal)) throw InvalidArgument("map lattice differs from signal lattice");
  }
}

FitResult run_fit(const SpectrumSet& x_hat, const SpectrumPlane& s_hat,
                  const std::vector<ImagePlane>& alpha, const SpectrumSet& beta, std::uint64_t n,
                  const FilterBank& initial, const AdmmSettings& settings, const FitOptions& options) {
  settings.validate();
  const std::size_t h = s_hat.height();
  const std::size_t w = s_hat.width();
  const std::size_t k_count = initial.size();
  const std::size_t m = initial.side;

  CoefficientMaps d = pad_bank(initial, h, w);
  CoefficientMaps g = d;
  CoefficientMaps v = detail::zero_stack(k_count, h, w);
  double rho = settings.rho0;
  ResidualTracker tracker(settings, k_count * h * w);
  FitResult result;

  for (int it = 1; it <= settings.max_iter; ++it) {
    const SpectrumSet g_hat = g_update(x_hat, s_hat, alpha, beta, forward_dft(detail::stack_sub(d, v)), n, rho);
    g = inverse_dft_real(g_hat);

    const CoefficientMaps gr = detail::relaxed(g, d, settings.relax);
    CoefficientMaps d_prev = std::move(d);
    d.resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      ImagePlane cand = gr[k];
      for (std::size_t p = 0; p < h * w; ++p) cand[p] += v[k][p];
      d[k] = project_plane(cand, m);
      for (std::size_t p = 0; p < h * w; ++p) v[k][p] += gr[k][p] - d[k][p];
    }

    const double primal = std::sqrt(detail::stack_diff_sq_norm(g, d));
    const double dual = rho * std::sqrt(detail::stack_diff_sq_norm(d, d_prev));
    result.status.iterations = it;
    result.status.primal_residual = primal;
    result.status.dual_residual = dual;

    if (options.observer) options.observer(FitIterate{it, rho, g, d, v});

    if (tracker.converged(primal, dual, std::sqrt(detail::stack_sq_norm(g)),
                          std::sqrt(detail::stack_sq_norm(d)), rho * std::sqrt(detail::stack_sq_norm(v)))) {
      result.status.converged = true;
      break;
    }
    detail::stack_scale(v, tracker.rebalance(primal, dual, rho));
  }
  result.status.final_rho = rho;
  result.dictionary.side = m;
  for (std::size_t k = 0; k < k_count; ++k) result.dictionary.filters.push_back(crop_filter(d[k], m));
  return result;
}

}  // namespace

SpectrumSet g_update(const SpectrumSet& x_hat, const SpectrumPlane& s_hat,
                     const std::vector<ImagePlane>& alpha, const SpectrumSet& beta,
                     const SpectrumSet& e_hat, std::uint64_t n, double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
  if (n == 0) throw InvalidArgument("sample count N must be at least 1");
  const std::size_t k_count = x_hat.size();
  if (alpha.size() != k_count || beta.size() != k_count || e_hat.size() != k_count) {
    throw InvalidArgument("g_update: stack sizes differ");
  }
  const double nn = static_cast<double>(n);
  const double inv_n = 1.0 / nn;
  SpectrumSet g_hat(k_count, SpectrumPlane(s_hat.height(), s_hat.width()));

  parallel_for(s_hat.size(), [&](std::size_t begin, std::size_t end) {
    std::vector<double> b(k_count);
    std::vector<Complex> rhs(k_count);
    for (std::size_t p = begin; p < end; ++p) {
      // D = diag(alpha_k + rho), rank-one term (1/N) conj(x) x^T:
      // g = D^-1 r - D^-1 conj(x) (x^T D^-1 r) / (N + x^H D^-1 x)
      Complex xt_binv_r{0.0, 0.0};
      double denom = nn;
      for (std::size_t k = 0; k < k_count; ++k) {
        const Complex x = x_hat[k][p];
        b[k] = 1.0 / (alpha[k][p] + rho);
        rhs[k] = inv_n * std::conj(x) * s_hat[p] + beta[k][p] + rho * e_hat[k][p];
        xt_binv_r += b[k] * x * rhs[k];
        denom += b[k] * std::norm(x);
      }
      const Complex coupling = xt_binv_r / denom;
      for (std::size_t k = 0; k < k_count; ++k) {
        g_hat[k][p] = b[k] * (rhs[k] - std::conj(x_hat[k][p]) * coupling);
      }
    }
  });
  return g_hat;
}

FitResult d_update(const FilterBank& initial, const HistoryPair& history, const ImagePlane& signal,
                   const CoefficientMaps& maps, const AdmmSettings& settings, const FitOptions& options) {
  check_inputs(initial, signal, maps);
  if (history.filters() != initial.size() || history.height() != signal.height() ||
      history.width() != signal.width()) {
    throw InvalidArgument("d_update: history shape differs from problem shape");
  }
  return run_fit(forward_dft(maps), forward_dft(signal), history.alpha, history.beta,
                 history.sample_count + 1, initial, settings, options);
}

FitResult c_update(const ImagePlane& signal, const CoefficientMaps& maps, const FilterBank& initial,
                   const AdmmSettings& settings, const FitOptions& options) {
  check_inputs(initial, signal, maps);
  // (1/2P)||.||^2 with penalty rho/P has the same minimizers, iterates and
  // residual ratios as (1/2)||.||^2 with rho: the single-sample system with
  // empty history and N = 1.
  const HistoryPair empty = HistoryPair::zeros(initial.size(), signal.height(), signal.width());
  return run_fit(forward_dft(maps), forward_dft(signal), empty.alpha, empty.beta, 1, initial, settings,
                 options);
}

HistoryPair history_update(const HistoryPair& history, const SpectrumSet& x_hat,
                           const SpectrumSet& r_hat, std::uint64_t n) {
  if (n == 0) throw InvalidArgument("sample count N must be at least 1");
  const double nn = static_cast<double>(n);
  const double keep = nn / (nn + 1.0);
  const double add = 1.0 / (nn + 1.0);
  HistoryPair next = history;
  for (std::size_t k = 0; k < next.filters(); ++k) {
    for (std::size_t p = 0; p < next.alpha[k].size(); ++p) {
      const Complex x = x_hat[k][p];
      next.alpha[k][p] = keep * history.alpha[k][p] + add * std::norm(x);
      next.beta[k][p] = keep * history.beta[k][p] + add * (std::conj(x) * r_hat[k][p]);
    }
  }
  next.sample_count = n;
  return next;
}

double fit_objective(const FilterBank& dictionary, const HistoryPair& history,
                     const ImagePlane& signal, const CoefficientMaps& maps) {
  check_inputs(dictionary, signal, maps);
  const std::size_t h = signal.height();
  const std::size_t w = signal.width();
  const double p_count = static_cast<double>(h * w);
  const double nn = static_cast<double>(history.sample_count + 1);
  const SpectrumSet x_hat = forward_dft(maps);
  const SpectrumSet d_hat = bank_spectra(dictionary, h, w);
  SpectrumPlane fit = forward_dft(signal);
  for (auto& v : fit.values()) v = -v;
  double history_term = 0.0;
  for (std::size_t k = 0; k < maps.size(); ++k) {
    for (std::size_t p = 0; p < h * w; ++p) {
      fit[p] += d_hat[k][p] * x_hat[k][p];
      history_term += 0.5 * history.alpha[k][p] * std::norm(d_hat[k][p]) -
                      (std::conj(d_hat[k][p]) * history.beta[k][p]).real();
    }
  }
  double fit_sq = 0.0;
  for (const auto& v : fit.values()) fit_sq += std::norm(v);
  return fit_sq / (2.0 * nn * p_count) + history_term / p_count;
}

}  // namespace ocdl::alg2
