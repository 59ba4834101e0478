#include "ocdl/alg1.hpp"

#include <cmath>

#include "ocdl/dict_space.hpp"
#include "ocdl/parallel.hpp"
#include "ocdl/spectral.hpp"
#include "stack_ops.hpp"

namespace ocdl {

namespace alg1 {

namespace {

void require_count(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("sample count N must be at least 1");
}

void require_rho(double rho) {
  if (!(rho > 0.0)) throw InvalidArgument("rho must be positive");
}

}  // namespace

SpectrumSet f_update(const SpectrumSet& x_hat, const SpectrumSet& z_hat, const SpectrumPlane& s_hat,
                     const SpectrumSet& q_hat, std::uint64_t n, double rho) {
  require_rho(rho);
  require_count(n);
  const std::size_t k_count = x_hat.size();
  if (z_hat.size() != k_count || q_hat.size() != k_count) {
    throw InvalidArgument("f_update: stack sizes differ");
  }
  const std::size_t p_count = s_hat.size();
  const double n_rho = static_cast<double>(n) * rho;
  SpectrumSet f_hat(k_count, SpectrumPlane(s_hat.height(), s_hat.width()));

  parallel_for(p_count, [&](std::size_t begin, std::size_t end) {
    std::vector<double> a(k_count);
    std::vector<Complex> rhs(k_count);
    for (std::size_t p = begin; p < end; ++p) {
      // D = diag(|x_k|^2 + N rho), rank-one term conj(x) x^T:
      // f = D^-1 b - D^-1 conj(x) (x^T D^-1 b) / (1 + x^H D^-1 x)
      Complex xt_ainv_b{0.0, 0.0};
      double denom = 1.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        const Complex x = x_hat[k][p];
        const double x2 = std::norm(x);
        a[k] = 1.0 / (x2 + n_rho);
        rhs[k] = std::conj(x) * (z_hat[k][p] + s_hat[p]) + n_rho * q_hat[k][p];
        xt_ainv_b += a[k] * x * rhs[k];
        denom += a[k] * x2;
      }
      const Complex coupling = xt_ainv_b / denom;
      for (std::size_t k = 0; k < k_count; ++k) {
        f_hat[k][p] = a[k] * (rhs[k] - std::conj(x_hat[k][p]) * coupling);
      }
    }
  });
  return f_hat;
}

SpectrumSet g_update(const std::vector<ImagePlane>& alpha, const SpectrumSet& beta,
                     const SpectrumSet& w_hat, double rho) {
  require_rho(rho);
  if (alpha.size() != beta.size() || beta.size() != w_hat.size()) {
    throw InvalidArgument("g_update: stack sizes differ");
  }
  SpectrumSet g_hat = w_hat;
  for (std::size_t k = 0; k < w_hat.size(); ++k) {
    for (std::size_t p = 0; p < w_hat[k].size(); ++p) {
      g_hat[k][p] = (beta[k][p] + rho * w_hat[k][p]) / (alpha[k][p] + rho);
    }
  }
  return g_hat;
}

SpectrumSet beta_recompute(const SpectrumSet& beta_prev, const SpectrumSet& x_hat,
                           const SpectrumSet& f_hat, std::uint64_t n) {
  require_count(n);
  const double keep = static_cast<double>(n - 1) / static_cast<double>(n);
  const double add = 1.0 / static_cast<double>(n);
  SpectrumSet beta = beta_prev;
  for (std::size_t k = 0; k < beta.size(); ++k) {
    for (std::size_t p = 0; p < beta[k].size(); ++p) {
      const Complex x = x_hat[k][p];
      const Complex t = f_hat[k][p] * x;
      beta[k][p] = keep * beta_prev[k][p] + add * (std::conj(x) * t);
    }
  }
  return beta;
}

std::vector<ImagePlane> alpha_update(const std::vector<ImagePlane>& alpha_prev,
                                     const SpectrumSet& x_hat, std::uint64_t n) {
  require_count(n);
  const double keep = static_cast<double>(n - 1) / static_cast<double>(n);
  const double add = 1.0 / static_cast<double>(n);
  std::vector<ImagePlane> alpha = alpha_prev;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    for (std::size_t p = 0; p < alpha[k].size(); ++p) {
      alpha[k][p] = keep * alpha_prev[k][p] + add * std::norm(x_hat[k][p]);
    }
  }
  return alpha;
}

StepResult dict_step(const FilterBank& dictionary, const HistoryPair& history,
                     const ImagePlane& signal, const CoefficientMaps& maps,
                     const AdmmSettings& settings, const StepOptions& options) {
  settings.validate();
  const std::uint64_t n = history.sample_count;
  require_count(n);
  const std::size_t h = signal.height();
  const std::size_t w = signal.width();
  const std::size_t k_count = dictionary.size();
  const std::size_t m = dictionary.side;
  if (maps.size() != k_count || history.filters() != k_count) {
    throw InvalidArgument("dict_step: filter, map and history counts differ");
  }
  if (history.height() != h || history.width() != w) {
    throw InvalidArgument("dict_step: history lattice differs from signal lattice");
  }

  const SpectrumSet x_hat = forward_dft(maps);
  const SpectrumPlane s_hat = forward_dft(signal);

  CoefficientMaps d = pad_bank(dictionary, h, w);
  CoefficientMaps c = d;
  CoefficientMaps f = c;
  CoefficientMaps g = d;
  SpectrumSet g_hat = forward_dft(g);
  SpectrumSet f_hat = g_hat;
  CoefficientMaps u = detail::zero_stack(k_count, h, w);
  CoefficientMaps v = detail::zero_stack(k_count, h, w);

  double rho = settings.rho0;
  ResidualTracker tracker(settings, 2 * k_count * h * w);
  StepResult result;
  SpectrumSet z_hat(k_count, SpectrumPlane(h, w));

  for (int it = 1; it <= settings.max_iter; ++it) {
    // f-update with z = g^t * x.
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t p = 0; p < h * w; ++p) z_hat[k][p] = g_hat[k][p] * x_hat[k][p];
    }
    f_hat = f_update(x_hat, z_hat, s_hat, forward_dft(detail::stack_sub(c, u)), n, rho);
    f = inverse_dft_real(f_hat);

    // g-update against beta^N rebuilt from the frozen N-1 history and f^{t+1}.
    const SpectrumSet beta = beta_recompute(history.beta, x_hat, f_hat, n);
    g_hat = g_update(history.alpha, beta, forward_dft(detail::stack_sub(d, v)), rho);
    g = inverse_dft_real(g_hat);

    const CoefficientMaps fr = detail::relaxed(f, c, settings.relax);
    const CoefficientMaps gr = detail::relaxed(g, d, settings.relax);
    CoefficientMaps c_prev = std::move(c);
    CoefficientMaps d_prev = std::move(d);
    c.resize(k_count);
    d.resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      ImagePlane fc = fr[k];
      ImagePlane gd = gr[k];
      for (std::size_t p = 0; p < h * w; ++p) {
        fc[p] += u[k][p];
        gd[p] += v[k][p];
      }
      c[k] = project_plane(fc, m);
      d[k] = project_plane(gd, m);
      for (std::size_t p = 0; p < h * w; ++p) {
        u[k][p] += fr[k][p] - c[k][p];
        v[k][p] += gr[k][p] - d[k][p];
      }
    }

    const double primal = std::sqrt(detail::stack_diff_sq_norm(f, c) + detail::stack_diff_sq_norm(g, d));
    const double dual =
        rho * std::sqrt(detail::stack_diff_sq_norm(c, c_prev) + detail::stack_diff_sq_norm(d, d_prev));
    result.status.iterations = it;
    result.status.primal_residual = primal;
    result.status.dual_residual = dual;

    if (options.observer) options.observer(StepIterate{it, rho, f, g, c, d, u, v});

    const double aux_norm = std::sqrt(detail::stack_sq_norm(f) + detail::stack_sq_norm(g));
    const double var_norm = std::sqrt(detail::stack_sq_norm(c) + detail::stack_sq_norm(d));
    const double dual_norm = rho * std::sqrt(detail::stack_sq_norm(u) + detail::stack_sq_norm(v));
    if (tracker.converged(primal, dual, aux_norm, var_norm, dual_norm)) {
      result.status.converged = true;
      break;
    }
    const double scale = tracker.rebalance(primal, dual, rho);
    detail::stack_scale(u, scale);
    detail::stack_scale(v, scale);
  }
  result.status.final_rho = rho;

  result.dictionary.side = m;
  result.sample_dictionary.side = m;
  for (std::size_t k = 0; k < k_count; ++k) {
    result.dictionary.filters.push_back(crop_filter(d[k], m));
    result.sample_dictionary.filters.push_back(crop_filter(c[k], m));
  }
  result.history.alpha = history.alpha;
  result.history.beta = beta_recompute(history.beta, x_hat, f_hat, n);
  result.history.sample_count = n;
  return result;
}

double step_objective(const FilterBank& dictionary, const FilterBank& sample_dictionary,
                      const std::vector<ImagePlane>& alpha_prev, const SpectrumSet& beta_prev,
                      const ImagePlane& signal, const CoefficientMaps& maps, std::uint64_t n) {
  require_count(n);
  const std::size_t h = signal.height();
  const std::size_t w = signal.width();
  const double p_count = static_cast<double>(h * w);
  const double nn = static_cast<double>(n);
  const SpectrumSet x_hat = forward_dft(maps);
  const SpectrumSet d_hat = bank_spectra(dictionary, h, w);
  const SpectrumSet c_hat = bank_spectra(sample_dictionary, h, w);
  const SpectrumPlane s_hat = forward_dft(signal);

  // Parseval: spatial ||a||^2 = (1/P) ||a_hat||^2.
  double coupling = 0.0;
  double history_term = 0.0;
  SpectrumPlane fit = s_hat;
  for (auto& v : fit.values()) v = -v;
  for (std::size_t k = 0; k < maps.size(); ++k) {
    for (std::size_t p = 0; p < h * w; ++p) {
      coupling += std::norm((d_hat[k][p] - c_hat[k][p]) * x_hat[k][p]);
      fit[p] += c_hat[k][p] * x_hat[k][p];
      history_term += 0.5 * alpha_prev[k][p] * std::norm(d_hat[k][p]) -
                      (std::conj(d_hat[k][p]) * beta_prev[k][p]).real();
    }
  }
  double fit_sq = 0.0;
  for (const auto& v : fit.values()) fit_sq += std::norm(v);
  return (coupling + fit_sq) / (2.0 * nn * p_count) + (nn - 1.0) / nn * history_term / p_count;
}

}  // namespace alg1
}  // namespace ocdl
