#include "ocdl/csc.hpp"

#include <algorithm>
#include <cmath>

#include "ocdl/parallel.hpp"
#include "ocdl/spectral.hpp"
#include "stack_ops.hpp"

namespace ocdl {

namespace {

void check_problem(const ImagePlane& signal, const FilterBank& dictionary) {
  if (dictionary.size() == 0) throw InvalidArgument("dictionary is empty");
  if (dictionary.side > std::min(signal.height(), signal.width())) {
    throw InvalidArgument("filter support exceeds signal lattice");
  }
}

void check_maps(const ImagePlane& signal, const FilterBank& dictionary, const CoefficientMaps& maps) {
  if (maps.size() != dictionary.size()) throw InvalidArgument("map count differs from filter count");
  for (const auto& m : maps) {
    if (!m.same_shape(signal)) throw InvalidArgument("map lattice differs from signal lattice");
  }
}

ImagePlane residual(const ImagePlane& signal, const FilterBank& dictionary, const CoefficientMaps& maps) {
  ImagePlane r = synthesize(bank_spectra(dictionary, signal.height(), signal.width()), forward_dft(maps));
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= signal[i];
  return r;
}

}  // namespace

double soft_threshold(double v, double theta) {
  const double mag = std::abs(v) - theta;
  if (mag <= 0.0) return 0.0;
  return std::copysign(mag, v);
}

double lambda_max(const ImagePlane& signal, const FilterBank& dictionary) {
  check_problem(signal, dictionary);
  const SpectrumPlane s_hat = forward_dft(signal);
  double best = 0.0;
  for (const auto& f : dictionary.filters) {
    SpectrumPlane c = forward_dft(pad_filter(f, signal.height(), signal.width()));
    for (std::size_t p = 0; p < c.size(); ++p) c[p] = std::conj(c[p]) * s_hat[p];
    const ImagePlane corr = inverse_dft_real(c);
    for (double v : corr.values()) best = std::max(best, std::abs(v));
  }
  return best;
}

double reconstruction_error(const ImagePlane& signal, const FilterBank& dictionary,
                            const CoefficientMaps& maps) {
  check_problem(signal, dictionary);
  check_maps(signal, dictionary, maps);
  return 0.5 * squared_norm(residual(signal, dictionary, maps).values());
}

double csc_objective(const ImagePlane& signal, const FilterBank& dictionary,
                     const CoefficientMaps& maps, double lambda) {
  double l1 = 0.0;
  for (const auto& m : maps) {
    for (double v : m.values()) l1 += std::abs(v);
  }
  return reconstruction_error(signal, dictionary, maps) + lambda * l1;
}

void csc_frequency_solve(const SpectrumSet& filter_spectra, const SpectrumSet& rhs, double rho,
                         SpectrumSet& out) {
  const std::size_t k_count = filter_spectra.size();
  const std::size_t p_count = filter_spectra.front().size();
  out.resize(k_count, SpectrumPlane(filter_spectra.front().height(), filter_spectra.front().width()));
  parallel_for(p_count, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      // (rho I + a a^H) chi = b with a = conj(d):
      // chi = (b - a (a^H b) / (rho + a^H a)) / rho
      Complex ahb{0.0, 0.0};
      double aha = 0.0;
      for (std::size_t k = 0; k < k_count; ++k) {
        const Complex d = filter_spectra[k][p];
        ahb += d * rhs[k][p];
        aha += std::norm(d);
      }
      const Complex coupling = ahb / (rho + aha);
      for (std::size_t k = 0; k < k_count; ++k) {
        out[k][p] = (rhs[k][p] - std::conj(filter_spectra[k][p]) * coupling) / rho;
      }
    }
  });
}

CscResult csc_solve(const ImagePlane& signal, const FilterBank& dictionary, double lambda,
                    const AdmmSettings& settings, const CscOptions& options) {
  check_problem(signal, dictionary);
  require_finite(signal, "signal");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be positive");
  settings.validate();

  const std::size_t h = signal.height();
  const std::size_t w = signal.width();
  const std::size_t k_count = dictionary.size();
  const std::size_t p_count = h * w;

  const SpectrumSet d_hat = bank_spectra(dictionary, h, w);
  const SpectrumPlane s_hat = forward_dft(signal);

  // conj(d_k) s is fixed across iterations.
  SpectrumSet dts(k_count, SpectrumPlane(h, w));
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t p = 0; p < p_count; ++p) dts[k][p] = std::conj(d_hat[k][p]) * s_hat[p];
  }

  CscResult result;
  CoefficientMaps y = detail::zero_stack(k_count, h, w);

  // lambda >= lambda_max: zero maps satisfy the optimality conditions.
  double corr_max = 0.0;
  for (const auto& c : inverse_dft_real(dts)) {
    for (double v : c.values()) corr_max = std::max(corr_max, std::abs(v));
  }
  if (lambda >= corr_max) {
    result.maps = std::move(y);
    result.status.converged = true;
    result.status.final_rho = settings.rho0;
    return result;
  }

  if (options.initial != nullptr) {
    check_maps(signal, dictionary, *options.initial);
    y = *options.initial;
  }
  CoefficientMaps x = y;
  CoefficientMaps u = detail::zero_stack(k_count, h, w);

  double rho = settings.rho0;
  ResidualTracker tracker(settings, k_count * p_count);
  SpectrumSet x_hat;
  SpectrumSet rhs(k_count);

  for (int it = 1; it <= settings.max_iter; ++it) {
    const SpectrumSet v_hat = forward_dft(detail::stack_sub(y, u));
    for (std::size_t k = 0; k < k_count; ++k) {
      rhs[k] = dts[k];
      for (std::size_t p = 0; p < p_count; ++p) rhs[k][p] += rho * v_hat[k][p];
    }
    csc_frequency_solve(d_hat, rhs, rho, x_hat);
    double imag = 0.0;
    x = inverse_dft_real(x_hat, &imag);
    result.max_imag_residue = std::max(result.max_imag_residue, imag);

    const CoefficientMaps xr = detail::relaxed(x, y, settings.relax);
    CoefficientMaps y_prev = std::move(y);
    y = xr;
    const double theta = lambda / rho;
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t p = 0; p < p_count; ++p) {
        y[k][p] = soft_threshold(xr[k][p] + u[k][p], theta);
        u[k][p] += xr[k][p] - y[k][p];
      }
    }

    const double primal = std::sqrt(detail::stack_diff_sq_norm(x, y));
    const double dual = rho * std::sqrt(detail::stack_diff_sq_norm(y, y_prev));
    result.status.iterations = it;
    result.status.primal_residual = primal;
    result.status.dual_residual = dual;

    if (options.observer) options.observer(CscIterate{it, rho, x, y, u});

    if (tracker.converged(primal, dual, std::sqrt(detail::stack_sq_norm(x)),
                          std::sqrt(detail::stack_sq_norm(y)),
                          rho * std::sqrt(detail::stack_sq_norm(u)))) {
      result.status.converged = true;
      break;
    }
    detail::stack_scale(u, tracker.rebalance(primal, dual, rho));
  }

  result.status.final_rho = rho;
  result.maps = std::move(y);
  return result;
}

KktReport kkt_check(const ImagePlane& signal, const FilterBank& dictionary,
                    const CoefficientMaps& maps, double lambda, double active_tol) {
  check_problem(signal, dictionary);
  check_maps(signal, dictionary, maps);
  const ImagePlane r = residual(signal, dictionary, maps);
  const SpectrumPlane r_hat = forward_dft(r);
  KktReport report;
  for (std::size_t k = 0; k < dictionary.size(); ++k) {
    SpectrumPlane g_hat = forward_dft(pad_filter(dictionary.filters[k], signal.height(), signal.width()));
    for (std::size_t p = 0; p < g_hat.size(); ++p) g_hat[p] = std::conj(g_hat[p]) * r_hat[p];
    const ImagePlane g = inverse_dft_real(g_hat);
    for (std::size_t p = 0; p < g.size(); ++p) {
      const double x = maps[k][p];
      if (std::abs(x) > active_tol) {
        report.active_violation =
            std::max(report.active_violation, std::abs(g[p] + lambda * std::copysign(1.0, x)) / lambda);
      } else {
        report.inactive_violation =
            std::max(report.inactive_violation, std::max(std::abs(g[p]) - lambda, 0.0) / lambda);
      }
    }
  }
  return report;
}

}  // namespace ocdl
