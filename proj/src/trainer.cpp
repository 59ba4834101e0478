#include "ocdl/trainer.hpp"

#include <algorithm>
#include <chrono>

#include "ocdl/alg1.hpp"
#include "ocdl/alg2.hpp"
#include "ocdl/csc.hpp"
#include "ocdl/dict_space.hpp"
#include "ocdl/spectral.hpp"

namespace ocdl {

namespace {
constexpr int kDeadFilterPatience = 5;

bool all_zero(const FilterSupport& f) {
  for (double v : f.values) {
    if (v != 0.0) return false;
  }
  return true;
}
}  // namespace

const char* algorithm_name(Algorithm a) { return a == Algorithm::alg1 ? "alg1" : "alg2"; }

Algorithm parse_algorithm(const std::string& name) {
  if (name == "alg1" || name == "1") return Algorithm::alg1;
  if (name == "alg2" || name == "2") return Algorithm::alg2;
  throw InvalidArgument("unknown algorithm '" + name + "' (expected alg1 or alg2)");
}

Trainer::Trainer(const TrainOptions& options, std::size_t height, std::size_t width)
    : options_(options), rng_(options.seed) {
  if (options.filter_size > std::min(height, width)) {
    throw InvalidArgument("filter size exceeds image lattice");
  }
  options.csc.validate();
  options.dictionary.validate();
  state_.algorithm = options.algorithm;
  state_.dictionary = init_dictionary(options.filters, options.filter_size, rng_);
  state_.history = HistoryPair::zeros(options.filters, height, width);
  state_.rho0 = options.dictionary.rho0;
  state_.rng = rng_.state();
  zero_streak_.assign(options.filters, 0);
}

Trainer::Trainer(const TrainOptions& options, TrainerState state)
    : options_(options), state_(std::move(state)) {
  options_.algorithm = state_.algorithm;
  options_.dictionary.rho0 = state_.rho0;
  options_.csc.validate();
  options_.dictionary.validate();
  if (!is_feasible(state_.dictionary, 1e-9)) throw InvalidArgument("resumed dictionary is infeasible");
  rng_.set_state(state_.rng);
  zero_streak_.assign(state_.dictionary.size(), 0);
}

MetricsRow Trainer::step(const ImagePlane& signal) {
  const auto start = std::chrono::steady_clock::now();
  if (signal.height() != state_.height() || signal.width() != state_.width()) {
    throw InvalidArgument("sample lattice " + std::to_string(signal.height()) + "x" +
                          std::to_string(signal.width()) + " differs from trainer lattice");
  }
  require_finite(signal, "sample");

  if (state_.lambda == 0.0) {
    if (options_.lambda_abs) {
      state_.lambda = *options_.lambda_abs;
    } else {
      const double lmax = lambda_max(signal, state_.dictionary);
      if (!(lmax > 0.0)) throw InvalidArgument("lambda_max of the first sample is zero");
      state_.lambda = options_.lambda_frac * lmax;
    }
    if (!(state_.lambda > 0.0)) throw InvalidArgument("lambda must be positive");
  }

  const std::uint64_t n = state_.history.sample_count + 1;
  const CscResult coded = csc_solve(signal, state_.dictionary, state_.lambda, options_.csc);
  const CoefficientMaps& x = coded.maps;

  MetricsRow row;
  row.sample_index = n;
  row.csc_iterations = coded.status.iterations;
  row.csc_objective = csc_objective(signal, state_.dictionary, x, state_.lambda);

  const SpectrumSet x_hat = forward_dft(x);
  if (state_.algorithm == Algorithm::alg1) {
    HistoryPair history = state_.history;
    history.alpha = alg1::alpha_update(history.alpha, x_hat, n);
    history.sample_count = n;
    alg1::StepResult stepped = alg1::dict_step(state_.dictionary, history, signal, x, options_.dictionary);
    state_.dictionary = std::move(stepped.dictionary);
    state_.history = std::move(stepped.history);
    row.dict_iterations = stepped.status.iterations;
    row.approx_fit_term = reconstruction_error(signal, stepped.sample_dictionary, x);
  } else {
    alg2::FitResult d_fit = alg2::d_update(state_.dictionary, state_.history, signal, x, options_.dictionary);
    alg2::FitResult c_fit = alg2::c_update(signal, x, d_fit.dictionary, options_.dictionary);
    SpectrumSet r_hat = bank_spectra(c_fit.dictionary, signal.height(), signal.width());
    for (std::size_t k = 0; k < r_hat.size(); ++k) {
      for (std::size_t p = 0; p < r_hat[k].size(); ++p) r_hat[k][p] *= x_hat[k][p];
    }
    state_.history = alg2::history_update(state_.history, x_hat, r_hat, n);
    state_.dictionary = std::move(d_fit.dictionary);
    row.dict_iterations = d_fit.status.iterations + c_fit.status.iterations;
    row.approx_fit_term = reconstruction_error(signal, c_fit.dictionary, x);
  }

  if (options_.rescue_dead_filters) rescue_dead_filters();
  state_.rng = rng_.state();
  row.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return row;
}

void Trainer::rescue_dead_filters() {
  for (std::size_t k = 0; k < state_.dictionary.size(); ++k) {
    if (!all_zero(state_.dictionary.filters[k])) {
      zero_streak_[k] = 0;
      continue;
    }
    if (++zero_streak_[k] >= kDeadFilterPatience) {
      state_.dictionary.filters[k] = random_unit_filter(state_.dictionary.side, rng_);
      zero_streak_[k] = 0;
    }
  }
}

TrainResult train(const ImageSource& dataset, const TrainOptions& options,
                  const std::function<void(const Trainer&, const MetricsRow&)>& on_sample) {
  if (dataset.size() == 0) throw InvalidArgument("training dataset is empty");
  ImagePlane first = dataset.load(0);
  Trainer trainer(options, first.height(), first.width());
  TrainResult result;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    ImagePlane s = i == 0 ? std::move(first) : dataset.load(i);
    MetricsRow row = trainer.step(s);
    if (on_sample) on_sample(trainer, row);
    result.metrics.push_back(row);
  }
  result.dictionary = trainer.dictionary();
  result.lambda = trainer.lambda();
  result.state = trainer.state();
  return result;
}

TrainResult train_alg1(const ImageSource& dataset, TrainOptions options) {
  options.algorithm = Algorithm::alg1;
  return train(dataset, options);
}

TrainResult train_alg2(const ImageSource& dataset, TrainOptions options) {
  options.algorithm = Algorithm::alg2;
  return train(dataset, options);
}

}  // namespace ocdl
