#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ocdl/admm.hpp"
#include "ocdl/dataset.hpp"
#include "ocdl/history.hpp"
#include "ocdl/rng.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

enum class Algorithm : std::uint8_t { alg1 = 1, alg2 = 2 };

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

struct TrainOptions {
  Algorithm algorithm = Algorithm::alg2;
  std::size_t filters = 16;
  std::size_t filter_size = 8;
  std::uint64_t seed = 0;
  AdmmSettings csc;
  AdmmSettings dictionary;
  /// lambda = lambda_frac * lambda_max(first image, initial dictionary)
  /// unless lambda_abs is set.
  double lambda_frac = 0.1;
  std::optional<double> lambda_abs;
  /// Re-draw a filter that stays identically zero for 5 consecutive samples.
  bool rescue_dead_filters = false;
};

/// Everything that survives between samples; exactly what a checkpoint holds.
struct TrainerState {
  Algorithm algorithm = Algorithm::alg2;
  FilterBank dictionary;
  HistoryPair history;
  /// Zero until fixed by the first sample.
  double lambda = 0.0;
  double rho0 = 10.0;
  Rng::State rng{};

  std::size_t height() const { return history.height(); }
  std::size_t width() const { return history.width(); }
  std::uint64_t samples_seen() const { return history.sample_count; }

  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

struct MetricsRow {
  std::uint64_t sample_index = 0;
  int csc_iterations = 0;
  int dict_iterations = 0;
  /// Sparse coding objective of the sample under the dictionary it was coded with.
  double csc_objective = 0.0;
  /// (1/2) ||sum_k c_k * x_k - s||^2 for the per-sample dictionary c^N.
  double approx_fit_term = 0.0;
  double wall_time_seconds = 0.0;
};

class Trainer {
 public:
  /// Fresh run on an H x W lattice with a seeded random dictionary.
  Trainer(const TrainOptions& options, std::size_t height, std::size_t width);
  /// Resume from a saved state. The state's algorithm, lambda and rho0 win
  /// over the options.
  Trainer(const TrainOptions& options, TrainerState state);

  /// Codes `signal`, updates the dictionary and commits the history.
  MetricsRow step(const ImagePlane& signal);

  const TrainerState& state() const { return state_; }
  const FilterBank& dictionary() const { return state_.dictionary; }
  double lambda() const { return state_.lambda; }

 private:
  void rescue_dead_filters();

  TrainOptions options_;
  TrainerState state_;
  Rng rng_;
  std::vector<int> zero_streak_;
};

struct TrainResult {
  FilterBank dictionary;
  double lambda = 0.0;
  std::vector<MetricsRow> metrics;
  TrainerState state;
};

/// One sequential pass over `dataset`. `on_sample` (optional) runs after
/// every sample with the trainer, e.g. for checkpointing.
TrainResult train(const ImageSource& dataset, const TrainOptions& options,
                  const std::function<void(const Trainer&, const MetricsRow&)>& on_sample = {});

TrainResult train_alg1(const ImageSource& dataset, TrainOptions options);
TrainResult train_alg2(const ImageSource& dataset, TrainOptions options);

}  // namespace ocdl
