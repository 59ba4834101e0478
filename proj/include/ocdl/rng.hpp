#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ocdl {

/// xoshiro256** generator. Its whole state is four 64-bit words, which is
/// what the checkpoint stores, so resumed runs continue the same stream.
class Rng {
 public:
  using result_type = std::uint64_t;
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via Box-Muller; platform independent.
  double normal();

  const State& state() const { return state_; }
  void set_state(const State& s) { state_ = s; }

 private:
  State state_{};
};

}  // namespace ocdl
