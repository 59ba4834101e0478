#pragma once

#include <cstdint>

#include "ocdl/types.hpp"

namespace ocdl {

/// Per-filter frequency statistics carried between samples. For the first
/// trainer these are running means with weight 1/N:
///   alpha_k = mean |x_k|^2,   beta_k = mean conj(x_k) t_k.
/// The second trainer keeps the same arrays normalized by 1/(N+1).
/// Together with the dictionary they are the only cross-sample state.
struct HistoryPair {
  std::vector<ImagePlane> alpha;
  SpectrumSet beta;
  std::uint64_t sample_count = 0;

  static HistoryPair zeros(std::size_t filters, std::size_t height, std::size_t width);

  std::size_t filters() const { return alpha.size(); }
  std::size_t height() const { return alpha.empty() ? 0 : alpha.front().height(); }
  std::size_t width() const { return alpha.empty() ? 0 : alpha.front().width(); }

  friend bool operator==(const HistoryPair&, const HistoryPair&) = default;
};

}  // namespace ocdl
