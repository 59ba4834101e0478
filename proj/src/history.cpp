#include "ocdl/history.hpp"

namespace ocdl {

HistoryPair HistoryPair::zeros(std::size_t filters, std::size_t height, std::size_t width) {
  HistoryPair h;
  h.alpha.assign(filters, ImagePlane(height, width));
  h.beta.assign(filters, SpectrumPlane(height, width));
  return h;
}

}  // namespace ocdl
