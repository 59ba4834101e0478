#include "ocdl/types.hpp"

#include <cmath>

namespace ocdl {

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

double norm2(std::span<const double> v) { return std::sqrt(squared_norm(v)); }

bool is_feasible(const FilterBank& bank, double tol) {
  for (const auto& f : bank.filters) {
    if (f.side != bank.side || f.values.size() != f.side * f.side) return false;
    for (double x : f.values) {
      if (!std::isfinite(x)) return false;
    }
    if (norm2(f.values) > 1.0 + tol) return false;
  }
  return true;
}

void require_finite(const ImagePlane& plane, const char* what) {
  for (double x : plane.values()) {
    if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " contains non-finite values");
  }
}

}  // namespace ocdl
