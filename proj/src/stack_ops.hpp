#pragma once

// Small helpers over K-plane stacks shared by the ADMM loops.

#include <cmath>

#include "ocdl/types.hpp"

namespace ocdl::detail {

inline double stack_sq_norm(const CoefficientMaps& a) {
  double acc = 0.0;
  for (const auto& p : a) acc += squared_norm(p.values());
  return acc;
}

inline double stack_diff_sq_norm(const CoefficientMaps& a, const CoefficientMaps& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      const double d = a[k][i] - b[k][i];
      acc += d * d;
    }
  }
  return acc;
}

/// out = a - b elementwise.
inline CoefficientMaps stack_sub(const CoefficientMaps& a, const CoefficientMaps& b) {
  CoefficientMaps out = a;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a[k].size(); ++i) out[k][i] -= b[k][i];
  }
  return out;
}

/// Over-relaxed point relax*x + (1 - relax)*z_prev.
inline CoefficientMaps relaxed(const CoefficientMaps& x, const CoefficientMaps& z_prev, double relax) {
  CoefficientMaps out = x;
  if (relax == 1.0) return out;
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (std::size_t i = 0; i < x[k].size(); ++i) {
      out[k][i] = relax * x[k][i] + (1.0 - relax) * z_prev[k][i];
    }
  }
  return out;
}

inline void stack_scale(CoefficientMaps& a, double factor) {
  if (factor == 1.0) return;
  for (auto& p : a) {
    for (auto& v : p.values()) v *= factor;
  }
}

inline CoefficientMaps zero_stack(std::size_t k, std::size_t h, std::size_t w) {
  return CoefficientMaps(k, ImagePlane(h, w));
}

}  // namespace ocdl::detail
