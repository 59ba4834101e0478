#pragma once

// Shared fixtures for the test binaries.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <vector>

#include "ocdl/dict_space.hpp"
#include "ocdl/rng.hpp"
#include "ocdl/spectral.hpp"
#include "ocdl/types.hpp"

namespace ocdl::test {

inline ImagePlane random_plane(std::size_t h, std::size_t w, Rng& rng, double scale = 1.0) {
  ImagePlane p(h, w);
  for (double& v : p.values()) v = scale * rng.normal();
  return p;
}

inline CoefficientMaps random_maps(std::size_t k, std::size_t h, std::size_t w, Rng& rng, double scale = 1.0) {
  CoefficientMaps x;
  for (std::size_t i = 0; i < k; ++i) x.push_back(random_plane(h, w, rng, scale));
  return x;
}

/// Sparse maps: each entry is nonzero with probability `density`.
inline CoefficientMaps sparse_maps(std::size_t k, std::size_t h, std::size_t w, double density, Rng& rng) {
  CoefficientMaps x(k, ImagePlane(h, w));
  for (auto& xk : x) {
    for (double& v : xk.values()) {
      if (rng.uniform() < density) v = rng.normal();
    }
  }
  return x;
}

inline SpectrumPlane random_spectrum(std::size_t h, std::size_t w, Rng& rng) {
  SpectrumPlane p(h, w);
  for (Complex& v : p.values()) v = Complex(rng.normal(), rng.normal());
  return p;
}

inline SpectrumSet random_spectra(std::size_t k, std::size_t h, std::size_t w, Rng& rng) {
  SpectrumSet s;
  for (std::size_t i = 0; i < k; ++i) s.push_back(random_spectrum(h, w, rng));
  return s;
}

inline std::vector<ImagePlane> random_alpha(std::size_t k, std::size_t h, std::size_t w, Rng& rng) {
  std::vector<ImagePlane> a;
  for (std::size_t i = 0; i < k; ++i) {
    ImagePlane p(h, w);
    for (double& v : p.values()) v = std::abs(rng.normal()) * 2.0;
    a.push_back(std::move(p));
  }
  return a;
}

inline FilterBank zero_bank(std::size_t k, std::size_t m) { return FilterBank{m, std::vector<FilterSupport>(k, FilterSupport(m))}; }

inline double max_abs_diff(const ImagePlane& a, const ImagePlane& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const SpectrumPlane& a, const SpectrumPlane& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <typename P>
double max_abs_diff(const std::vector<P>& a, const std::vector<P>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, max_abs_diff(a[k], b[k]));
  return m;
}

inline double max_abs(const SpectrumPlane& a) {
  double m = 0.0;
  for (const auto& v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs(const ImagePlane& a) {
  double m = 0.0;
  for (double v : a.values()) m = std::max(m, std::abs(v));
  return m;
}

template <typename P>
double max_abs(const std::vector<P>& a) {
  double m = 0.0;
  for (const auto& p : a) m = std::max(m, max_abs(p));
  return m;
}

inline double bank_distance(const FilterBank& a, const FilterBank& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    for (std::size_t i = 0; i < a.filters[k].values.size(); ++i) {
      const double d = a.filters[k].values[i] - b.filters[k].values[i];
      s += d * d;
    }
  }
  return std::sqrt(s);
}

/// Best |normalized correlation| of `f` against the filters of `bank`,
/// allowing cyclic shifts within the support.
inline double best_match(const FilterSupport& f, const FilterBank& bank) {
  const std::size_t m = f.side;
  const double fn = norm2(f.values);
  double best = 0.0;
  for (const auto& g : bank.filters) {
    const double gn = norm2(g.values);
    if (fn == 0.0 || gn == 0.0) continue;
    for (std::size_t dr = 0; dr < m; ++dr) {
      for (std::size_t dc = 0; dc < m; ++dc) {
        double acc = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          for (std::size_t c = 0; c < m; ++c) acc += f(r, c) * g((r + dr) % m, (c + dc) % m);
        }
        best = std::max(best, std::abs(acc) / (fn * gn));
      }
    }
  }
  return best;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto p = std::filesystem::temp_directory_path() /
           ("ocdl_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace ocdl::test
