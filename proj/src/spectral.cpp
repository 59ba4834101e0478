#include "ocdl/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "ocdl/parallel.hpp"

namespace ocdl {

namespace {

// fftw_plan_* is not thread safe; fftw_execute_dft is, given buffers with
// the alignment the plan was created for. Every buffer passed to a plan
// comes from fftw_malloc so codelet selection never depends on where the
// caller's vector happened to land.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t h, std::size_t w, int sign) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(h, w, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    const std::size_t n = h * w;
    auto* in = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    auto* out = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(h), static_cast<int>(w), in, out, sign,
                                      FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

struct AlignedBuffer {
  fftw_complex* ptr = nullptr;
  std::size_t capacity = 0;

  fftw_complex* reserve(std::size_t n) {
    if (n > capacity) {
      if (ptr != nullptr) fftw_free(ptr);
      ptr = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
      capacity = n;
    }
    return ptr;
  }
  ~AlignedBuffer() {
    if (ptr != nullptr) fftw_free(ptr);
  }
};

struct Scratch {
  AlignedBuffer in;
  AlignedBuffer out;
};

Scratch& scratch() {
  thread_local Scratch s;
  return s;
}

template <typename Load>
SpectrumPlane transform(std::size_t h, std::size_t w, int sign, Load&& load, double scale) {
  const std::size_t n = h * w;
  auto& s = scratch();
  fftw_complex* in = s.in.reserve(n);
  fftw_complex* out = s.out.reserve(n);
  load(in);
  fftw_execute_dft(PlanCache::instance().get(h, w, sign), in, out);
  SpectrumPlane result(h, w);
  for (std::size_t i = 0; i < n; ++i) result[i] = Complex(out[i][0] * scale, out[i][1] * scale);
  return result;
}

void check_same(const ImagePlane& a, const ImagePlane& b, const char* op) {
  if (!a.same_shape(b)) throw InvalidArgument(std::string(op) + ": lattice dimensions differ");
}

}  // namespace

SpectrumPlane forward_dft(const ImagePlane& plane) {
  return transform(
      plane.height(), plane.width(), FFTW_FORWARD,
      [&](fftw_complex* in) {
        for (std::size_t i = 0; i < plane.size(); ++i) {
          in[i][0] = plane[i];
          in[i][1] = 0.0;
        }
      },
      1.0);
}

SpectrumPlane forward_dft(const SpectrumPlane& plane) {
  return transform(
      plane.height(), plane.width(), FFTW_FORWARD,
      [&](fftw_complex* in) {
        for (std::size_t i = 0; i < plane.size(); ++i) {
          in[i][0] = plane[i].real();
          in[i][1] = plane[i].imag();
        }
      },
      1.0);
}

SpectrumPlane inverse_dft(const SpectrumPlane& spectrum) {
  return transform(
      spectrum.height(), spectrum.width(), FFTW_BACKWARD,
      [&](fftw_complex* in) {
        for (std::size_t i = 0; i < spectrum.size(); ++i) {
          in[i][0] = spectrum[i].real();
          in[i][1] = spectrum[i].imag();
        }
      },
      1.0 / static_cast<double>(spectrum.size()));
}

ImagePlane inverse_dft_real(const SpectrumPlane& spectrum, double* max_imag) {
  SpectrumPlane full = inverse_dft(spectrum);
  ImagePlane out(full.height(), full.width());
  double worst = 0.0;
  for (std::size_t i = 0; i < full.size(); ++i) {
    out[i] = full[i].real();
    worst = std::max(worst, std::abs(full[i].imag()));
  }
  if (max_imag != nullptr) *max_imag = worst;
  return out;
}

SpectrumSet forward_dft(const CoefficientMaps& planes) {
  SpectrumSet out(planes.size());
  parallel_for(
      planes.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = forward_dft(planes[i]);
      },
      1);
  return out;
}

CoefficientMaps inverse_dft_real(const SpectrumSet& spectra, double* max_imag) {
  CoefficientMaps out(spectra.size());
  std::vector<double> residue(spectra.size(), 0.0);
  parallel_for(
      spectra.size(),
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = inverse_dft_real(spectra[i], &residue[i]);
      },
      1);
  if (max_imag != nullptr) *max_imag = *std::max_element(residue.begin(), residue.end());
  return out;
}

ImagePlane circular_convolve(const ImagePlane& a, const ImagePlane& b) {
  check_same(a, b, "circular_convolve");
  SpectrumPlane fa = forward_dft(a);
  const SpectrumPlane fb = forward_dft(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
  return inverse_dft_real(fa);
}

ImagePlane circular_correlate(const ImagePlane& a, const ImagePlane& b) {
  check_same(a, b, "circular_correlate");
  SpectrumPlane fa = forward_dft(a);
  const SpectrumPlane fb = forward_dft(b);
  for (std::size_t i = 0; i < fa.size(); ++i) fa[i] = std::conj(fa[i]) * fb[i];
  return inverse_dft_real(fa);
}

ImagePlane pad_filter(const FilterSupport& filter, std::size_t height, std::size_t width) {
  const std::size_t m = filter.side;
  if (m == 0 || m > std::min(height, width)) {
    throw InvalidArgument("pad_filter: support side " + std::to_string(m) +
                          " does not fit lattice " + std::to_string(height) + "x" +
                          std::to_string(width));
  }
  ImagePlane out(height, width);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < m; ++c) out(r, c) = filter(r, c);
  }
  return out;
}

FilterSupport crop_filter(const ImagePlane& plane, std::size_t side) {
  if (side == 0 || side > std::min(plane.height(), plane.width())) {
    throw InvalidArgument("crop_filter: support side exceeds lattice");
  }
  FilterSupport out(side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) out(r, c) = plane(r, c);
  }
  return out;
}

CoefficientMaps pad_bank(const FilterBank& bank, std::size_t height, std::size_t width) {
  CoefficientMaps out;
  out.reserve(bank.size());
  for (const auto& f : bank.filters) out.push_back(pad_filter(f, height, width));
  return out;
}

SpectrumSet bank_spectra(const FilterBank& bank, std::size_t height, std::size_t width) {
  return forward_dft(pad_bank(bank, height, width));
}

ImagePlane synthesize(const SpectrumSet& filter_spectra, const SpectrumSet& map_spectra) {
  if (filter_spectra.size() != map_spectra.size() || filter_spectra.empty()) {
    throw InvalidArgument("synthesize: filter and map counts differ");
  }
  const auto& shape = map_spectra.front();
  SpectrumPlane sum(shape.height(), shape.width());
  for (std::size_t k = 0; k < map_spectra.size(); ++k) {
    if (!filter_spectra[k].same_shape(shape) || !map_spectra[k].same_shape(shape)) {
      throw InvalidArgument("synthesize: lattice dimensions differ");
    }
    for (std::size_t p = 0; p < sum.size(); ++p) sum[p] += filter_spectra[k][p] * map_spectra[k][p];
  }
  return inverse_dft_real(sum);
}

}  // namespace ocdl
