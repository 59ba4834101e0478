#include <doctest.h>

#include <cmath>

#include "ocdl/parallel.hpp"
#include "ocdl/spectral.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace ocdl;
using ocdl::test::max_abs_diff;

TEST_CASE("delta at origin has an all-ones spectrum") {
  ImagePlane d(4, 4);
  d(0, 0) = 1.0;
  const SpectrumPlane s = forward_dft(d);
  for (const auto& v : s.values()) CHECK(std::abs(v - Complex(1.0, 0.0)) <= 1e-15);
}

TEST_CASE("constant plane puts c*P in the DC bin only") {
  const double c = 0.37;
  const ImagePlane p(5, 7, c);
  const SpectrumPlane s = forward_dft(p);
  CHECK(std::abs(s[0] - Complex(c * 35.0, 0.0)) <= 1e-12);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(std::abs(s[i]) <= 1e-12);
}

TEST_CASE("forward_dft matches the naive double sum") {
  Rng rng(11);
  for (auto [h, w] : {std::pair{8, 8}, {5, 6}, {1, 7}, {3, 1}}) {
    const ImagePlane x = test::random_plane(h, w, rng);
    CHECK(max_abs_diff(forward_dft(x), oracle::naive_dft(x)) <= 1e-10);
  }
}

TEST_CASE("real input spectra are conjugate symmetric") {
  Rng rng(12);
  const ImagePlane x = test::random_plane(6, 10, rng);
  const SpectrumPlane s = forward_dft(x);
  const double scale = test::max_abs(s);
  for (std::size_t u = 0; u < 6; ++u) {
    for (std::size_t v = 0; v < 10; ++v) {
      CHECK(std::abs(s((6 - u) % 6, (10 - v) % 10) - std::conj(s(u, v))) <= 1e-12 * scale);
    }
  }
}

TEST_CASE("round trip and Parseval on random planes") {
  Rng rng(13);
  for (int t = 0; t < 200; ++t) {
    const std::size_t h = 1 + rng() % 12;
    const std::size_t w = 1 + rng() % 12;
    const ImagePlane x = test::random_plane(h, w, rng);
    const SpectrumPlane s = forward_dft(x);
    double imag = 1.0;
    const ImagePlane back = inverse_dft_real(s, &imag);
    const double xn = norm2(x.values());
    CHECK(max_abs_diff(back, x) <= 1e-12 * std::max(1.0, xn));
    CHECK(imag <= 1e-12 * std::max(1.0, xn));
    double spec = 0.0;
    for (const auto& v : s.values()) spec += std::norm(v);
    CHECK(std::abs(spec / static_cast<double>(h * w) - xn * xn) <= 1e-10 * xn * xn);
  }
}

TEST_CASE("complex inverse undoes complex forward") {
  Rng rng(14);
  const SpectrumPlane z = test::random_spectrum(4, 6, rng);
  CHECK(max_abs_diff(inverse_dft(forward_dft(z)), z) <= 1e-12);
}

TEST_CASE("convolution with deltas") {
  Rng rng(15);
  const ImagePlane a = test::random_plane(5, 4, rng);
  ImagePlane d0(5, 4);
  d0(0, 0) = 1.0;
  CHECK(max_abs_diff(circular_convolve(a, d0), a) <= 1e-12);

  ImagePlane d1(5, 4);
  d1(1, 0) = 1.0;
  const ImagePlane shifted = circular_convolve(a, d1);
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(shifted(r, c) - a((r + 4) % 5, c)) <= 1e-12);
  }
}

TEST_CASE("convolution theorem against the spatial loop") {
  Rng rng(16);
  for (int t = 0; t < 100; ++t) {
    const std::size_t h = 1 + rng() % 8;
    const std::size_t w = 1 + rng() % 8;
    const ImagePlane a = test::random_plane(h, w, rng);
    const ImagePlane b = test::random_plane(h, w, rng);
    const ImagePlane fast = circular_convolve(a, b);
    CHECK(max_abs_diff(fast, oracle::spatial_convolve(a, b)) <= 1e-10);
    CHECK(max_abs_diff(fast, circular_convolve(b, a)) <= 1e-12);
  }
  const ImagePlane a = test::random_plane(6, 6, rng);
  const ImagePlane b = test::random_plane(6, 6, rng);
  CHECK(max_abs_diff(circular_convolve(a, b), oracle::spatial_convolve(a, b)) <= 1e-10);
}

TEST_CASE("correlation identities and oracle") {
  Rng rng(17);
  const ImagePlane a = test::random_plane(6, 5, rng);
  const ImagePlane b = test::random_plane(6, 5, rng);
  ImagePlane d0(6, 5);
  d0(0, 0) = 1.0;
  CHECK(max_abs_diff(circular_correlate(d0, b), b) <= 1e-12);
  CHECK(std::abs(circular_correlate(a, a)(0, 0) - squared_norm(a.values())) <= 1e-10);
  CHECK(max_abs_diff(circular_correlate(a, b), oracle::spatial_correlate(a, b)) <= 1e-10);
}

TEST_CASE("shape mismatch is rejected") {
  CHECK_THROWS_AS(circular_convolve(ImagePlane(3, 3), ImagePlane(3, 4)), InvalidArgument);
  CHECK_THROWS_AS(circular_correlate(ImagePlane(3, 3), ImagePlane(4, 3)), InvalidArgument);
}

TEST_CASE("pad and crop") {
  const FilterSupport f(2, {1, 2, 3, 4});
  const ImagePlane p = pad_filter(f, 4, 4);
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (r < 2 && c < 2) {
        CHECK(p(r, c) == f(r, c));
      } else {
        CHECK(p(r, c) == 0.0);
      }
    }
  }
  CHECK(crop_filter(p, 2) == f);
  CHECK(test::max_abs(forward_dft(pad_filter(FilterSupport(3), 5, 5))) == 0.0);
  CHECK_THROWS_AS(pad_filter(FilterSupport(5), 4, 8), InvalidArgument);
  CHECK_THROWS_AS(crop_filter(ImagePlane(4, 4), 5), InvalidArgument);
}

TEST_CASE("batched transforms do not depend on the thread count") {
  Rng rng(18);
  const CoefficientMaps x = test::random_maps(7, 16, 12, rng);
  set_num_threads(1);
  const SpectrumSet one = forward_dft(x);
  const CoefficientMaps back_one = inverse_dft_real(one);
  set_num_threads(4);
  const SpectrumSet four = forward_dft(x);
  const CoefficientMaps back_four = inverse_dft_real(four);
  set_num_threads(1);
  CHECK(one == four);
  CHECK(back_one == back_four);
}
