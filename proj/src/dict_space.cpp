#include "ocdl/dict_space.hpp"

#include <cmath>
#include <numeric>

#include "ocdl/csc.hpp"
#include "ocdl/spectral.hpp"

namespace ocdl {

namespace {
// Rescaled filters can land a few ulps above unit norm; without the slack a
// second projection would rescale again.
constexpr double kNormSlack = 1e-14;
}  // namespace

ImagePlane project_plane(const ImagePlane& candidate, std::size_t side) {
  if (side == 0 || side > std::min(candidate.height(), candidate.width())) {
    throw InvalidArgument("project: support side exceeds lattice");
  }
  ImagePlane out(candidate.height(), candidate.width());
  double sq = 0.0;
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double v = candidate(r, c);
      out(r, c) = v;
      sq += v * v;
    }
  }
  const double norm = std::sqrt(sq);
  if (norm > 1.0 + kNormSlack) {
    const double inv = 1.0 / norm;
    for (std::size_t r = 0; r < side; ++r) {
      for (std::size_t c = 0; c < side; ++c) out(r, c) *= inv;
    }
  }
  return out;
}

FilterSupport project_filter(const ImagePlane& candidate, std::size_t side) {
  return crop_filter(project_plane(candidate, side), side);
}

FilterSupport random_unit_filter(std::size_t side, Rng& rng) {
  FilterSupport f(side);
  for (auto& v : f.values) v = rng.normal();
  const double n = norm2(f.values);
  for (auto& v : f.values) v /= n;
  return f;
}

FilterBank init_dictionary(std::size_t filters, std::size_t side, Rng& rng) {
  if (filters == 0 || side == 0) throw InvalidArgument("init_dictionary: K and m must be positive");
  FilterBank bank;
  bank.side = side;
  bank.filters.reserve(filters);
  for (std::size_t k = 0; k < filters; ++k) bank.filters.push_back(random_unit_filter(side, rng));
  return bank;
}

FilterBank init_dictionary(std::size_t filters, std::size_t side, std::uint64_t seed) {
  Rng rng(seed);
  return init_dictionary(filters, side, rng);
}

EvalReport evaluate(const ImageSource& dataset, const FilterBank& dictionary, double lambda,
                    const AdmmSettings& settings) {
  if (dataset.size() == 0) throw InvalidArgument("evaluate: dataset is empty");
  EvalReport report;
  report.lambda_used = lambda;
  report.per_image_objective.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const ImagePlane s = dataset.load(i);
    const CscResult coded = csc_solve(s, dictionary, lambda, settings);
    report.per_image_objective.push_back(csc_objective(s, dictionary, coded.maps, lambda));
  }
  report.mean_objective =
      std::accumulate(report.per_image_objective.begin(), report.per_image_objective.end(), 0.0) /
      static_cast<double>(report.per_image_objective.size());
  return report;
}

}  // namespace ocdl
