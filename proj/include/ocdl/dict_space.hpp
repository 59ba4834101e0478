#pragma once

#include <cstdint>
#include <vector>

#include "ocdl/admm.hpp"
#include "ocdl/dataset.hpp"
#include "ocdl/rng.hpp"
#include "ocdl/types.hpp"

namespace ocdl {

/// Euclidean projection of a padded plane onto the feasible filter set:
/// zero everything outside the top-left m x m support, then shrink onto the
/// unit l2 ball if the norm exceeds one. Returns the padded result.
ImagePlane project_plane(const ImagePlane& candidate, std::size_t side);

/// Same projection, returning the cropped m x m support.
FilterSupport project_filter(const ImagePlane& candidate, std::size_t side);

/// Unit-norm i.i.d. Gaussian filters drawn from `rng`.
FilterBank init_dictionary(std::size_t filters, std::size_t side, Rng& rng);
FilterBank init_dictionary(std::size_t filters, std::size_t side, std::uint64_t seed);

/// One unit-norm Gaussian support.
FilterSupport random_unit_filter(std::size_t side, Rng& rng);

struct EvalReport {
  std::vector<double> per_image_objective;
  double mean_objective = 0.0;
  double lambda_used = 0.0;
};

/// Codes every image with `dictionary` and reports the sparse coding
/// objective per image and on average (in dataset order).
EvalReport evaluate(const ImageSource& dataset, const FilterBank& dictionary, double lambda,
                    const AdmmSettings& settings);

}  // namespace ocdl
