#include "ocdl/admm.hpp"

#include <algorithm>
#include <cmath>

#include "ocdl/types.hpp"

namespace ocdl {

void AdmmSettings::validate() const {
  if (!(rho0 > 0.0) || !std::isfinite(rho0)) throw InvalidArgument("rho0 must be positive");
  if (max_iter < 1) throw InvalidArgument("max_iter must be at least 1");
  if (!(eps_abs > 0.0) || !(eps_rel > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (!(relax >= 1.0 && relax < 2.0)) throw InvalidArgument("relax must lie in [1, 2)");
  if (vary.enabled && (!(vary.mu > 0.0) || !(vary.tau > 0.0))) {
    throw InvalidArgument("penalty adaptation needs positive mu and tau");
  }
}

ResidualTracker::ResidualTracker(const AdmmSettings& settings, std::size_t dim)
    : settings_(settings), sqrt_dim_(std::sqrt(static_cast<double>(dim))) {}

bool ResidualTracker::converged(double primal, double dual, double x_norm, double z_norm,
                                double rho_u_norm) const {
  const double eps_pri = sqrt_dim_ * settings_.eps_abs + settings_.eps_rel * std::max(x_norm, z_norm);
  const double eps_dual = sqrt_dim_ * settings_.eps_abs + settings_.eps_rel * rho_u_norm;
  return primal <= eps_pri && dual <= eps_dual;
}

double ResidualTracker::rebalance(double primal, double dual, double& rho) {
  const auto& v = settings_.vary;
  if (!v.enabled || changes_ >= v.max_changes) return 1.0;
  if (primal > v.mu * dual) {
    rho *= v.tau;
    ++changes_;
    return 1.0 / v.tau;
  }
  if (dual > v.mu * primal) {
    rho /= v.tau;
    ++changes_;
    return v.tau;
  }
  return 1.0;
}

}  // namespace ocdl
