#pragma once

#include <cstddef>

namespace ocdl {

/// Shared ADMM controls. Defaults: rho0 = 10, 300 iterations, absolute and
/// relative tolerances 1e-4, over-relaxation 1.8, residual-balancing penalty
/// with mu = 10 and tau = 2.
struct AdmmSettings {
  double rho0 = 10.0;
  int max_iter = 300;
  double eps_abs = 1e-4;
  double eps_rel = 1e-4;
  double relax = 1.8;

  struct VaryPenalty {
    double mu = 10.0;
    double tau = 2.0;
    bool enabled = true;
    int max_changes = 30;
  } vary;

  void validate() const;
};

struct AdmmStatus {
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  bool converged = false;
  double final_rho = 0.0;
};

/// Residual bookkeeping common to every ADMM loop in the library.
/// `dim` is the total number of scalar unknowns in the split variable.
class ResidualTracker {
 public:
  ResidualTracker(const AdmmSettings& settings, std::size_t dim);

  /// Returns true when both residuals are within tolerance.
  ///   primal = ||x - z||,  dual = rho ||z - z_prev||
  ///   eps_pri  = sqrt(dim) eps_abs + eps_rel max(||x||, ||z||)
  ///   eps_dual = sqrt(dim) eps_abs + eps_rel ||rho u||
  bool converged(double primal, double dual, double x_norm, double z_norm, double rho_u_norm) const;

  /// Residual balancing. Returns the factor the scaled dual must be
  /// multiplied by (1 when rho is unchanged) and updates rho in place.
  double rebalance(double primal, double dual, double& rho);

 private:
  const AdmmSettings& settings_;
  double sqrt_dim_;
  int changes_ = 0;
};

}  // namespace ocdl
