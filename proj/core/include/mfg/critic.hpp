#pragma once

#include <vector>

#include "mfg/model.hpp"
#include "mfg/oracle.hpp"

namespace mfg {

enum class ProjectionMode { analytic, manual };

/// V_zeta = [0, zeta1_max] x ball(zeta2_radius); V_xi analogous with a
/// symmetric box [-xi1_max, xi1_max].
struct ProjectionSets {
  double zeta1_max = 0.0;
  double zeta2_radius = 0.0;
  double xi1_max = 0.0;
  double xi2_radius = 0.0;
  ProjectionMode mode = ProjectionMode::manual;
};

struct PdState {
  double zeta1 = 0.0;
  Vector zeta2;
  double xi1 = 0.0;
  Vector xi2;
};

/// Start-state policy for simulated phases.
struct StartOptions {
  long burn_in = defaults::burn_in;
  bool exact_start = false;   // draw from the oracle stationary law
  bool zero_noise = false;    // force eta = omega = 0 (test hook)
  const Vector* x0 = nullptr; // explicit start; skips burn-in and sampling
};

struct CriticConfig {
  long T = 100000;  // evaluation-phase transitions; the first only primes
  long T_tilde = 10000;
  double gamma0 = 0.5;
  ProjectionSets projections;
  long burn_in = defaults::burn_in;
  bool exact_start = false;
  bool exact_mean = false;  // use the oracle stationary mean, skip the phase
  bool zero_noise = false;
  // Optional per-iteration distance of zeta2 to a reference parameter.
  const Vector* trace_alpha_ref = nullptr;
  std::vector<double>* trace_out = nullptr;
};

struct CriticEstimate {
  Vector mu_hat;
  Matrix Upsilon_hat;
  Vector p_hat;
  Vector q_hat;
  Vector alpha_hat;
  double J_hat = 0.0;
  long steps = 0;  // simulator transitions consumed, burn-in included
};

inline Eigen::Index feature_size(Eigen::Index m, Eigen::Index k) {
  return svec_size(m + k) + (m + k);
}

/// psi(x, u) = (svec(w w'); w) with w = (x; u) - (mu_hat; -K mu_hat + b).
Vector feature(const Vector& x, const Vector& u, const Vector& mu_hat,
               const LinearGaussianPolicy& policy);

/// Average of the T_tilde states visited after the start state.
Vector estimate_mean(const MfgModel& model, const LinearGaussianPolicy& policy,
                     const Vector& mu, long T_tilde, RngState& rng,
                     const StartOptions& opts = {}, long* steps_out = nullptr);

/// Radii per the ball-construction bounds (analytic) or an echo of
/// caller-supplied radii (manual). C scales the dual radius.
ProjectionSets default_projection_sets(
    const MfgModel& model, double J0, const Matrix& K,
    ProjectionMode mode = ProjectionMode::analytic,
    const ProjectionSets* manual = nullptr, double C = 10.0);

/// Primal-dual gradient temporal-difference policy evaluation.
CriticEstimate pd_gtd(const MfgModel& model, const LinearGaussianPolicy& policy,
                      const Vector& mu, const CriticConfig& config,
                      RngState& rng);

/// TD(0) policy evaluation; projects onto V_zeta only.
CriticEstimate td0(const MfgModel& model, const LinearGaussianPolicy& policy,
                   const Vector& mu, const CriticConfig& config, RngState& rng);

/// One population-level primal-dual update (expectations in place of samples,
/// no projection); fixed point is (zeta = (J, alpha), xi = 0).
void pd_exact_step(PdState& state, double gamma, const Matrix& Theta,
                   const Vector& E_psi, const Vector& E_cpsi, double J);

/// Output-line algebra shared by both critics: Upsilon_hat = smat(alpha block
/// 1), (p_hat; q_hat) = alpha block 2 / 2 - Upsilon_hat (mu_hat; -K mu_hat+b).
CriticEstimate assemble_estimate(const Vector& alpha_hat, double J_hat,
                                 const Vector& mu_hat,
                                 const LinearGaussianPolicy& policy);

/// Oracle-backed estimate with the same interface as the sampled critics.
CriticEstimate exact_critic(const MfgModel& model,
                            const LinearGaussianPolicy& policy,
                            const Vector& mu);

}  // namespace mfg
