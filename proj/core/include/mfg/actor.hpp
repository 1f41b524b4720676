#pragma once

#include <vector>

#include "mfg/critic.hpp"

namespace mfg {

enum class CriticKind { exact, pd_gtd, td0 };

struct ActorConfig {
  long N = 0;  // gain-loop iterations
  long H = 0;  // intercept-loop iterations
  double gamma = 0.0;    // <= 0: derive the safe bound from the oracle
  double gamma_b = 0.0;  // <= 0: 1 / iota_K at the intercept loop's gain
  CriticKind critic = CriticKind::exact;
  CriticConfig critic_cfg;
  bool safeguard = true;  // halve a step that would destabilise the gain
  int max_halvings = 10;
  bool oracle_trace = false;
};

struct ActorRecord {
  char phase = 'K';  // 'K' or 'b'
  long iter = 0;
  double rho = 0.0;
  bool has_oracle = false;
  double J1_gap = 0.0;
  double J2_gap = 0.0;
  double K_err = 0.0;
  double b_err = 0.0;
};

struct ActorResult {
  LinearGaussianPolicy policy;
  Vector mu_hat;
  double J_hat = 0.0;
  long steps = 0;
  std::vector<ActorRecord> trace;
};

/// [ ||R||_2 + ||B||_2^2 J0 / sigma_min(Psi_eps) ]^{-1}.
double k_stepsize_bound(const MfgModel& model, double J0);

/// K - gamma (Ups22 K - Ups21).
Matrix natural_k_step(const Matrix& K, const Matrix& Upsilon_hat, double gamma);

/// b - gamma_b [ Ups22 (-K mu_hat + b) + Ups21 mu_hat + q_hat ].
Vector b_step(const Matrix& K, const Vector& b, const CriticEstimate& estimate,
              double gamma_b);

/// Gain loop with b frozen at b0, then intercept loop at the final gain;
/// mu_hat and J_hat come from the last critic run.
ActorResult natural_actor_critic(const MfgModel& model, const Vector& mu,
                                 const LinearGaussianPolicy& policy0,
                                 const ActorConfig& config, RngState& rng);

}  // namespace mfg
