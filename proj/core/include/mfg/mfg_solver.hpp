#pragma once

#include <vector>

#include "mfg/actor.hpp"

namespace mfg {

struct MfgConfig {
  long S = 1;
  Vector mu0;
  LinearGaussianPolicy policy0;  // empty K: start from the zero policy
  ActorConfig actor;             // budgets for the first round
  double budget_growth = 1.5;    // per-round multiplier on critic budgets
  bool exact_mean_update = false;  // mu <- Lambda2(mu, pi) instead of mu_hat
  bool oracle_diagnostics = false;
};

struct MfgRecord {
  long s = 0;
  Vector mu;
  bool has_oracle = false;
  double mu_err = 0.0;
  double K_err = 0.0;
  double b_err = 0.0;
  double J_gap = 0.0;
};

struct MfgResult {
  LinearGaussianPolicy policy;
  Vector mu;
  std::vector<MfgRecord> trace;  // length S + 1, row 0 is the initial state
  long steps = 0;
  double L0 = 0.0;
  bool contraction_warning = false;  // L0 >= 1
};

/// Identity pass-through of the actor's estimated mean, named so the exact
/// variant Lambda2(mu, pi) can be swapped in by configuration.
Vector mean_field_update(const Vector& mu_hat_from_actor);

/// Alternates policy optimisation and mean-field update for S rounds.
MfgResult solve_mfg(const MfgModel& model, const MfgConfig& config,
                    RngState& rng);

}  // namespace mfg
