#include "mfg/mfg_solver.hpp"

#include <cmath>
#include <string>

namespace mfg {

Vector mean_field_update(const Vector& mu_hat_from_actor) {
  return mu_hat_from_actor;
}

MfgResult solve_mfg(const MfgModel& model, const MfgConfig& config,
                    RngState& rng) {
  if (config.S < 1) {
    throw InvalidInput("solve_mfg: S must be at least 1");
  }
  if (config.mu0.size() != model.m()) {
    throw DimMismatch("solve_mfg: mu0 dimension does not match the model");
  }
  if (!(config.budget_growth >= 1.0)) {
    throw InvalidInput("solve_mfg: budget_growth must be at least 1");
  }

  LinearGaussianPolicy pi = config.policy0.K.size() == 0
                                ? LinearGaussianPolicy::zero(model)
                                : config.policy0;

  MfgResult out;
  out.L0 = contraction_constants(model).L0;
  out.contraction_warning = out.L0 >= 1.0;

  bool has_oracle = false;
  Vector mu_star;
  Matrix K_star;
  Vector b_star;
  double J_star = 0.0;
  if (config.oracle_diagnostics && !out.contraction_warning) {
    const NashResult nash = exact_nash(model, config.mu0);
    mu_star = nash.mu_star;
    K_star = nash.policy_star.K;
    b_star = nash.policy_star.b;
    J_star = policy_quantities(model, nash.policy_star, nash.mu_star).J;
    has_oracle = true;
  }

  const auto record = [&](long s, const Vector& mu_s,
                          const LinearGaussianPolicy& pol) {
    MfgRecord rec;
    rec.s = s;
    rec.mu = mu_s;
    if (has_oracle) {
      rec.has_oracle = true;
      rec.mu_err = (mu_s - mu_star).norm();
      rec.K_err = (pol.K - K_star).norm();
      rec.b_err = (pol.b - b_star).norm();
      rec.J_gap = policy_quantities(model, pol, mu_s).J - J_star;
    }
    out.trace.push_back(rec);
  };

  Vector mu = config.mu0;
  record(0, mu, pi);

  ActorConfig acfg = config.actor;
  for (long s = 0; s < config.S; ++s) {
    const ActorResult ar = natural_actor_critic(model, mu, pi, acfg, rng);
    pi = ar.policy;
    out.steps += ar.steps;
    mu = config.exact_mean_update ? lambda2(model, mu, pi)
                                  : mean_field_update(ar.mu_hat);
    record(s + 1, mu, pi);
    acfg.critic_cfg.T = static_cast<long>(
        std::ceil(static_cast<double>(acfg.critic_cfg.T) * config.budget_growth));
    acfg.critic_cfg.T_tilde = static_cast<long>(std::ceil(
        static_cast<double>(acfg.critic_cfg.T_tilde) * config.budget_growth));
  }

  out.policy = pi;
  out.mu = mu;
  return out;
}

}  // namespace mfg
