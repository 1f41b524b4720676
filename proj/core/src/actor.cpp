#include "mfg/actor.hpp"

#include <cmath>
#include <optional>
#include <string>

namespace mfg {

namespace {

double j1_of(const MfgModel& mdl, const Matrix& K) {
  return (bellman_P(mdl, K) * psi_eps(mdl)).trace();
}

}  // namespace

double k_stepsize_bound(const MfgModel& model, double J0) {
  const double denom = sigma_max(model.R) +
                       std::pow(sigma_max(model.B), 2) * J0 /
                           min_eig_sym(psi_eps(model));
  return 1.0 / denom;
}

Matrix natural_k_step(const Matrix& K, const Matrix& Upsilon_hat,
                      double gamma) {
  const Eigen::Index k = K.rows();
  const Eigen::Index m = K.cols();
  if (Upsilon_hat.rows() != m + k || Upsilon_hat.cols() != m + k) {
    throw DimMismatch("natural_k_step: Upsilon block dims do not match K");
  }
  const Matrix U22 = Upsilon_hat.bottomRightCorner(k, k);
  const Matrix U21 = Upsilon_hat.bottomLeftCorner(k, m);
  return K - gamma * (U22 * K - U21);
}

Vector b_step(const Matrix& K, const Vector& b, const CriticEstimate& estimate,
              double gamma_b) {
  const Eigen::Index k = K.rows();
  const Eigen::Index m = K.cols();
  if (estimate.Upsilon_hat.rows() != m + k || estimate.mu_hat.size() != m ||
      estimate.q_hat.size() != k || b.size() != k) {
    throw DimMismatch("b_step: estimate dims do not match the policy");
  }
  const Matrix U22 = estimate.Upsilon_hat.bottomRightCorner(k, k);
  const Matrix U21 = estimate.Upsilon_hat.bottomLeftCorner(k, m);
  return b - gamma_b * (U22 * (-K * estimate.mu_hat + b) +
                        U21 * estimate.mu_hat + estimate.q_hat);
}

ActorResult natural_actor_critic(const MfgModel& model, const Vector& mu,
                                 const LinearGaussianPolicy& policy0,
                                 const ActorConfig& config, RngState& rng) {
  if (config.N < 0 || config.H < 0) {
    throw InvalidInput("natural_actor_critic: N and H must be nonnegative");
  }
  if (mu.size() != model.m()) {
    throw DimMismatch("natural_actor_critic: mu does not match the model");
  }
  {
    const double rho0 = spectral_radius(model.A - model.B * policy0.K);
    if (rho0 >= 1.0) {
      throw Unstable("natural_actor_critic: rho(A - BK0) = " +
                     std::to_string(rho0) + " is not below 1");
    }
  }

  double gamma = config.gamma;
  if (gamma <= 0.0) {
    gamma = k_stepsize_bound(model, policy_quantities(model, policy0, mu).J);
  }

  // Oracle references for the trace.
  Matrix K_star;
  double J1_star = 0.0;
  if (config.oracle_trace) {
    K_star = riccati_gain(model);
    J1_star = j1_of(model, K_star);
  }

  ActorResult out;
  out.policy = policy0;

  std::optional<CriticEstimate> last;
  const auto run_critic = [&](const LinearGaussianPolicy& pol) {
    CriticEstimate est;
    switch (config.critic) {
      case CriticKind::exact:
        est = exact_critic(model, pol, mu);
        break;
      case CriticKind::pd_gtd:
        est = pd_gtd(model, pol, mu, config.critic_cfg, rng);
        break;
      case CriticKind::td0:
        est = td0(model, pol, mu, config.critic_cfg, rng);
        break;
    }
    out.steps += est.steps;
    last = est;
    return est;
  };

  for (long n = 0; n < config.N; ++n) {
    const CriticEstimate est = run_critic(out.policy);
    double g = gamma;
    Matrix K_next = natural_k_step(out.policy.K, est.Upsilon_hat, g);
    double rho = spectral_radius(model.A - model.B * K_next);
    int halvings = 0;
    while (config.safeguard && rho >= 1.0 - defaults::stab_margin &&
           halvings < config.max_halvings) {
      g *= 0.5;
      ++halvings;
      K_next = natural_k_step(out.policy.K, est.Upsilon_hat, g);
      rho = spectral_radius(model.A - model.B * K_next);
    }
    if (rho >= 1.0 - defaults::stab_margin) {
      throw UnstableIterate("natural_actor_critic: gain update at n = " +
                            std::to_string(n) + " left the stable region, rho = " +
                            std::to_string(rho));
    }
    out.policy.K = K_next;

    ActorRecord rec;
    rec.phase = 'K';
    rec.iter = n;
    rec.rho = rho;
    if (config.oracle_trace) {
      rec.has_oracle = true;
      rec.J1_gap = j1_of(model, K_next) - J1_star;
      rec.K_err = (K_next - K_star).norm();
    }
    out.trace.push_back(rec);
  }

  double gamma_b = config.gamma_b;
  if (config.H > 0 && gamma_b <= 0.0) {
    gamma_b = 1.0 / convexity_constants(model, out.policy.K).iota_K;
  }
  Vector b_opt;
  double J2_opt = 0.0;
  if (config.oracle_trace && config.H > 0) {
    b_opt = optimal_b(model, out.policy.K, mu);
    J2_opt = optimal_J2(model, mu);
  }

  for (long h = 0; h < config.H; ++h) {
    const CriticEstimate est = run_critic(out.policy);
    out.policy.b = b_step(out.policy.K, out.policy.b, est, gamma_b);

    ActorRecord rec;
    rec.phase = 'b';
    rec.iter = h;
    rec.rho = spectral_radius(model.A - model.B * out.policy.K);
    if (config.oracle_trace) {
      rec.has_oracle = true;
      rec.J2_gap = policy_quantities(model, out.policy, mu).J2 - J2_opt;
      rec.b_err = (out.policy.b - b_opt).norm();
    }
    out.trace.push_back(rec);
  }

  if (!last.has_value()) last = run_critic(out.policy);
  out.mu_hat = last->mu_hat;
  out.J_hat = last->J_hat;
  return out;
}

}  // namespace mfg
