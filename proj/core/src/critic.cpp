#include "mfg/critic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mfg {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void require_stable_policy(const MfgModel& mdl, const LinearGaussianPolicy& pol,
                           const char* what) {
  const double rho = spectral_radius(mdl.A - mdl.B * pol.K);
  if (rho >= 1.0) {
    throw Unstable(std::string(what) + ": rho(A - BK) = " + std::to_string(rho) +
                   " is not below 1");
  }
}

Transition sim_step(const MfgModel& mdl, const LinearGaussianPolicy& pol,
                    const Vector& x, const Vector& mu, RngState& rng,
                    bool zero_noise, long& steps) {
  ++steps;
  return zero_noise ? step_noiseless(mdl, pol, x, mu)
                    : step(mdl, pol, x, mu, rng);
}

Vector start_state(const MfgModel& mdl, const LinearGaussianPolicy& pol,
                   const Vector& mu, RngState& rng, const StartOptions& opts,
                   long& steps) {
  if (opts.x0 != nullptr) return *opts.x0;
  if (opts.zero_noise) {
    Vector x = Vector::Zero(mdl.m());
    for (long t = 0; t < opts.burn_in; ++t) {
      x = sim_step(mdl, pol, x, mu, rng, true, steps).x_next;
    }
    return x;
  }
  if (opts.exact_start) {
    return sample_stationary_start_exact(mdl, pol, mu, rng);
  }
  steps += opts.burn_in;
  return sample_stationary_start(mdl, pol, mu, rng, opts.burn_in);
}

StartOptions start_options(const CriticConfig& cfg) {
  StartOptions opts;
  opts.burn_in = cfg.burn_in;
  opts.exact_start = cfg.exact_start;
  opts.zero_noise = cfg.zero_noise;
  return opts;
}

void validate_config(const CriticConfig& cfg, const char* what) {
  if (cfg.T < 2 || (!cfg.exact_mean && cfg.T_tilde < 1) || cfg.burn_in < 0) {
    throw InvalidInput(std::string(what) +
                       ": need T >= 2 and T_tilde >= 1");
  }
  if (!(cfg.gamma0 > 0.0)) {
    throw InvalidInput(std::string(what) + ": gamma0 must be positive");
  }
  const auto& P = cfg.projections;
  if (!(P.zeta1_max > 0.0) || !(P.zeta2_radius > 0.0)) {
    throw InvalidInput(std::string(what) +
                       ": primal projection radii must be positive");
  }
}

}  // namespace

Vector feature(const Vector& x, const Vector& u, const Vector& mu_hat,
               const LinearGaussianPolicy& policy) {
  const Eigen::Index m = policy.K.cols();
  const Eigen::Index k = policy.K.rows();
  if (x.size() != m || u.size() != k || mu_hat.size() != m ||
      policy.b.size() != k) {
    throw DimMismatch("feature: argument dimensions do not match the policy");
  }
  Vector w(m + k);
  w.head(m) = x - mu_hat;
  w.tail(k) = u - policy.mean_action(mu_hat);

  Vector out(feature_size(m, k));
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < m + k; ++i) {
    out[idx++] = w[i] * w[i];
    for (Eigen::Index j = i + 1; j < m + k; ++j) {
      out[idx++] = kSqrt2 * w[i] * w[j];
    }
  }
  out.tail(m + k) = w;
  return out;
}

Vector estimate_mean(const MfgModel& model, const LinearGaussianPolicy& policy,
                     const Vector& mu, long T_tilde, RngState& rng,
                     const StartOptions& opts, long* steps_out) {
  if (T_tilde < 1) {
    throw InvalidInput("estimate_mean: T_tilde must be at least 1");
  }
  require_stable_policy(model, policy, "estimate_mean");
  long steps = 0;
  Vector x = start_state(model, policy, mu, rng, opts, steps);
  Vector acc = Vector::Zero(model.m());
  for (long t = 0; t < T_tilde; ++t) {
    x = sim_step(model, policy, x, mu, rng, opts.zero_noise, steps).x_next;
    acc += x;
  }
  if (steps_out != nullptr) *steps_out += steps;
  return acc / static_cast<double>(T_tilde);
}

ProjectionSets default_projection_sets(const MfgModel& model, double J0,
                                       const Matrix& K, ProjectionMode mode,
                                       const ProjectionSets* manual, double C) {
  if (mode == ProjectionMode::manual) {
    if (manual == nullptr) {
      throw InvalidInput("default_projection_sets: manual mode needs radii");
    }
    ProjectionSets out = *manual;
    out.mode = ProjectionMode::manual;
    return out;
  }
  if (!(J0 > 0.0)) {
    throw InvalidInput("default_projection_sets: J0 must be positive");
  }
  const double rho = spectral_radius(model.A - model.B * K);
  if (rho >= 1.0) {
    throw Unstable("default_projection_sets: rho(A - BK) = " +
                   std::to_string(rho) + " is not below 1");
  }

  const double nA = sigma_max(model.A);
  const double nB = sigma_max(model.B);
  const double lam_psi = min_eig_sym(model.Psi_omega);
  const double lam_Q = min_eig_sym(model.Q);
  const double lam_R = min_eig_sym(model.R);
  const double kappa_Q = sigma_max(model.Q) / lam_Q;
  const double kappa_R = sigma_max(model.R) / lam_R;
  const double sqrt_m = std::sqrt(static_cast<double>(model.m()));

  const double M_zeta1 =
      (model.Q.norm() + model.R.norm()) +
      (model.A.squaredNorm() + model.B.squaredNorm()) * sqrt_m * J0 / lam_psi +
      (nA + nB) * J0 * J0 / (lam_psi * lam_Q) +
      ((sigma_max(model.Q) + sigma_max(model.R)) +
       (nA + nB) * (nA + nB) * J0 / lam_psi) *
          J0 * (1.0 / lam_Q + 1.0 / lam_R);
  const double M_zeta2 = (nA + nB) * (kappa_Q + kappa_R);
  const double M_xi = C * (M_zeta1 + M_zeta2) * J0 * J0 / (lam_Q * lam_Q);
  const double Kf = K.norm();

  ProjectionSets out;
  out.zeta1_max = J0;
  out.zeta2_radius = M_zeta1 + M_zeta2 * (1.0 + Kf) / (1.0 - rho);
  out.xi1_max = J0;
  out.xi2_radius = M_xi * std::pow(1.0 + Kf * Kf, 3) / (1.0 - rho);
  out.mode = ProjectionMode::analytic;
  return out;
}

CriticEstimate assemble_estimate(const Vector& alpha_hat, double J_hat,
                                 const Vector& mu_hat,
                                 const LinearGaussianPolicy& policy) {
  const Eigen::Index m = policy.K.cols();
  const Eigen::Index k = policy.K.rows();
  const Eigen::Index N = svec_size(m + k);
  if (alpha_hat.size() != N + m + k || mu_hat.size() != m) {
    throw BadLength("assemble_estimate: parameter length does not match dims");
  }
  CriticEstimate est;
  est.mu_hat = mu_hat;
  est.alpha_hat = alpha_hat;
  est.J_hat = J_hat;
  est.Upsilon_hat = smat(alpha_hat.head(N));
  Vector zhat(m + k);
  zhat << mu_hat, policy.mean_action(mu_hat);
  const Vector lin = 0.5 * alpha_hat.tail(m + k) - est.Upsilon_hat * zhat;
  est.p_hat = lin.head(m);
  est.q_hat = lin.tail(k);
  return est;
}

CriticEstimate pd_gtd(const MfgModel& model, const LinearGaussianPolicy& policy,
                      const Vector& mu, const CriticConfig& config,
                      RngState& rng) {
  validate_config(config, "pd_gtd");
  const auto& P = config.projections;
  if (!(P.xi1_max > 0.0) || !(P.xi2_radius > 0.0)) {
    throw InvalidInput("pd_gtd: dual projection radii must be positive");
  }
  require_stable_policy(model, policy, "pd_gtd");

  long steps = 0;
  const Vector mu_hat =
      config.exact_mean
          ? stationary_mean(model, policy, mu)
          : estimate_mean(model, policy, mu, config.T_tilde, rng,
                          start_options(config), &steps);

  const Eigen::Index F = feature_size(model.m(), model.k());
  PdState st;
  st.zeta1 = 0.5 * P.zeta1_max;  // center of the primal box
  st.zeta2 = Vector::Zero(F);
  st.xi1 = 0.0;
  st.xi2 = Vector::Zero(F);

  // The first of the T evaluation transitions only primes the feature pair;
  // the remaining T - 1 drive updates.
  Vector x0 = start_state(model, policy, mu, rng, start_options(config), steps);
  Transition tr = sim_step(model, policy, x0, mu, rng, config.zero_noise, steps);
  Vector psi = feature(tr.x, tr.u, mu_hat, policy);

  double wsum = 0.0;
  double J_acc = 0.0;
  Vector a_acc = Vector::Zero(F);
  for (long t = 1; t < config.T; ++t) {
    const Transition trn =
        sim_step(model, policy, tr.x_next, mu, rng, config.zero_noise, steps);
    const Vector psin = feature(trn.x, trn.u, mu_hat, policy);
    const double gamma = config.gamma0 / std::sqrt(static_cast<double>(t));

    const double drift = (psi - psin).dot(st.zeta2);
    const double delta = st.zeta1 + drift - tr.cost;
    const double z1 = st.zeta1 - gamma * (st.xi1 + psi.dot(st.xi2));
    // sample of the primal gradient Theta' xi2 = E[(psi - psi')(psi' xi2)]
    const Vector z2 = st.zeta2 - gamma * psi.dot(st.xi2) * (psi - psin);
    const double y1 = (1.0 - gamma) * st.xi1 + gamma * (st.zeta1 - tr.cost);
    const Vector y2 = (1.0 - gamma) * st.xi2 + gamma * delta * psi;

    st.zeta1 = std::clamp(z1, 0.0, P.zeta1_max);
    st.zeta2 = project_ball(z2, P.zeta2_radius);
    st.xi1 = std::clamp(y1, -P.xi1_max, P.xi1_max);
    st.xi2 = project_ball(y2, P.xi2_radius);
    if (!std::isfinite(st.zeta1) || !st.zeta2.allFinite() ||
        !std::isfinite(st.xi1) || !st.xi2.allFinite()) {
      throw NonFinite("pd_gtd: iterates diverged; check radii and gamma0");
    }

    wsum += gamma;
    J_acc += gamma * st.zeta1;
    a_acc.noalias() += gamma * st.zeta2;
    if (config.trace_out != nullptr && config.trace_alpha_ref != nullptr) {
      config.trace_out->push_back((st.zeta2 - *config.trace_alpha_ref).norm());
    }
    tr = trn;
    psi = psin;
  }

  CriticEstimate est =
      assemble_estimate(a_acc / wsum, J_acc / wsum, mu_hat, policy);
  est.steps = steps;
  return est;
}

CriticEstimate td0(const MfgModel& model, const LinearGaussianPolicy& policy,
                   const Vector& mu, const CriticConfig& config,
                   RngState& rng) {
  validate_config(config, "td0");
  const auto& P = config.projections;
  require_stable_policy(model, policy, "td0");

  long steps = 0;
  const Vector mu_hat =
      config.exact_mean
          ? stationary_mean(model, policy, mu)
          : estimate_mean(model, policy, mu, config.T_tilde, rng,
                          start_options(config), &steps);

  const Eigen::Index F = feature_size(model.m(), model.k());
  double zeta1 = 0.5 * P.zeta1_max;
  Vector zeta2 = Vector::Zero(F);

  Vector x0 = start_state(model, policy, mu, rng, start_options(config), steps);
  Transition tr = sim_step(model, policy, x0, mu, rng, config.zero_noise, steps);
  Vector psi = feature(tr.x, tr.u, mu_hat, policy);

  double wsum = 0.0;
  double J_acc = 0.0;
  Vector a_acc = Vector::Zero(F);
  for (long t = 1; t < config.T; ++t) {
    const Transition trn =
        sim_step(model, policy, tr.x_next, mu, rng, config.zero_noise, steps);
    const Vector psin = feature(trn.x, trn.u, mu_hat, policy);
    const double gamma = config.gamma0 / std::sqrt(static_cast<double>(t));

    const double delta = zeta1 + (psi - psin).dot(zeta2) - tr.cost;
    zeta1 = std::clamp((1.0 - gamma) * zeta1 + gamma * tr.cost, 0.0, P.zeta1_max);
    zeta2 = project_ball(Vector(zeta2 - gamma * delta * psi), P.zeta2_radius);
    if (!std::isfinite(zeta1) || !zeta2.allFinite()) {
      throw NonFinite("td0: iterates diverged; check radii and gamma0");
    }

    wsum += gamma;
    J_acc += gamma * zeta1;
    a_acc.noalias() += gamma * zeta2;
    if (config.trace_out != nullptr && config.trace_alpha_ref != nullptr) {
      config.trace_out->push_back((zeta2 - *config.trace_alpha_ref).norm());
    }
    tr = trn;
    psi = psin;
  }

  CriticEstimate est =
      assemble_estimate(a_acc / wsum, J_acc / wsum, mu_hat, policy);
  est.steps = steps;
  return est;
}

void pd_exact_step(PdState& state, double gamma, const Matrix& Theta,
                   const Vector& E_psi, const Vector& E_cpsi, double J) {
  const double z1 = state.zeta1 - gamma * (state.xi1 + E_psi.dot(state.xi2));
  const Vector z2 = state.zeta2 - gamma * (Theta.transpose() * state.xi2);
  const double y1 = (1.0 - gamma) * state.xi1 + gamma * (state.zeta1 - J);
  const Vector y2 =
      (1.0 - gamma) * state.xi2 +
      gamma * (E_psi * state.zeta1 + Theta * state.zeta2 - E_cpsi);
  state.zeta1 = z1;
  state.zeta2 = z2;
  state.xi1 = y1;
  state.xi2 = y2;
}

CriticEstimate exact_critic(const MfgModel& model,
                            const LinearGaussianPolicy& policy,
                            const Vector& mu) {
  const QParams qp = q_params(model, policy, mu);
  CriticEstimate est;
  est.mu_hat = stationary_mean(model, policy, mu);
  est.Upsilon_hat = qp.Upsilon;
  est.p_hat = qp.p;
  est.q_hat = qp.q;
  est.alpha_hat = qp.alpha;
  est.J_hat = policy_quantities(model, policy, mu).J;
  est.steps = 0;
  return est;
}

}  // namespace mfg
