#pragma once

#include <vector>

#include "mfg/model.hpp"

namespace mfg {

/// Everything about one fixed stationary policy in closed form.
struct PolicyQuantities {
  Vector mu_Kb;    // stationary state mean
  Matrix Phi_K;    // stationary state covariance
  Matrix P_K;      // quadratic value term
  Vector f_Kb;     // linear value term
  Matrix Psi_eps;  // effective noise covariance sigma^2 BB' + Psi_omega
  double J1 = 0.0;
  double J2 = 0.0;
  double J = 0.0;  // J1 + J2 + sigma^2 tr(R) + mu'Q_bar mu
};

/// Quadratic action-value representation Q(x,u) = z'Ups z + 2(p;q)'z + const,
/// plus the linear parameterisation (alpha, beta) against the feature vector:
/// alpha = (svec(Ups); 2(Ups zbar + (p;q))) so that Q = psi'alpha + beta with
/// psi centred at the stationary pair zbar.
struct QParams {
  Matrix Upsilon;
  Vector p;
  Vector q;
  Vector alpha;
  double beta = 0.0;

  Eigen::Index m() const { return p.size(); }
  Eigen::Index k() const { return q.size(); }
  Matrix U11() const { return Upsilon.topLeftCorner(m(), m()); }
  Matrix U12() const { return Upsilon.topRightCorner(m(), k()); }
  Matrix U21() const { return Upsilon.bottomLeftCorner(k(), m()); }
  Matrix U22() const { return Upsilon.bottomRightCorner(k(), k()); }
};

/// Stationary law of the joint chain z = (x; u).
struct ZChain {
  Matrix L;
  Vector nu;
  Vector mu_z;
  Matrix Sigma_z;
  Matrix Psi_delta;
};

struct ThetaForm {
  Matrix Theta;
  Matrix Theta_tilde;
  Vector E_psi;                 // stationary feature mean (svec(Sigma_z); 0)
  double sigma_min_tilde = 0.0; // smallest singular value of Theta_tilde
};

struct ConvexityDiagnostics {
  double nu_K = 0.0;    // sigma_min(Y1'Y1 + Y2'Y2)
  double iota_K = 0.0;  // sigma_max of the same matrix
  Matrix hessian;       // d^2 J2 / db^2 = 2 (Y1'Y1 + Y2'Y2)
};

struct ContractionDiagnostics {
  Matrix K_star;
  double L1 = 0.0;
  double L2 = 0.0;
  double L3 = 0.0;
  double L0 = 0.0;  // L1*L3 + L2
  double riccati_residual = 0.0;
};

struct NashResult {
  Vector mu_star;
  LinearGaussianPolicy policy_star;
  double fixedpoint_residual = 0.0;
  long iters = 0;
  ContractionDiagnostics contraction;
  std::vector<Vector> iterates;  // mu_0, mu_1, ..., mu_star
};

/// sigma^2 BB' + Psi_omega; pass literal_sigma = true to audit the
/// first-power convention sigma BB' + Psi_omega instead.
Matrix psi_eps(const MfgModel& model, bool literal_sigma = false);

Vector stationary_mean(const MfgModel& model,
                       const LinearGaussianPolicy& policy, const Vector& mu);

Matrix stationary_cov(const MfgModel& model,
                      const LinearGaussianPolicy& policy);

Matrix bellman_P(const MfgModel& model, const Matrix& K);

PolicyQuantities policy_quantities(const MfgModel& model,
                                   const LinearGaussianPolicy& policy,
                                   const Vector& mu);

QParams q_params(const MfgModel& model, const LinearGaussianPolicy& policy,
                 const Vector& mu);

double eval_V(const MfgModel& model, const LinearGaussianPolicy& policy,
              const Vector& mu, const Vector& x);

double eval_Q(const MfgModel& model, const LinearGaussianPolicy& policy,
              const Vector& mu, const Vector& x, const Vector& u);

Matrix grad_K_J1(const MfgModel& model, const Matrix& K);

Vector grad_b_J2(const MfgModel& model, const LinearGaussianPolicy& policy,
                 const Vector& mu);

/// Minimiser of J2(K, .) in closed form; independent of K at the optimum.
Vector optimal_b(const MfgModel& model, const Matrix& K, const Vector& mu);

/// J2(K, b^K), which does not depend on K.
double optimal_J2(const MfgModel& model, const Vector& mu);

ConvexityDiagnostics convexity_constants(const MfgModel& model,
                                         const Matrix& K);

ZChain build_z_chain(const MfgModel& model, const LinearGaussianPolicy& policy,
                     const Vector& mu);

ThetaForm theta_closed_form(const MfgModel& model,
                            const LinearGaussianPolicy& policy,
                            const Vector& mu);

/// Stationary expectation of cost times feature, E[c(z) psi(z)].
Vector expected_cost_feature(const MfgModel& model,
                             const LinearGaussianPolicy& policy,
                             const Vector& mu);

/// Discrete-time Riccati gain for (A, B, Q, R); wraps iteration failure
/// into RiccatiFailure.
Matrix riccati_gain(const MfgModel& model);

/// Best response to a fixed mean-field state.
LinearGaussianPolicy lambda1(const MfgModel& model, const Vector& mu);
LinearGaussianPolicy lambda1(const MfgModel& model, const Vector& mu,
                             const Matrix& K_star);

/// Stationary mean induced by (mu, policy).
Vector lambda2(const MfgModel& model, const Vector& mu,
               const LinearGaussianPolicy& policy);

/// Composed update Lambda(mu) = Lambda2(mu, Lambda1(mu)).
Vector lambda_op(const MfgModel& model, const Vector& mu);

ContractionDiagnostics contraction_constants(const MfgModel& model);

/// Banach iteration mu <- Lambda(mu); requires L0 < 1.
NashResult exact_nash(const MfgModel& model, const Vector& mu0,
                      double tol = 1e-10, long max_iters = 10000);

/// Exact draw from the stationary law N(mu_Kb, Phi_K).
Vector sample_stationary_start_exact(const MfgModel& model,
                                     const LinearGaussianPolicy& policy,
                                     const Vector& mu, RngState& rng);

}  // namespace mfg
