#include "mfg/oracle.hpp"

#include <cmath>
#include <string>

namespace mfg {

namespace {

Matrix closed_loop(const MfgModel& mdl, const Matrix& K) {
  return mdl.A - mdl.B * K;
}

void require_stable(const MfgModel& mdl, const Matrix& K, const char* what) {
  const double rho = spectral_radius(closed_loop(mdl, K));
  if (rho >= 1.0) {
    throw Unstable(std::string(what) + ": rho(A - BK) = " + std::to_string(rho) +
                   " is not below 1");
  }
}

Matrix effective_noise(const MfgModel& mdl, double sigma) {
  return sigma * sigma * mdl.B * mdl.B.transpose() + mdl.Psi_omega;
}

/// (I - A) Q^{-1} (I - A)' + B R^{-1} B'.
Matrix coupling_gram(const MfgModel& mdl) {
  const Matrix IA = Matrix::Identity(mdl.m(), mdl.m()) - mdl.A;
  return IA * solve_checked(mdl.Q, IA.transpose()) +
         mdl.B * solve_checked(mdl.R, mdl.B.transpose());
}

struct FullQuantities {
  PolicyQuantities pq;
  Matrix Upsilon;
  Vector p;
  Vector q;
  Vector g;       // A_bar mu + d
  Vector u_bar;   // -K mu_Kb + b
  double q_const = 0.0;
};

FullQuantities full_quantities(const MfgModel& mdl,
                               const LinearGaussianPolicy& pol,
                               const Vector& mu) {
  if (pol.K.rows() != mdl.k() || pol.K.cols() != mdl.m() ||
      pol.b.size() != mdl.k() || mu.size() != mdl.m()) {
    throw DimMismatch("oracle: policy or mean-field dimensions do not match");
  }
  require_stable(mdl, pol.K, "oracle");

  const Eigen::Index m = mdl.m();
  const Matrix D = closed_loop(mdl, pol.K);
  const Matrix M = Matrix::Identity(m, m) - D;  // I - A + BK

  FullQuantities f;
  auto& pq = f.pq;
  f.g = mdl.A_bar * mu + mdl.d;
  pq.Psi_eps = effective_noise(mdl, pol.sigma);
  pq.mu_Kb = solve_checked(M, mdl.B * pol.b + f.g, 1e-12);
  pq.Phi_K = solve_lyapunov(D, pq.Psi_eps);
  Matrix S = mdl.Q + pol.K.transpose() * mdl.R * pol.K;
  S = 0.5 * (S + S.transpose()).eval();
  pq.P_K = solve_lyapunov(D.transpose(), S);
  pq.f_Kb = solve_checked(
      M.transpose(),
      Vector(D.transpose() * (pq.P_K * (mdl.B * pol.b + f.g)) -
             pol.K.transpose() * (mdl.R * pol.b)),
      defaults::solve_tol);

  const Vector Rb = mdl.R * pol.b;
  pq.J1 = (pq.P_K * pq.Psi_eps).trace();
  pq.J2 = pq.mu_Kb.dot(S * pq.mu_Kb) - 2.0 * Rb.dot(pol.K * pq.mu_Kb) +
          pol.b.dot(Rb);
  pq.J = pq.J1 + pq.J2 + pol.sigma * pol.sigma * mdl.R.trace() +
         mu.dot(mdl.Q_bar * mu);

  f.u_bar = -pol.K * pq.mu_Kb + pol.b;

  const Matrix PA = pq.P_K * mdl.A;
  const Matrix PB = pq.P_K * mdl.B;
  Matrix U(m + mdl.k(), m + mdl.k());
  U.topLeftCorner(m, m) = mdl.Q + mdl.A.transpose() * PA;
  U.topRightCorner(m, mdl.k()) = mdl.A.transpose() * PB;
  U.bottomLeftCorner(mdl.k(), m) = mdl.B.transpose() * PA;
  U.bottomRightCorner(mdl.k(), mdl.k()) = mdl.R + mdl.B.transpose() * PB;
  f.Upsilon = 0.5 * (U + U.transpose());

  const Vector h = pq.P_K * f.g + pq.f_Kb;
  f.p = mdl.A.transpose() * h;
  f.q = mdl.B.transpose() * h;

  const double trPPhi = (pq.P_K * pq.Phi_K).trace();
  const double trPBB = (mdl.B.transpose() * pq.P_K * mdl.B).trace();
  f.q_const = f.g.dot(pq.P_K * f.g) + 2.0 * pq.f_Kb.dot(f.g - pq.mu_Kb) -
              pq.mu_Kb.dot((S + pq.P_K) * pq.mu_Kb) +
              2.0 * Rb.dot(pol.K * pq.mu_Kb) - pol.b.dot(Rb) -
              pol.sigma * pol.sigma * (mdl.R.trace() + trPBB) - trPPhi;
  return f;
}

Matrix riccati_gain_impl(const MfgModel& mdl, double* residual_out) {
  try {
    const RiccatiResult rr =
        solve_riccati(mdl.A, mdl.B, mdl.Q, mdl.R, defaults::ric_tol,
                      defaults::max_ric_iters);
    if (residual_out != nullptr) *residual_out = rr.residual;
    return rr.gain;
  } catch (const NoConvergence& e) {
    throw RiccatiFailure(std::string("riccati_gain: ") + e.what());
  }
}

}  // namespace

Matrix psi_eps(const MfgModel& model, bool literal_sigma) {
  if (literal_sigma) {
    return model.sigma * model.B * model.B.transpose() + model.Psi_omega;
  }
  return effective_noise(model, model.sigma);
}

Vector stationary_mean(const MfgModel& model,
                       const LinearGaussianPolicy& policy, const Vector& mu) {
  require_stable(model, policy.K, "stationary_mean");
  const Matrix M = Matrix::Identity(model.m(), model.m()) -
                   closed_loop(model, policy.K);
  return solve_checked(M, Vector(model.B * policy.b + model.A_bar * mu + model.d),
                       1e-12);
}

Matrix stationary_cov(const MfgModel& model,
                      const LinearGaussianPolicy& policy) {
  require_stable(model, policy.K, "stationary_cov");
  return solve_lyapunov(closed_loop(model, policy.K),
                        effective_noise(model, policy.sigma));
}

Matrix bellman_P(const MfgModel& model, const Matrix& K) {
  require_stable(model, K, "bellman_P");
  Matrix S = model.Q + K.transpose() * model.R * K;
  S = 0.5 * (S + S.transpose()).eval();
  return solve_lyapunov(closed_loop(model, K).transpose(), S);
}

PolicyQuantities policy_quantities(const MfgModel& model,
                                   const LinearGaussianPolicy& policy,
                                   const Vector& mu) {
  return full_quantities(model, policy, mu).pq;
}

QParams q_params(const MfgModel& model, const LinearGaussianPolicy& policy,
                 const Vector& mu) {
  const FullQuantities f = full_quantities(model, policy, mu);
  QParams out;
  out.Upsilon = f.Upsilon;
  out.p = f.p;
  out.q = f.q;

  const Eigen::Index mk = model.m() + model.k();
  Vector zbar(mk);
  zbar << f.pq.mu_Kb, f.u_bar;
  Vector lin(mk);
  lin << f.p, f.q;
  out.alpha.resize(svec_size(mk) + mk);
  out.alpha.head(svec_size(mk)) = svec(f.Upsilon);
  out.alpha.tail(mk) = 2.0 * (f.Upsilon * zbar + lin);
  // Constant of the linear representation: the feature vanishes at zbar.
  out.beta = zbar.dot(f.Upsilon * zbar) + 2.0 * lin.dot(zbar) + f.q_const;
  return out;
}

double eval_V(const MfgModel& model, const LinearGaussianPolicy& policy,
              const Vector& mu, const Vector& x) {
  if (x.size() != model.m()) {
    throw DimMismatch("eval_V: state dimension does not match the model");
  }
  const PolicyQuantities pq = policy_quantities(model, policy, mu);
  return x.dot(pq.P_K * x) - (pq.P_K * pq.Phi_K).trace() +
         2.0 * pq.f_Kb.dot(x - pq.mu_Kb) - pq.mu_Kb.dot(pq.P_K * pq.mu_Kb);
}

double eval_Q(const MfgModel& model, const LinearGaussianPolicy& policy,
              const Vector& mu, const Vector& x, const Vector& u) {
  if (x.size() != model.m() || u.size() != model.k()) {
    throw DimMismatch("eval_Q: argument dimensions do not match the model");
  }
  const FullQuantities f = full_quantities(model, policy, mu);
  Vector z(model.m() + model.k());
  z << x, u;
  Vector lin(model.m() + model.k());
  lin << f.p, f.q;
  return z.dot(f.Upsilon * z) + 2.0 * lin.dot(z) + f.q_const;
}

Matrix grad_K_J1(const MfgModel& model, const Matrix& K) {
  require_stable(model, K, "grad_K_J1");
  const Matrix P = bellman_P(model, K);
  const Matrix U22 = model.R + model.B.transpose() * P * model.B;
  const Matrix U21 = model.B.transpose() * P * model.A;
  const Matrix Phi =
      solve_lyapunov(closed_loop(model, K), effective_noise(model, model.sigma));
  return 2.0 * (U22 * K - U21) * Phi;
}

Vector grad_b_J2(const MfgModel& model, const LinearGaussianPolicy& policy,
                 const Vector& mu) {
  const FullQuantities f = full_quantities(model, policy, mu);
  const Eigen::Index m = model.m();
  const Eigen::Index k = model.k();
  const Matrix U21 = f.Upsilon.bottomLeftCorner(k, m);
  const Matrix U22 = f.Upsilon.bottomRightCorner(k, k);
  return 2.0 * (U22 * f.u_bar + U21 * f.pq.mu_Kb + f.q);
}

Vector optimal_b(const MfgModel& model, const Matrix& K, const Vector& mu) {
  const Eigen::Index m = model.m();
  const Matrix IA = Matrix::Identity(m, m) - model.A;
  const Vector g = model.A_bar * mu + model.d;
  const Vector w = solve_checked(coupling_gram(model), g);
  return K * solve_checked(model.Q, Vector(IA.transpose() * w)) -
         solve_checked(model.R, Vector(model.B.transpose() * w));
}

double optimal_J2(const MfgModel& model, const Vector& mu) {
  const Vector g = model.A_bar * mu + model.d;
  return g.dot(Vector(solve_checked(coupling_gram(model), g)));
}

ConvexityDiagnostics convexity_constants(const MfgModel& model,
                                         const Matrix& K) {
  require_stable(model, K, "convexity_constants");
  const Eigen::Index m = model.m();
  const Eigen::Index k = model.k();
  const Matrix M = Matrix::Identity(m, m) - closed_loop(model, K);
  const Matrix Z = solve_checked(M, model.B);  // (I - A + BK)^{-1} B
  const Matrix Y1 = spd_sqrt(model.R) * (K * Z - Matrix::Identity(k, k));
  const Matrix Y2 = spd_sqrt(model.Q) * Z;
  Matrix H = Y1.transpose() * Y1 + Y2.transpose() * Y2;
  H = 0.5 * (H + H.transpose()).eval();
  ConvexityDiagnostics out;
  out.nu_K = sigma_min(H);
  out.iota_K = sigma_max(H);
  out.hessian = 2.0 * H;
  return out;
}

ZChain build_z_chain(const MfgModel& model, const LinearGaussianPolicy& policy,
                     const Vector& mu) {
  require_stable(model, policy.K, "build_z_chain");
  const Eigen::Index m = model.m();
  const Eigen::Index k = model.k();
  const Vector g = model.A_bar * mu + model.d;

  ZChain zc;
  zc.L.resize(m + k, m + k);
  zc.L.topLeftCorner(m, m) = model.A;
  zc.L.topRightCorner(m, k) = model.B;
  zc.L.bottomLeftCorner(k, m) = -policy.K * model.A;
  zc.L.bottomRightCorner(k, k) = -policy.K * model.B;

  zc.nu.resize(m + k);
  zc.nu << g, Vector(-policy.K * g + policy.b);

  zc.Psi_delta.resize(m + k, m + k);
  zc.Psi_delta.topLeftCorner(m, m) = model.Psi_omega;
  zc.Psi_delta.topRightCorner(m, k) = -model.Psi_omega * policy.K.transpose();
  zc.Psi_delta.bottomLeftCorner(k, m) = -policy.K * model.Psi_omega;
  zc.Psi_delta.bottomRightCorner(k, k) =
      policy.K * model.Psi_omega * policy.K.transpose() +
      policy.sigma * policy.sigma * Matrix::Identity(k, k);

  zc.mu_z = solve_checked(Matrix(Matrix::Identity(m + k, m + k) - zc.L), zc.nu);
  zc.Sigma_z = solve_lyapunov(zc.L, zc.Psi_delta);
  return zc;
}

ThetaForm theta_closed_form(const MfgModel& model,
                            const LinearGaussianPolicy& policy,
                            const Vector& mu) {
  const ZChain zc = build_z_chain(model, policy, mu);
  const Eigen::Index mk = zc.L.rows();
  const Eigen::Index N = svec_size(mk);

  ThetaForm out;
  out.Theta = Matrix::Zero(N + mk, N + mk);
  out.Theta.topLeftCorner(N, N) =
      2.0 * sym_kron(zc.Sigma_z, zc.Sigma_z) *
      (Matrix::Identity(N, N) - sym_kron(zc.L, zc.L)).transpose();
  out.Theta.bottomRightCorner(mk, mk) =
      zc.Sigma_z * (Matrix::Identity(mk, mk) - zc.L).transpose();

  out.E_psi = Vector::Zero(N + mk);
  out.E_psi.head(N) = svec(zc.Sigma_z);

  out.Theta_tilde = Matrix::Zero(1 + N + mk, 1 + N + mk);
  out.Theta_tilde(0, 0) = 1.0;
  out.Theta_tilde.col(0).tail(N + mk) = out.E_psi;
  out.Theta_tilde.bottomRightCorner(N + mk, N + mk) = out.Theta;
  out.sigma_min_tilde = sigma_min(out.Theta_tilde);
  return out;
}

Vector expected_cost_feature(const MfgModel& model,
                             const LinearGaussianPolicy& policy,
                             const Vector& mu) {
  const FullQuantities f = full_quantities(model, policy, mu);
  const ZChain zc = build_z_chain(model, policy, mu);
  const Eigen::Index m = model.m();
  const Eigen::Index k = model.k();
  const Eigen::Index mk = m + k;

  Matrix W = Matrix::Zero(mk, mk);
  W.topLeftCorner(m, m) = model.Q;
  W.bottomRightCorner(k, k) = model.R;

  const double s = f.pq.mu_Kb.dot(model.Q * f.pq.mu_Kb) +
                   f.u_bar.dot(model.R * f.u_bar) + mu.dot(model.Q_bar * mu);

  Matrix M1 = 2.0 * zc.Sigma_z * W * zc.Sigma_z +
              (W * zc.Sigma_z).trace() * zc.Sigma_z;
  M1 = 0.5 * (M1 + M1.transpose()).eval();

  Vector lin(mk);
  lin << Vector(2.0 * model.Q * f.pq.mu_Kb), Vector(2.0 * model.R * f.u_bar);

  Vector out(svec_size(mk) + mk);
  out.head(svec_size(mk)) = svec(M1) + s * svec(zc.Sigma_z);
  out.tail(mk) = zc.Sigma_z * lin;
  return out;
}

Matrix riccati_gain(const MfgModel& model) {
  return riccati_gain_impl(model, nullptr);
}

LinearGaussianPolicy lambda1(const MfgModel& model, const Vector& mu) {
  return lambda1(model, mu, riccati_gain(model));
}

LinearGaussianPolicy lambda1(const MfgModel& model, const Vector& mu,
                             const Matrix& K_star) {
  LinearGaussianPolicy pol;
  pol.K = K_star;
  pol.b = optimal_b(model, K_star, mu);
  pol.sigma = model.sigma;
  return pol;
}

Vector lambda2(const MfgModel& model, const Vector& mu,
               const LinearGaussianPolicy& policy) {
  return stationary_mean(model, policy, mu);
}

Vector lambda_op(const MfgModel& model, const Vector& mu) {
  return lambda2(model, mu, lambda1(model, mu));
}

ContractionDiagnostics contraction_constants(const MfgModel& model) {
  ContractionDiagnostics out;
  out.K_star = riccati_gain_impl(model, &out.riccati_residual);

  const Eigen::Index m = model.m();
  const Matrix IA = Matrix::Identity(m, m) - model.A;
  const Matrix T = out.K_star * solve_checked(model.Q, IA.transpose()) -
                   solve_checked(model.R, model.B.transpose());
  out.L1 = sigma_max(solve_checked(coupling_gram(model), model.A_bar)) *
           sigma_max(T);
  const double rho_star = spectral_radius(model.A - model.B * out.K_star);
  out.L2 = sigma_max(model.A_bar) / (1.0 - rho_star);
  out.L3 = sigma_max(model.B) / (1.0 - rho_star);
  out.L0 = out.L1 * out.L3 + out.L2;
  return out;
}

NashResult exact_nash(const MfgModel& model, const Vector& mu0, double tol,
                      long max_iters) {
  if (!(tol > 0.0)) {
    throw InvalidInput("exact_nash: tol must be positive");
  }
  if (mu0.size() != model.m()) {
    throw DimMismatch("exact_nash: mu0 dimension does not match the model");
  }
  NashResult out;
  out.contraction = contraction_constants(model);
  if (out.contraction.L0 >= 1.0) {
    throw NotContraction("exact_nash: L0 = " + std::to_string(out.contraction.L0) +
                         " is not below 1");
  }
  Vector mu = mu0;
  out.iterates.push_back(mu);
  bool done = false;
  while (out.iters < max_iters) {
    ++out.iters;
    const Vector mu_next =
        lambda2(model, mu, lambda1(model, mu, out.contraction.K_star));
    out.iterates.push_back(mu_next);
    const double resid = (mu_next - mu).norm();
    mu = mu_next;
    if (resid <= tol) {
      done = true;
      break;
    }
  }
  if (!done) {
    throw NoConvergence("exact_nash: no convergence after " +
                        std::to_string(out.iters) + " iterations");
  }
  out.mu_star = mu;
  out.policy_star = lambda1(model, mu, out.contraction.K_star);
  out.fixedpoint_residual = (lambda2(model, mu, out.policy_star) - mu).norm();
  return out;
}

Vector sample_stationary_start_exact(const MfgModel& model,
                                     const LinearGaussianPolicy& policy,
                                     const Vector& mu, RngState& rng) {
  return sample_gaussian(stationary_mean(model, policy, mu),
                         stationary_cov(model, policy), rng);
}

}  // namespace mfg
