#include "mfg/model.hpp"

#include <string>

namespace mfg {

namespace {

void require_sym_matrix(const Matrix& M, Eigen::Index n, const char* name) {
  if (M.rows() != n || M.cols() != n) {
    throw DimMismatch(std::string("model: ") + name + " must be " +
                      std::to_string(n) + "x" + std::to_string(n));
  }
  if ((M - M.transpose()).norm() > defaults::sym_tol * M.norm()) {
    throw NotSymmetric(std::string("model: ") + name + " is not symmetric");
  }
}

}  // namespace

void MfgModel::validate() const {
  const Eigen::Index mm = m();
  const Eigen::Index kk = k();
  if (mm < 1 || kk < 1 || A.cols() != mm || B.rows() != mm || d.size() != mm ||
      A_bar.rows() != mm || A_bar.cols() != mm) {
    throw DimMismatch("model: A must be m x m, B m x k, A_bar m x m, d length m");
  }
  require_sym_matrix(Q, mm, "Q");
  require_sym_matrix(R, kk, "R");
  require_sym_matrix(Q_bar, mm, "Q_bar");
  require_sym_matrix(Psi_omega, mm, "Psi_omega");
  if (min_eig_sym(Q) <= 0.0) {
    throw CholeskyFailure("model: Q must be positive definite");
  }
  if (min_eig_sym(R) <= 0.0) {
    throw CholeskyFailure("model: R must be positive definite");
  }
  if (min_eig_sym(Psi_omega) <= 0.0) {
    throw CholeskyFailure("model: Psi_omega must be positive definite");
  }
  if (min_eig_sym(Q_bar) < -defaults::sym_tol * (1.0 + Q_bar.norm())) {
    throw CholeskyFailure("model: Q_bar must be positive semidefinite");
  }
  if (!(sigma > 0.0)) {
    throw InvalidInput("model: sigma must be positive");
  }
  noise_chol_ = cholesky(Psi_omega);
}

const Matrix& MfgModel::noise_chol() const {
  if (noise_chol_.size() == 0) noise_chol_ = cholesky(Psi_omega);
  return noise_chol_;
}

LinearGaussianPolicy LinearGaussianPolicy::zero(const MfgModel& model) {
  LinearGaussianPolicy p;
  p.K = Matrix::Zero(model.k(), model.m());
  p.b = Vector::Zero(model.k());
  p.sigma = model.sigma;
  return p;
}

double cost_of(const MfgModel& model, const Vector& x, const Vector& u,
               const Vector& mu) {
  if (x.size() != model.m() || u.size() != model.k() || mu.size() != model.m()) {
    throw DimMismatch("cost_of: argument dimensions do not match the model");
  }
  return x.dot(model.Q * x) + u.dot(model.R * u) + mu.dot(model.Q_bar * mu);
}

Transition step(const MfgModel& model, const LinearGaussianPolicy& policy,
                const Vector& x, const Vector& mu, RngState& rng) {
  Transition tr;
  tr.x = x;
  tr.u = policy.mean_action(x) + policy.sigma * rng.gauss_vec(model.k());
  tr.cost = cost_of(model, x, tr.u, mu);
  tr.x_next = model.A * x + model.B * tr.u + model.A_bar * mu + model.d +
              model.noise_chol() * rng.gauss_vec(model.m());
  return tr;
}

Transition step_noiseless(const MfgModel& model,
                          const LinearGaussianPolicy& policy, const Vector& x,
                          const Vector& mu) {
  Transition tr;
  tr.x = x;
  tr.u = policy.mean_action(x);
  tr.cost = cost_of(model, x, tr.u, mu);
  tr.x_next = model.A * x + model.B * tr.u + model.A_bar * mu + model.d;
  return tr;
}

Vector sample_stationary_start(const MfgModel& model,
                               const LinearGaussianPolicy& policy,
                               const Vector& mu, RngState& rng, long burn_in) {
  const double rho = spectral_radius(model.A - model.B * policy.K);
  if (rho >= 1.0) {
    throw Unstable("sample_stationary_start: rho(A - BK) = " +
                   std::to_string(rho) + " is not below 1");
  }
  Vector x = Vector::Zero(model.m());
  for (long t = 0; t < burn_in; ++t) {
    x = step(model, policy, x, mu, rng).x_next;
  }
  return x;
}

Vector sample_gaussian(const Vector& mean, const Matrix& cov, RngState& rng) {
  return mean + cholesky(cov) * rng.gauss_vec(mean.size());
}

MfgModel scalar_reference() {
  MfgModel mdl;
  mdl.A = Matrix::Constant(1, 1, 0.5);
  mdl.B = Matrix::Constant(1, 1, 1.0);
  mdl.A_bar = Matrix::Constant(1, 1, 0.2);
  mdl.d = Vector::Constant(1, 0.1);
  mdl.Q = Matrix::Constant(1, 1, 1.0);
  mdl.R = Matrix::Constant(1, 1, 1.0);
  mdl.Q_bar = Matrix::Constant(1, 1, 0.5);
  mdl.Psi_omega = Matrix::Constant(1, 1, 0.04);
  mdl.sigma = 0.1;
  mdl.validate();
  return mdl;
}

}  // namespace mfg
