#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "mfg/linalg.hpp"

namespace mfg {

/// Infinite-population linear-quadratic game:
/// dynamics x' = A x + B u + A_bar mu + d + omega, omega ~ N(0, Psi_omega),
/// per-step cost x'Qx + u'Ru + mu'Q_bar mu against a mean-field state mu.
struct MfgModel {
  Matrix A;
  Matrix B;
  Matrix A_bar;
  Vector d;
  Matrix Q;
  Matrix R;
  Matrix Q_bar;
  Matrix Psi_omega;
  double sigma = 0.0;

  Eigen::Index m() const { return A.rows(); }
  Eigen::Index k() const { return B.cols(); }

  /// Checks dimensions, symmetry, and definiteness; caches the noise factor.
  void validate() const;

  /// Lower Cholesky factor of Psi_omega (computed on first use).
  const Matrix& noise_chol() const;

 private:
  mutable Matrix noise_chol_;
};

/// pi(x) = -K x + b + sigma * eta, eta ~ N(0, I_k).
struct LinearGaussianPolicy {
  Matrix K;
  Vector b;
  double sigma = 0.0;

  static LinearGaussianPolicy zero(const MfgModel& model);
  Vector mean_action(const Vector& x) const { return -K * x + b; }
};

struct Transition {
  Vector x;
  Vector u;
  double cost = 0.0;
  Vector x_next;
};

/// Seeded source of standard normals; single-owner, one per worker.
class RngState {
 public:
  explicit RngState(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t draws() const { return draws_; }

  /// Independent stream for worker `index` (derived seed = seed + index).
  RngState fork(std::uint64_t index) const { return RngState(seed_ + index); }

  double gauss() {
    ++draws_;
    return normal_(gen_);
  }

  Vector gauss_vec(Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss();
    return v;
  }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t draws_ = 0;
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double cost_of(const MfgModel& model, const Vector& x, const Vector& u,
               const Vector& mu);

/// Draws eta then omega from `rng`, in that order.
Transition step(const MfgModel& model, const LinearGaussianPolicy& policy,
                const Vector& x, const Vector& mu, RngState& rng);

/// Same transition with eta and omega forced to zero (test hook).
Transition step_noiseless(const MfgModel& model,
                          const LinearGaussianPolicy& policy, const Vector& x,
                          const Vector& mu);

/// State after `burn_in` steps from x = 0; requires rho(A - BK) < 1.
Vector sample_stationary_start(const MfgModel& model,
                               const LinearGaussianPolicy& policy,
                               const Vector& mu, RngState& rng,
                               long burn_in = defaults::burn_in);

/// One draw from N(mean, cov); cov must be numerically SPD.
Vector sample_gaussian(const Vector& mean, const Matrix& cov, RngState& rng);

/// Canonical scalar test instance (m = k = 1).
MfgModel scalar_reference();

/// Strict-schema JSON: keys {"A","B","A_bar","d","Q","R","Q_bar","Psi_omega",
/// "sigma"}, matrices as row-major nested arrays. Validates before returning.
MfgModel parse_model(const std::string& json_text);
MfgModel load_model(const std::string& path);

}  // namespace mfg
