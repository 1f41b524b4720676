#pragma once

#include <Eigen/Dense>

#include "mfg/errors.hpp"

namespace mfg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace defaults {
inline constexpr double sym_tol = 1e-10;
inline constexpr double lyap_tol = 1e-12;
inline constexpr double ric_tol = 1e-10;
inline constexpr double stab_margin = 1e-8;
inline constexpr double solve_tol = 1e-8;
inline constexpr long max_ric_iters = 1000000;
inline constexpr long burn_in = 1000;
}  // namespace defaults

/// Length of svec(M) for an n x n symmetric M.
inline Eigen::Index svec_size(Eigen::Index n) { return n * (n + 1) / 2; }

/// Side length n recovered from a packed length n(n+1)/2; throws BadLength.
Eigen::Index smat_size(Eigen::Index packed_len);

/// Packs a symmetric matrix into a vector: upper-triangular entries read
/// row-major, off-diagonal entries scaled by sqrt(2) so that
/// <svec(M), svec(N)> equals the Frobenius inner product <M, N>.
Vector svec(const Matrix& M, double sym_tol = defaults::sym_tol);

/// Inverse of svec.
Matrix smat(const Vector& v);

/// Symmetric Kronecker product: the operator on packed symmetric vectors
/// with sym_kron(G, H) * svec(M) == svec((H*M*G^T + G*M*H^T) / 2).
Matrix sym_kron(const Matrix& G, const Matrix& H);

/// Largest absolute eigenvalue.
double spectral_radius(const Matrix& M);

/// Solves X = D*X*D^T + S for symmetric X; requires rho(D) < 1 - stab_margin
/// and symmetric S. Residual contract: |X - DXD^T - S|_F <= tol*(1 + |X|_F).
Matrix solve_lyapunov(const Matrix& D, const Matrix& S,
                      double tol = defaults::lyap_tol,
                      double stab_margin = defaults::stab_margin);

struct RiccatiResult {
  Matrix X;
  Matrix gain;      ///< K = (B^T X B + R)^{-1} B^T X A
  double residual = 0.0;
  long iters = 0;
};

/// Solves X = A^T X A + Q - A^T X B (B^T X B + R)^{-1} B^T X A by damped
/// fixed-point iteration from X = Q; the returned gain is stabilizing.
RiccatiResult solve_riccati(const Matrix& A, const Matrix& B, const Matrix& Q,
                            const Matrix& R, double tol = defaults::ric_tol,
                            long max_iters = defaults::max_ric_iters);

/// Euclidean projection onto the closed ball of given radius about center.
Vector project_ball(const Vector& v, const Vector& center, double radius);

/// Projection onto the origin-centered ball (common case).
Vector project_ball(const Vector& v, double radius);

/// Linear solve M X = rhs with a residual check; throws SingularSolve when
/// |M X - rhs| > solve_tol * |rhs|. Vector right-hand sides pass through as
/// one-column matrices.
Matrix solve_checked(const Matrix& M, const Matrix& rhs,
                     double tol = defaults::solve_tol);

/// Symmetric positive-semidefinite square root; throws CholeskyFailure if the
/// input has an eigenvalue below -1e-10.
Matrix spd_sqrt(const Matrix& M);

/// Lower Cholesky factor L with L L^T = M; throws CholeskyFailure.
Matrix cholesky(const Matrix& M);

/// Extreme singular values (2-norm and its smallest counterpart).
double sigma_min(const Matrix& M);
double sigma_max(const Matrix& M);

/// Smallest eigenvalue of a symmetric matrix.
double min_eig_sym(const Matrix& M);

/// Throws NonFinite if any entry is NaN or infinite.
void require_finite(const Matrix& M, const char* what);

}  // namespace mfg
