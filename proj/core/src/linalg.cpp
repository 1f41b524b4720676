#include "mfg/linalg.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace mfg {

namespace {

const double kSqrt2 = std::sqrt(2.0);

void require_square(const Matrix& M, const char* what) {
  if (M.rows() != M.cols()) {
    throw DimMismatch(std::string(what) + ": expected a square matrix, got " +
                      std::to_string(M.rows()) + "x" + std::to_string(M.cols()));
  }
}

/// svec without the symmetry check; averages the two triangles.
Vector svec_raw(const Matrix& M) {
  const Eigen::Index n = M.rows();
  Vector v(svec_size(n));
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      v[idx++] = (i == j) ? M(i, i) : kSqrt2 * 0.5 * (M(i, j) + M(j, i));
    }
  }
  return v;
}

}  // namespace

Eigen::Index smat_size(Eigen::Index packed_len) {
  if (packed_len >= 1) {
    const auto n = static_cast<Eigen::Index>(
        (std::sqrt(8.0 * static_cast<double>(packed_len) + 1.0) - 1.0) / 2.0 + 0.5);
    if (svec_size(n) == packed_len) return n;
  }
  throw BadLength("smat: length " + std::to_string(packed_len) +
                  " is not a triangular number n(n+1)/2");
}

Vector svec(const Matrix& M, double sym_tol) {
  require_square(M, "svec");
  const double asym = (M - M.transpose()).norm();
  if (asym > sym_tol * M.norm()) {
    throw NotSymmetric("svec: asymmetry " + std::to_string(asym) +
                       " exceeds tolerance relative to the matrix norm");
  }
  return svec_raw(M);
}

Matrix smat(const Vector& v) {
  const Eigen::Index n = smat_size(v.size());
  Matrix M(n, n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (i == j) {
        M(i, i) = v[idx];
      } else {
        M(i, j) = v[idx] / kSqrt2;
        M(j, i) = M(i, j);
      }
      ++idx;
    }
  }
  return M;
}

Matrix sym_kron(const Matrix& G, const Matrix& H) {
  require_square(G, "sym_kron");
  require_square(H, "sym_kron");
  if (G.rows() != H.rows()) {
    throw DimMismatch("sym_kron: operands must have equal dimensions");
  }
  const Eigen::Index n = G.rows();
  const Eigen::Index N = svec_size(n);
  Matrix out(N, N);
  Eigen::Index col = 0;
  Matrix E = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      if (i == j) {
        E(i, i) = 1.0;
      } else {
        E(i, j) = E(j, i) = 1.0 / kSqrt2;
      }
      out.col(col++) =
          svec_raw(0.5 * (H * E * G.transpose() + G * E * H.transpose()));
      E(i, j) = E(j, i) = 0.0;
    }
  }
  return out;
}

double spectral_radius(const Matrix& M) {
  require_square(M, "spectral_radius");
  return M.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix solve_lyapunov(const Matrix& D, const Matrix& S, double tol,
                      double stab_margin) {
  require_square(D, "solve_lyapunov");
  require_square(S, "solve_lyapunov");
  if (D.rows() != S.rows()) {
    throw DimMismatch("solve_lyapunov: D and S must have equal dimensions");
  }
  const double rho = spectral_radius(D);
  if (rho >= 1.0 - stab_margin) {
    throw Unstable("solve_lyapunov: spectral radius " + std::to_string(rho) +
                   " is not below 1");
  }
  const Vector b = svec(S);
  const Eigen::Index N = b.size();
  const Matrix Aop = Matrix::Identity(N, N) - sym_kron(D, D);
  const auto lu = Aop.partialPivLu();
  Matrix X = smat(lu.solve(b));
  X = 0.5 * (X + X.transpose()).eval();
  // One pass of iterative refinement tightens the residual near rho -> 1.
  const Matrix err = S + D * X * D.transpose() - X;
  X += smat(lu.solve(svec_raw(err)));
  X = 0.5 * (X + X.transpose()).eval();
  const double resid = (X - D * X * D.transpose() - S).norm();
  if (!(resid <= tol * (1.0 + X.norm()))) {
    throw NoConvergence("solve_lyapunov: residual " + std::to_string(resid) +
                        " exceeds tolerance");
  }
  return X;
}

RiccatiResult solve_riccati(const Matrix& A, const Matrix& B, const Matrix& Q,
                            const Matrix& R, double tol, long max_iters) {
  require_square(A, "solve_riccati");
  require_square(Q, "solve_riccati");
  require_square(R, "solve_riccati");
  if (B.rows() != A.rows() || Q.rows() != A.rows() || R.rows() != B.cols()) {
    throw DimMismatch("solve_riccati: inconsistent dimensions of A, B, Q, R");
  }
  if ((Q - Q.transpose()).norm() > defaults::sym_tol * Q.norm() ||
      (R - R.transpose()).norm() > defaults::sym_tol * R.norm()) {
    throw NotSymmetric("solve_riccati: Q and R must be symmetric");
  }
  if (min_eig_sym(Q) <= 0.0 || min_eig_sym(R) <= 0.0) {
    throw CholeskyFailure("solve_riccati: Q and R must be positive definite");
  }

  const auto iterate = [&](const Matrix& X) {
    const Matrix G = R + B.transpose() * X * B;
    const auto llt = G.llt();
    if (llt.info() != Eigen::Success) {
      throw CholeskyFailure("solve_riccati: B^T X B + R lost definiteness");
    }
    const Matrix BtXA = B.transpose() * X * A;
    Matrix Xn = A.transpose() * X * A + Q - BtXA.transpose() * llt.solve(BtXA);
    return (0.5 * (Xn + Xn.transpose())).eval();
  };

  Matrix X = Q;
  double prev_diff = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  long iter = 0;
  bool converged = false;
  while (iter < max_iters) {
    ++iter;
    Matrix Xn = iterate(X);
    if (!Xn.allFinite()) {
      throw NoConvergence("solve_riccati: iteration produced non-finite values");
    }
    const double diff = (Xn - X).norm();
    if (iter > 5 && diff > prev_diff) {
      Xn = 0.5 * (X + Xn);  // damp an oscillating iteration
    }
    prev_diff = diff;
    X = Xn;
    if (diff <= 0.5 * tol * (1.0 + X.norm())) {
      const Matrix Xcheck = iterate(X);
      residual = (Xcheck - X).norm();
      if (residual <= tol * (1.0 + X.norm())) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) {
    throw NoConvergence(
        "solve_riccati: no convergence after " + std::to_string(iter) +
        " iterations; the instance likely admits no stabilizing solution");
  }

  // Quadratically convergent polish: policy iteration from the current gain.
  for (int i = 0; i < 3; ++i) {
    const Matrix G = R + B.transpose() * X * B;
    const Matrix K = G.llt().solve(B.transpose() * X * A);
    if (spectral_radius(A - B * K) >= 1.0 - defaults::stab_margin) break;
    Matrix S = Q + K.transpose() * R * K;
    S = 0.5 * (S + S.transpose()).eval();
    try {
      X = solve_lyapunov((A - B * K).transpose(), S);
    } catch (const Error&) {
      break;
    }
  }
  residual = (iterate(X) - X).norm();
  if (residual > tol * (1.0 + X.norm())) {
    throw NoConvergence("solve_riccati: residual " + std::to_string(residual) +
                        " exceeds tolerance after polishing");
  }

  RiccatiResult out;
  out.X = X;
  const Matrix G = R + B.transpose() * X * B;
  out.gain = G.llt().solve(B.transpose() * X * A);
  out.residual = residual;
  out.iters = iter;
  if (spectral_radius(A - B * out.gain) >= 1.0) {
    throw NoConvergence("solve_riccati: converged fixed point is not stabilizing");
  }
  return out;
}

Vector project_ball(const Vector& v, const Vector& center, double radius) {
  if (v.size() != center.size()) {
    throw DimMismatch("project_ball: vector and center lengths differ");
  }
  const Vector delta = v - center;
  const double nrm = delta.norm();
  if (nrm <= radius) return v;
  return center + delta * (radius / nrm);
}

Vector project_ball(const Vector& v, double radius) {
  const double nrm = v.norm();
  if (nrm <= radius) return v;
  return v * (radius / nrm);
}

Matrix solve_checked(const Matrix& M, const Matrix& rhs, double tol) {
  require_square(M, "solve_checked");
  if (M.rows() != rhs.rows()) {
    throw DimMismatch("solve_checked: incompatible right-hand side");
  }
  const auto lu = M.partialPivLu();
  Matrix X = lu.solve(rhs);
  X += lu.solve(rhs - M * X);
  if (!X.allFinite() || (M * X - rhs).norm() > tol * rhs.norm()) {
    throw SingularSolve("solve_checked: linear system is numerically singular");
  }
  return X;
}

Matrix spd_sqrt(const Matrix& M) {
  require_square(M, "spd_sqrt");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
  if (es.info() != Eigen::Success) {
    throw CholeskyFailure("spd_sqrt: eigendecomposition failed");
  }
  Vector ev = es.eigenvalues();
  if (ev.minCoeff() < -1e-10 * std::max(1.0, M.norm())) {
    throw CholeskyFailure("spd_sqrt: matrix has a negative eigenvalue");
  }
  ev = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Matrix cholesky(const Matrix& M) {
  require_square(M, "cholesky");
  const auto llt = M.llt();
  if (llt.info() != Eigen::Success) {
    throw CholeskyFailure("cholesky: matrix is not positive definite");
  }
  return llt.matrixL();
}

double sigma_min(const Matrix& M) {
  return M.jacobiSvd().singularValues().minCoeff();
}

double sigma_max(const Matrix& M) {
  return M.jacobiSvd().singularValues().maxCoeff();
}

double min_eig_sym(const Matrix& M) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()));
  return es.eigenvalues().minCoeff();
}

void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite()) {
    throw NonFinite(std::string(what) + ": non-finite values encountered");
  }
}

}  // namespace mfg
