#include <cmath>
#include <vector>

#include "doctest.h"
#include "mfg/errors.hpp"
#include "mfg/linalg.hpp"
#include "testutil.hpp"

using mfg::Matrix;
using mfg::Vector;
using testutil::Rand;

TEST_CASE("svec packs the upper triangle row-major with sqrt(2) off-diagonal") {
  Matrix M(2, 2);
  M << 1.0, 2.0, 2.0, 3.0;
  const Vector v = mfg::svec(M);
  REQUIRE(v.size() == 3);
  CHECK(v(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(v(1) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(v(2) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("svec/smat round-trip and norm preservation") {
  Rand rnd(11);
  for (Eigen::Index n : {1, 2, 3, 5, 8}) {
    const Matrix M = rnd.sym(n);
    const Vector v = mfg::svec(M);
    CHECK(v.size() == mfg::svec_size(n));
    CHECK((mfg::smat(v) - M).norm() < 1e-12 * (1.0 + M.norm()));
    CHECK(std::abs(v.norm() - M.norm()) < 1e-12 * (1.0 + M.norm()));
    const Matrix N = rnd.sym(n);
    const double ip_mat = (M.transpose() * N).trace();
    const double ip_vec = v.dot(mfg::svec(N));
    CHECK(std::abs(ip_mat - ip_vec) < 1e-11 * (1.0 + std::abs(ip_mat)));
  }
}

TEST_CASE("svec rejects asymmetry, smat rejects bad lengths") {
  Matrix M(2, 2);
  M << 1.0, 2.0, 0.0, 3.0;
  CHECK_THROWS_AS((void)mfg::svec(M), mfg::NotSymmetric);
  CHECK_THROWS_AS((void)mfg::smat(Vector::Zero(4)), mfg::BadLength);
  CHECK(mfg::smat_size(6) == 3);
}

TEST_CASE("symmetric Kronecker defining identity") {
  Rand rnd(12);
  for (Eigen::Index n : {2, 3, 4}) {
    const Matrix G = rnd.matrix(n, n);
    const Matrix H = rnd.matrix(n, n);
    const Matrix M = rnd.sym(n);
    const Vector lhs = mfg::sym_kron(G, H) * mfg::svec(M);
    const Matrix rhs_mat =
        0.5 * (H * M * G.transpose() + G * M * H.transpose());
    CHECK((lhs - mfg::svec(0.5 * (rhs_mat + rhs_mat.transpose()))).norm() <
          1e-11 * (1.0 + lhs.norm()));
  }
}

TEST_CASE("spectral radius of a triangular matrix") {
  Matrix M(2, 2);
  M << 0.5, 1.0, 0.0, 0.3;
  CHECK(mfg::spectral_radius(M) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("Lyapunov solve: scalar closed form and random residuals") {
  Matrix D(1, 1), S(1, 1);
  D << 0.5;
  S << 0.75;
  const Matrix X = mfg::solve_lyapunov(D, S);
  CHECK(X(0, 0) == doctest::Approx(1.0).epsilon(1e-12));

  Rand rnd(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::Index n = 1 + trial % 4;
    const Matrix Dr = rnd.stable(n, 0.9);
    const Matrix Sr = rnd.spd(n);
    const Matrix Xr = mfg::solve_lyapunov(Dr, Sr);
    CHECK((Xr - Xr.transpose()).norm() < 1e-12 * (1.0 + Xr.norm()));
    CHECK((Xr - Dr * Xr * Dr.transpose() - Sr).norm() <
          1e-12 * (1.0 + Xr.norm()));
  }
}

TEST_CASE("Lyapunov solve rejects non-stable coefficient") {
  Matrix D(1, 1), S(1, 1);
  D << 1.0;
  S << 1.0;
  CHECK_THROWS_AS((void)mfg::solve_lyapunov(D, S), mfg::Unstable);
}

TEST_CASE("Riccati solve: scalar quadratic root and stabilizing gain") {
  Matrix A(1, 1), B(1, 1), Q(1, 1), R(1, 1);
  A << 0.5;
  B << 1.0;
  Q << 1.0;
  R << 1.0;
  const mfg::RiccatiResult res = mfg::solve_riccati(A, B, Q, R);
  // x^2 - x/4 - 1 = 0 for the scalar fixed point
  const double x_expected = (0.25 + std::sqrt(4.0625)) / 2.0;
  CHECK(res.X(0, 0) == doctest::Approx(x_expected).epsilon(1e-10));
  const double k_expected = 0.5 * x_expected / (1.0 + x_expected);
  CHECK(res.gain(0, 0) == doctest::Approx(k_expected).epsilon(1e-10));
  CHECK(res.residual < mfg::defaults::ric_tol);
  CHECK(mfg::spectral_radius(A - B * res.gain) < 1.0);
}

TEST_CASE("Riccati solve validates inputs") {
  Matrix A(1, 1), B(1, 1), Qbad(1, 1), R(1, 1);
  A << 0.5;
  B << 1.0;
  Qbad << 0.0;
  R << 1.0;
  CHECK_THROWS_AS((void)mfg::solve_riccati(A, B, Qbad, R),
                  mfg::CholeskyFailure);
  Matrix Qasym(2, 2);
  Qasym << 1.0, 0.5, 0.0, 1.0;
  CHECK_THROWS_AS(
      (void)mfg::solve_riccati(Matrix::Identity(2, 2) * 0.5,
                               Matrix::Identity(2, 2), Qasym,
                               Matrix::Identity(2, 2)),
      mfg::NotSymmetric);
}

TEST_CASE("ball projection") {
  Vector v(2);
  v << 3.0, 4.0;
  const Vector p = mfg::project_ball(v, 1.0);
  CHECK(p.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK((p - 0.2 * v).norm() < 1e-14);
  CHECK((mfg::project_ball(v, 10.0) - v).norm() == 0.0);
  Vector c(2);
  c << 3.0, 3.0;
  const Vector q = mfg::project_ball(v, c, 0.5);
  CHECK((q - c).norm() == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("checked solve flags singular systems") {
  Matrix M = Matrix::Zero(2, 2);
  M(0, 0) = 1.0;
  Vector rhs(2);
  rhs << 1.0, 1.0;
  CHECK_THROWS_AS((void)mfg::solve_checked(M, rhs), mfg::SingularSolve);

  Rand rnd(14);
  const Matrix W = rnd.matrix(3, 3) + 3.0 * Matrix::Identity(3, 3);
  const Vector x = rnd.vector(3);
  const Vector got = mfg::solve_checked(W, Vector(W * x));
  CHECK((got - x).norm() < 1e-10 * (1.0 + x.norm()));
}

TEST_CASE("SPD square root and Cholesky factor") {
  Rand rnd(15);
  const Matrix M = rnd.spd(4);
  const Matrix S = mfg::spd_sqrt(M);
  CHECK((S * S - M).norm() < 1e-11 * (1.0 + M.norm()));
  const Matrix L = mfg::cholesky(M);
  CHECK((L * L.transpose() - M).norm() < 1e-11 * (1.0 + M.norm()));
  CHECK_THROWS_AS((void)mfg::cholesky(Matrix(-Matrix::Identity(2, 2))),
                  mfg::CholeskyFailure);
}

TEST_CASE("extreme singular values and symmetric eigenvalue floor") {
  Matrix M(2, 2);
  M << 3.0, 0.0, 0.0, 0.5;
  CHECK(mfg::sigma_max(M) == doctest::Approx(3.0));
  CHECK(mfg::sigma_min(M) == doctest::Approx(0.5));
  CHECK(mfg::min_eig_sym(M) == doctest::Approx(0.5));
}

TEST_CASE("require_finite flags NaN") {
  Matrix M = Matrix::Identity(2, 2);
  M(0, 1) = std::nan("");
  CHECK_THROWS_AS(mfg::require_finite(M, "test"), mfg::NonFinite);
}
