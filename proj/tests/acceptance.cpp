// Acceptance gate: eleven oracle- and property-based criteria at desk scale.
// Prints one PASS/FAIL line per criterion; the exit code is the number of
// failures.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mfg/actor.hpp"
#include "mfg/critic.hpp"
#include "mfg/errors.hpp"
#include "mfg/mfg_solver.hpp"
#include "mfg/model.hpp"
#include "mfg/oracle.hpp"
#include "testutil.hpp"

namespace fs = std::filesystem;
using mfg::Matrix;
using mfg::Vector;
using testutil::Rand;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

// ---------------------------------------------------------------------- 1

Outcome criterion_linalg() {
  Rand rnd(101);
  double max_err = 0.0;
  for (Eigen::Index n = 1; n <= 8; ++n) {
    const Matrix M = rnd.sym(n);
    const Matrix N = rnd.sym(n);
    const Vector vm = mfg::svec(M);
    max_err = std::max(max_err, (mfg::smat(vm) - M).norm());
    max_err = std::max(
        max_err, std::abs(vm.dot(mfg::svec(N)) - (M.transpose() * N).trace()));

    const Matrix G = rnd.matrix(n, n);
    const Matrix H = rnd.matrix(n, n);
    const Matrix R = 0.5 * (H * M * G.transpose() + G * M * H.transpose());
    max_err = std::max(max_err,
                       (mfg::sym_kron(G, H) * vm -
                        mfg::svec(0.5 * (R + R.transpose())))
                           .norm());

    // eigenvalue multiset of the symmetric Kronecker product of a
    // commuting symmetric pair
    const Matrix S = rnd.sym(n);
    const Matrix P = S * S + S + Matrix::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(S);
    const Vector a = es.eigenvalues();
    std::vector<double> predicted;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const double bi = a(i) * a(i) + a(i) + 1.0;
        const double bj = a(j) * a(j) + a(j) + 1.0;
        predicted.push_back(0.5 * (a(i) * bj + a(j) * bi));
      }
    }
    std::sort(predicted.begin(), predicted.end());
    const Matrix SK = mfg::sym_kron(S, P);
    Eigen::SelfAdjointEigenSolver<Matrix> esk(0.5 * (SK + SK.transpose()));
    const Vector got = esk.eigenvalues();
    for (std::size_t i = 0; i < predicted.size(); ++i) {
      max_err = std::max(
          max_err,
          std::abs(got(static_cast<Eigen::Index>(i)) - predicted[i]));
    }
  }
  return {max_err < 1e-9, "max_err=" + fmt(max_err)};
}

// ---------------------------------------------------------------------- 2

Outcome criterion_solvers() {
  Rand rnd(202);
  double worst_lyap = 0.0;
  double worst_ric = 0.0;
  bool all_stable = true;
  for (int i = 0; i < 50; ++i) {
    const auto m = static_cast<Eigen::Index>(1 + i % 4);
    const auto k = static_cast<Eigen::Index>(1 + (i / 4) % 4);

    const Matrix D = rnd.stable(m, rnd.uniform(0.3, 0.9));
    const Matrix S = rnd.spd(m);
    const Matrix X = mfg::solve_lyapunov(D, S);
    worst_lyap = std::max(worst_lyap,
                          (X - D * X * D.transpose() - S).norm() /
                              (1.0 + X.norm()));

    const Matrix A = rnd.stable(m, rnd.uniform(0.3, 0.95));
    Matrix B = rnd.matrix(m, k, 0.7);
    for (Eigen::Index j = 0; j < std::min(m, k); ++j) B(j, j) += 0.5;
    const Matrix Q = rnd.spd(m, 0.2);
    const Matrix R = rnd.spd(k, 0.2);
    const mfg::RiccatiResult res = mfg::solve_riccati(A, B, Q, R);
    const Matrix G = R + B.transpose() * res.X * B;
    const Matrix back = Q + A.transpose() * res.X * A -
                        A.transpose() * res.X * B *
                            G.ldlt().solve(B.transpose() * res.X * A);
    worst_ric = std::max(worst_ric,
                         (res.X - back).norm() / (1.0 + res.X.norm()));
    all_stable =
        all_stable && mfg::spectral_radius(A - B * res.gain) < 1.0;
  }
  const bool pass = worst_lyap < 1e-12 && worst_ric < 1e-10 && all_stable;
  return {pass, "lyap=" + fmt(worst_lyap) + " ric=" + fmt(worst_ric)};
}

// ---------------------------------------------------------------------- 3

Outcome criterion_simulator() {
  const mfg::MfgModel mdl = mfg::scalar_reference();
  const auto pol = mfg::LinearGaussianPolicy::zero(mdl);
  const Vector mu = vec1(0.0);
  const double J = mfg::policy_quantities(mdl, pol, mu).J;
  const double mean_true = mfg::stationary_mean(mdl, pol, mu)(0);
  const double var_true = mfg::stationary_cov(mdl, pol)(0, 0);
  const long T = 200000;

  std::vector<double> j_rel, mean_err, var_err;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    mfg::RngState rng(seed);
    Vector x = mfg::sample_stationary_start_exact(mdl, pol, mu, rng);
    double cost_acc = 0.0, x_acc = 0.0, x2_acc = 0.0;
    for (long t = 0; t < T; ++t) {
      const mfg::Transition tr = mfg::step(mdl, pol, x, mu, rng);
      cost_acc += tr.cost;
      x_acc += x(0);
      x2_acc += x(0) * x(0);
      x = tr.x_next;
    }
    const double n = static_cast<double>(T);
    const double xbar = x_acc / n;
    j_rel.push_back(std::abs(cost_acc / n - J) / J);
    mean_err.push_back(std::abs(xbar - mean_true));
    var_err.push_back(std::abs(x2_acc / n - xbar * xbar - var_true));
  }
  // AR(1) standard errors with autoregression coefficient a = 0.5
  const double a = 0.5;
  const double se_mean =
      std::sqrt(var_true * (1.0 + a) / (1.0 - a) / static_cast<double>(T));
  const double se_var = var_true * std::sqrt(2.0 * (1.0 + a * a) /
                                             ((1.0 - a * a) *
                                              static_cast<double>(T)));
  const double mj = testutil::median(j_rel);
  const double mm = testutil::median(mean_err);
  const double mv = testutil::median(var_err);
  const bool pass = mj < 0.02 && mm < 3.0 * se_mean && mv < 3.0 * se_var;
  return {pass, "J_rel=" + fmt(mj) + " mean_err=" + fmt(mm) + "/" +
                    fmt(3.0 * se_mean) + " var_err=" + fmt(mv) + "/" +
                    fmt(3.0 * se_var)};
}

// ---------------------------------------------------------------------- 4

Outcome criterion_gradients() {
  const Eigen::Index dims[5][2] = {{1, 1}, {2, 1}, {2, 2}, {3, 2}, {3, 3}};
  double worst = 0.0;
  int point = 0;
  for (int rep = 0; rep < 4; ++rep) {
    for (const auto& d : dims) {
      ++point;
      const mfg::MfgModel mdl =
          testutil::random_model(400 + point, d[0], d[1]);
      Rand rnd(4000 + point);
      const auto pol = testutil::random_stabilizing_policy(mdl, rnd);
      const Vector mu = rnd.vector(d[0], 0.3);

      const Matrix gK = mfg::grad_K_J1(mdl, pol.K);
      const auto j1_of = [&](const Matrix& K) {
        return (mfg::bellman_P(mdl, K) * mfg::psi_eps(mdl)).trace();
      };
      const Matrix gK_fd = testutil::fd_matrix_grad(j1_of, pol.K, 1e-5);
      worst = std::max(worst, (gK - gK_fd).norm() / (1.0 + gK.norm()));

      const Vector gb = mfg::grad_b_J2(mdl, pol, mu);
      const auto j2_of = [&](const Vector& b) {
        mfg::LinearGaussianPolicy p2 = pol;
        p2.b = b;
        return mfg::policy_quantities(mdl, p2, mu).J2;
      };
      const Vector gb_fd = testutil::fd_vector_grad(j2_of, pol.b, 1e-6);
      worst = std::max(worst, (gb - gb_fd).norm() / (1.0 + gb.norm()));
    }
  }
  return {worst < 1e-5, "points=20 max_rel=" + fmt(worst)};
}

// ---------------------------------------------------------------------- 5

Outcome criterion_intercept_invariance() {
  double worst_spread = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    const auto m = static_cast<Eigen::Index>(1 + inst % 3);
    const auto k = static_cast<Eigen::Index>(1 + (inst / 2) % 2);
    const mfg::MfgModel mdl = testutil::random_model(500 + inst, m, k);
    Rand rnd(5000 + inst);
    const Vector mu = rnd.vector(m, 0.4);
    double lo = 0.0, hi = 0.0;
    for (int j = 0; j < 5; ++j) {
      const auto pol0 = testutil::random_stabilizing_policy(mdl, rnd);
      mfg::LinearGaussianPolicy pol = pol0;
      pol.b = mfg::optimal_b(mdl, pol.K, mu);
      const double j2 = mfg::policy_quantities(mdl, pol, mu).J2;
      if (j == 0) {
        lo = hi = j2;
      } else {
        lo = std::min(lo, j2);
        hi = std::max(hi, j2);
      }
    }
    worst_spread = std::max(worst_spread, hi - lo);
  }
  return {worst_spread < 1e-10, "max_spread=" + fmt(worst_spread)};
}

// ---------------------------------------------------------------------- 6

Outcome criterion_theta() {
  const mfg::MfgModel mdl = mfg::scalar_reference();
  const auto pol = mfg::LinearGaussianPolicy::zero(mdl);
  const Vector mu = vec1(0.0);
  const mfg::ThetaForm tf = mfg::theta_closed_form(mdl, pol, mu);
  const Vector mu_st = mfg::stationary_mean(mdl, pol, mu);

  const long T = 100000;
  mfg::RngState rng(606);
  Vector x = mfg::sample_stationary_start_exact(mdl, pol, mu, rng);
  mfg::Transition tr = mfg::step(mdl, pol, x, mu, rng);
  Vector psi_prev = mfg::feature(x, tr.u, mu_st, pol);
  x = tr.x_next;
  Matrix acc = Matrix::Zero(psi_prev.size(), psi_prev.size());
  for (long t = 0; t < T; ++t) {
    tr = mfg::step(mdl, pol, x, mu, rng);
    const Vector psi = mfg::feature(x, tr.u, mu_st, pol);
    acc += psi_prev * (psi_prev - psi).transpose();
    psi_prev = psi;
    x = tr.x_next;
  }
  acc /= static_cast<double>(T);
  const double rel = (acc - tf.Theta).norm() / tf.Theta.norm();

  const mfg::QParams qp = mfg::q_params(mdl, pol, mu);
  const double J = mfg::policy_quantities(mdl, pol, mu).J;
  const Vector ecp = mfg::expected_cost_feature(mdl, pol, mu);
  const double resid = (tf.E_psi * J + tf.Theta * qp.alpha - ecp).norm();

  const bool pass = rel < 0.05 && resid < 1e-8 && tf.sigma_min_tilde > 0.0;
  return {pass, "mc_rel=" + fmt(rel) + " system_resid=" + fmt(resid) +
                    " sigma_min=" + fmt(tf.sigma_min_tilde)};
}

// ---------------------------------------------------------------------- 7

Outcome criterion_contraction() {
  std::vector<mfg::MfgModel> models;
  models.push_back(mfg::scalar_reference());
  for (std::uint64_t seed = 700; models.size() < 6 && seed < 760; ++seed) {
    const auto m = static_cast<Eigen::Index>(1 + seed % 3);
    const auto k = static_cast<Eigen::Index>(1 + seed % 2);
    const mfg::MfgModel cand = testutil::random_model(seed, m, k, 0.12);
    try {
      if (mfg::contraction_constants(cand).L0 < 1.0) models.push_back(cand);
    } catch (const mfg::Error&) {
    }
  }
  if (models.size() < 6) return {false, "could not draw 5 contractive models"};

  double worst_excess = -1.0;
  double worst_resid = 0.0;
  bool envelope_ok = true;
  Rand rnd(707);
  for (const mfg::MfgModel& mdl : models) {
    const mfg::ContractionDiagnostics cc = mfg::contraction_constants(mdl);
    for (int p = 0; p < 100 / static_cast<int>(models.size()) + 20; ++p) {
      const Vector ma = rnd.vector(mdl.m(), 0.6);
      const Vector mb = rnd.vector(mdl.m(), 0.6);
      if ((ma - mb).norm() < 1e-8) continue;
      const double ratio = (mfg::lambda_op(mdl, ma) - mfg::lambda_op(mdl, mb))
                               .norm() /
                           (ma - mb).norm();
      worst_excess = std::max(worst_excess, ratio - cc.L0);
    }
    const mfg::NashResult nash =
        mfg::exact_nash(mdl, Vector::Zero(mdl.m()));
    worst_resid = std::max(worst_resid, nash.fixedpoint_residual);
    const double d0 = (nash.iterates.front() - nash.mu_star).norm();
    for (std::size_t i = 0; i < nash.iterates.size(); ++i) {
      const double di = (nash.iterates[i] - nash.mu_star).norm();
      envelope_ok = envelope_ok &&
                    di <= std::pow(cc.L0, static_cast<double>(i)) * d0 + 1e-12;
    }
  }
  const bool pass = worst_excess <= 1e-9 && worst_resid < 1e-10 && envelope_ok;
  return {pass, "lipschitz_excess=" + fmt(worst_excess) +
                    " fp_resid=" + fmt(worst_resid) +
                    (envelope_ok ? " envelope=ok" : " envelope=violated")};
}

// ---------------------------------------------------------------------- 8

Outcome criterion_exact_actor() {
  const mfg::MfgModel mdl = mfg::scalar_reference();
  const auto pol0 = mfg::LinearGaussianPolicy::zero(mdl);
  const Vector mu = vec1(0.0);

  mfg::ActorConfig cfg;
  cfg.N = 200;
  cfg.H = 200;
  cfg.critic = mfg::CriticKind::exact;
  cfg.oracle_trace = true;
  mfg::RngState rng(808);
  const mfg::ActorResult res =
      mfg::natural_actor_critic(mdl, mu, pol0, cfg, rng);

  const double gamma =
      mfg::k_stepsize_bound(mdl, mfg::policy_quantities(mdl, pol0, mu).J);
  const mfg::ContractionDiagnostics cc = mfg::contraction_constants(mdl);
  mfg::LinearGaussianPolicy pol_star = pol0;
  pol_star.K = cc.K_star;
  const double phi_star = mfg::sigma_max(mfg::stationary_cov(mdl, pol_star));
  const double ratio = 1.0 - gamma * mfg::min_eig_sym(mfg::psi_eps(mdl)) *
                                 mfg::min_eig_sym(mdl.R) / phi_star;

  const double J1_star =
      (mfg::bellman_P(mdl, cc.K_star) * mfg::psi_eps(mdl)).trace();
  double prev_gap =
      (mfg::bellman_P(mdl, pol0.K) * mfg::psi_eps(mdl)).trace() - J1_star;
  bool geometric = true;
  double k_err = 0.0, b_err = 0.0;
  for (const mfg::ActorRecord& rec : res.trace) {
    if (rec.phase == 'K') {
      if (prev_gap > 1e-13) {
        geometric = geometric && rec.J1_gap <= ratio * prev_gap + 1e-15;
      }
      prev_gap = rec.J1_gap;
      k_err = rec.K_err;
    } else {
      b_err = rec.b_err;
    }
  }
  const bool pass = geometric && k_err < 1e-8 && b_err < 1e-8;
  return {pass, std::string("geometric=") + (geometric ? "ok" : "violated") +
                    " ratio_bound=" + fmt(ratio) + " K_err=" + fmt(k_err) +
                    " b_err=" + fmt(b_err)};
}

// ---------------------------------------------------------------------- 9

Outcome criterion_sampled_critic() {
  const mfg::MfgModel mdl = mfg::scalar_reference();
  // Evaluated gain/intercept are those of the zero policy; the exploration
  // noise is widened so the quadratic features span both blocks of Upsilon
  // at comparable scale (sigma = 0.1 leaves Theta nearly singular and the
  // iterates frozen at any stable step size).
  auto pol = mfg::LinearGaussianPolicy::zero(mdl);
  pol.sigma = 1.0;
  const Vector mu = vec1(0.0);
  const mfg::QParams truth = mfg::q_params(mdl, pol, mu);
  const double scale = truth.Upsilon.norm();
  const double J0 = 2.0 * mfg::policy_quantities(mdl, pol, mu).J;

  mfg::CriticConfig cfg;
  cfg.T_tilde = 10000;
  cfg.gamma0 = 0.05;
  cfg.projections = mfg::default_projection_sets(mdl, J0, pol.K);

  const auto run = [&](long T, std::uint64_t seed) {
    mfg::CriticConfig c = cfg;
    c.T = T;
    mfg::RngState rng(seed);
    const mfg::CriticEstimate est = mfg::pd_gtd(mdl, pol, mu, c, rng);
    return (est.Upsilon_hat - truth.Upsilon).norm() / scale;
  };

  std::vector<double> err_hi, err_lo;
  bool paired = true;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    err_hi.push_back(run(100000, seed));
    err_lo.push_back(run(1000, seed));
    paired = paired && err_hi.back() < err_lo.back();
  }
  const double med_hi = testutil::median(err_hi);
  const double med_lo = testutil::median(err_lo);
  const bool pass = med_hi < 0.15 && paired;
  return {pass, "median_err_T1e5=" + fmt(med_hi) +
                    " median_err_T1e3=" + fmt(med_lo) +
                    (paired ? " paired" : " pairing violated")};
}

// --------------------------------------------------------------------- 10

Outcome criterion_end_to_end() {
  const mfg::MfgModel mdl = mfg::scalar_reference();
  const mfg::NashResult nash = mfg::exact_nash(mdl, vec1(0.0));

  // Wide exploration noise for the same conditioning reason as criterion 9;
  // the intercept loop carries the mean-field convergence, so the budget goes
  // into critic length rather than gain updates.
  auto policy0 = mfg::LinearGaussianPolicy::zero(mdl);
  policy0.sigma = 1.0;

  mfg::MfgConfig cfg;
  cfg.S = 8;
  cfg.mu0 = vec1(0.0);
  cfg.policy0 = policy0;
  cfg.budget_growth = 1.5;
  cfg.oracle_diagnostics = false;
  cfg.actor.N = 1;
  cfg.actor.H = 7;
  cfg.actor.critic = mfg::CriticKind::pd_gtd;
  cfg.actor.critic_cfg.T = 9000;
  cfg.actor.critic_cfg.T_tilde = 2000;
  cfg.actor.critic_cfg.burn_in = 300;
  cfg.actor.critic_cfg.gamma0 = 0.05;
  cfg.actor.critic_cfg.projections = mfg::default_projection_sets(
      mdl, 2.0 * mfg::policy_quantities(mdl, policy0, vec1(0.0)).J,
      policy0.K);

  std::vector<double> errs;
  long max_steps = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    mfg::RngState rng(seed);
    const mfg::MfgResult res = mfg::solve_mfg(mdl, cfg, rng);
    errs.push_back((res.mu - nash.mu_star).norm());
    max_steps = std::max(max_steps, res.steps);
  }
  const double med = testutil::median(errs);
  const bool pass = med < 0.05 && max_steps <= 5000000;
  return {pass,
          "median_mu_err=" + fmt(med) + " max_steps=" + fmt(double(max_steps))};
}

// --------------------------------------------------------------------- 11

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string("MFG_LOG_LEVEL=error ") + MFG_CLI_BIN + " " + args +
      " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : (WIFEXITED(rc) ? WEXITSTATUS(rc) : -2);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome criterion_reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "mfglq_acceptance_repro";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    std::ofstream m(dir / "model.json");
    m << R"({"A": [[0.5]], "B": [[1.0]], "A_bar": [[0.2]], "d": [0.1],
             "Q": [[1.0]], "R": [[1.0]], "Q_bar": [[0.5]],
             "Psi_omega": [[0.04]], "sigma": 0.1})";
  }
  {
    std::ofstream c(dir / "config.json");
    c << R"({"model": "model.json", "seeds": [1, 2, 3],
             "critic": {"algo": "pd_gtd", "T": 2000, "T_tilde": 500,
                        "burn_in": 200}})";
  }
  const std::string base = " --config " + (dir / "config.json").string();
  bool ok = true;
  ok = ok && run_cli("solve-exact" + base + " --out " +
                     (dir / "a").string()) == 0;
  ok = ok && run_cli("solve-exact" + base + " --out " +
                     (dir / "b").string()) == 0;
  ok = ok && run_cli("eval-critic" + base + " --out " +
                     (dir / "a").string()) == 0;
  ok = ok && run_cli("eval-critic" + base + " --out " +
                     (dir / "b").string()) == 0;
  if (!ok) return {false, "cli run failed"};
  const bool nash_same =
      slurp(dir / "a" / "nash.json") == slurp(dir / "b" / "nash.json");
  const bool bench_same = slurp(dir / "a" / "critic_bench.csv") ==
                          slurp(dir / "b" / "critic_bench.csv");
  const bool nonempty = slurp(dir / "a" / "nash.json").size() > 0 &&
                        slurp(dir / "a" / "critic_bench.csv").size() > 0;
  const bool pass = nash_same && bench_same && nonempty;
  return {pass, std::string("nash_identical=") + (nash_same ? "yes" : "no") +
                    " bench_identical=" + (bench_same ? "yes" : "no")};
}

struct Criterion {
  int id;
  const char* name;
  double time_limit;  // seconds; 0 means no limit stated
  Outcome (*fn)();
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "linear-algebra identities", 1.0, criterion_linalg},
      {2, "Lyapunov/Riccati residuals", 5.0, criterion_solvers},
      {3, "oracle vs simulator", 30.0, criterion_simulator},
      {4, "gradient formulas vs finite differences", 0.0, criterion_gradients},
      {5, "optimal-intercept cost invariance", 0.0,
       criterion_intercept_invariance},
      {6, "feature-correlation closed form", 60.0, criterion_theta},
      {7, "equilibrium map contraction", 0.0, criterion_contraction},
      {8, "exact-critic actor convergence", 5.0, criterion_exact_actor},
      {9, "sampled critic quality", 120.0, criterion_sampled_critic},
      {10, "end-to-end model-free equilibrium", 600.0, criterion_end_to_end},
      {11, "byte-identical reproducibility", 0.0, criterion_reproducibility},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.fn();
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    const bool in_time = c.time_limit <= 0.0 || secs < c.time_limit;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("criterion %2d %s %-45s [%6.2fs%s] %s\n", c.id,
                pass ? "PASS" : "FAIL", c.name, secs,
                in_time ? "" : " OVER LIMIT", out.detail.c_str());
  }
  std::printf("acceptance: %d/11 passed\n",
              11 - failures);
  return failures;
}
