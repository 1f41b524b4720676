#include <benchmark/benchmark.h>

#include "mfg/actor.hpp"
#include "mfg/critic.hpp"
#include "mfg/model.hpp"
#include "mfg/oracle.hpp"

namespace {

using mfg::Matrix;
using mfg::Vector;

mfg::MfgModel make_model(Eigen::Index m, Eigen::Index k) {
  std::mt19937_64 gen(12345 + static_cast<std::uint64_t>(m * 16 + k));
  std::normal_distribution<double> g(0.0, 1.0);
  const auto mat = [&](Eigen::Index r, Eigen::Index c, double s) {
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
      for (Eigen::Index j = 0; j < c; ++j) M(i, j) = s * g(gen);
    return M;
  };
  const auto spd = [&](Eigen::Index n) {
    const Matrix M = mat(n, n, 1.0);
    return Matrix(M * M.transpose() / static_cast<double>(n) +
                  0.3 * Matrix::Identity(n, n));
  };
  mfg::MfgModel mdl;
  mdl.A = mat(m, m, 1.0);
  mdl.A *= 0.6 / std::max(mfg::spectral_radius(mdl.A), 1e-12);
  mdl.B = mat(m, k, 0.6);
  for (Eigen::Index i = 0; i < std::min(m, k); ++i) mdl.B(i, i) += 0.5;
  mdl.A_bar = mat(m, m, 0.05);
  mdl.d = 0.1 * Vector::Ones(m);
  mdl.Q = spd(m);
  mdl.R = spd(k);
  mdl.Q_bar = spd(m);
  mdl.Psi_omega = 0.2 * spd(m);
  mdl.sigma = 0.1;
  mdl.validate();
  return mdl;
}

void bm_lyapunov(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const mfg::MfgModel mdl = make_model(n, n);
  const Matrix D = mdl.A;
  const Matrix S = mdl.Q;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfg::solve_lyapunov(D, S));
  }
}
BENCHMARK(bm_lyapunov)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void bm_riccati(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const mfg::MfgModel mdl = make_model(n, n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        mfg::solve_riccati(mdl.A, mdl.B, mdl.Q, mdl.R));
  }
}
BENCHMARK(bm_riccati)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void bm_q_params(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const mfg::MfgModel mdl = make_model(n, n);
  const auto pol = mfg::LinearGaussianPolicy::zero(mdl);
  const Vector mu = Vector::Zero(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfg::q_params(mdl, pol, mu));
  }
}
BENCHMARK(bm_q_params)->Arg(2)->Arg(4)->Arg(8);

void bm_theta_closed_form(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const mfg::MfgModel mdl = make_model(n, n);
  const auto pol = mfg::LinearGaussianPolicy::zero(mdl);
  const Vector mu = Vector::Zero(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfg::theta_closed_form(mdl, pol, mu));
  }
}
BENCHMARK(bm_theta_closed_form)->Arg(2)->Arg(4)->Arg(6);

void bm_simulator_step(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const mfg::MfgModel mdl = make_model(n, n);
  const auto pol = mfg::LinearGaussianPolicy::zero(mdl);
  const Vector mu = Vector::Zero(n);
  mfg::RngState rng(7);
  Vector x = Vector::Zero(n);
  for (auto _ : state) {
    const mfg::Transition tr = mfg::step(mdl, pol, x, mu, rng);
    x = tr.x_next;
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(bm_simulator_step)->Arg(1)->Arg(2)->Arg(4)->Arg(8);

void bm_critic_pd_gtd(benchmark::State& state) {
  const mfg::MfgModel mdl = make_model(1, 1);
  const auto pol = mfg::LinearGaussianPolicy::zero(mdl);
  const Vector mu = Vector::Zero(1);
  mfg::CriticConfig cfg;
  cfg.T = state.range(0);
  cfg.T_tilde = state.range(0) / 4;
  cfg.burn_in = 100;
  cfg.projections = mfg::default_projection_sets(mdl, 1.0, pol.K);
  std::uint64_t seed = 1;
  for (auto _ : state) {
    mfg::RngState rng(seed++);
    benchmark::DoNotOptimize(mfg::pd_gtd(mdl, pol, mu, cfg, rng));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_critic_pd_gtd)->Arg(1000)->Arg(10000);

void bm_exact_nash(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const mfg::MfgModel mdl = make_model(n, n);
  const Vector mu0 = Vector::Zero(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mfg::exact_nash(mdl, mu0));
  }
}
BENCHMARK(bm_exact_nash)->Arg(1)->Arg(2)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
