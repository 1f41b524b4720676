// Command line front end. Four subcommands: solve-exact, eval-critic,
// run-actor, run-mfg. Outputs are deterministic functions of (config, seeds):
// no timestamps, files written to a temp name then renamed, and every file
// embeds the hash of the effective config.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mfg/actor.hpp"
#include "mfg/critic.hpp"
#include "mfg/errors.hpp"
#include "mfg/mfg_solver.hpp"
#include "mfg/model.hpp"
#include "mfg/oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3 };

LogLevel g_log_level = LogLevel::warn;

LogLevel log_level_from_env() {
  const char* raw = std::getenv("MFG_LOG_LEVEL");
  if (raw == nullptr) return LogLevel::warn;
  const std::string v(raw);
  if (v == "error") return LogLevel::error;
  if (v == "warn") return LogLevel::warn;
  if (v == "info") return LogLevel::info;
  if (v == "debug") return LogLevel::debug;
  throw mfg::InvalidInput(
      "MFG_LOG_LEVEL must be one of error, warn, info, debug");
}

void log_msg(LogLevel lvl, const std::string& msg) {
  if (lvl > g_log_level) return;
  static const char* names[] = {"error", "warn", "info", "debug"};
  std::cerr << "[mfglq " << names[static_cast<int>(lvl)] << "] " << msg
            << "\n";
}

// ------------------------------------------------------------------ json

json load_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) {
    throw mfg::InvalidInput(std::string(what) +
                            ": cannot open file: " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw mfg::InvalidInput(std::string(what) + ": malformed JSON: " +
                            e.what());
  }
}

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& what) {
  if (!j.is_object()) {
    throw mfg::InvalidInput(what + ": expected a JSON object");
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw mfg::InvalidInput(what + ": unknown key: " + it.key());
  }
}

double as_number(const json& j, const std::string& what) {
  if (!j.is_number()) throw mfg::InvalidInput(what + " must be a number");
  return j.get<double>();
}

double get_num(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  return as_number(j.at(key), std::string("config: ") + key);
}

long get_long(const json& j, const char* key, long fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer()) {
    throw mfg::InvalidInput(std::string("config: ") + key +
                            " must be an integer");
  }
  return v.get<long>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_boolean()) {
    throw mfg::InvalidInput(std::string("config: ") + key +
                            " must be a boolean");
  }
  return v.get<bool>();
}

std::string get_str(const json& j, const char* key,
                    const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) {
    throw mfg::InvalidInput(std::string("config: ") + key +
                            " must be a string");
  }
  return v.get<std::string>();
}

mfg::Vector vector_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw mfg::InvalidInput(what + " must be an array");
  mfg::Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = as_number(j[i], what + " entry");
  }
  return v;
}

mfg::Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw mfg::InvalidInput(what + " must be a non-empty nested array");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array()) {
    throw mfg::InvalidInput(what + " must be a nested array of rows");
  }
  const std::size_t cols = j[0].size();
  mfg::Matrix M(static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw mfg::BadLength(what + ": ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      M(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_number(j[r][c], what + " entry");
    }
  }
  return M;
}

json vec_json(const mfg::Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const mfg::Matrix& M) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(row);
  }
  return rows;
}

// Shortest round-trip decimal form; shared by CSV and JSON output.
std::string num_str(double x) { return json(x).dump(); }

// ------------------------------------------------------------------ hash

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

// --------------------------------------------------------------- writing

void atomic_write(const fs::path& dir, const std::string& name,
                  const std::string& content) {
  fs::create_directories(dir);
  const fs::path tmp = dir / (name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw mfg::InvalidInput("cannot open for writing: " + tmp.string());
    }
    out << content;
    out.flush();
    if (!out) throw mfg::InvalidInput("write failed: " + tmp.string());
  }
  fs::rename(tmp, dir / name);
  log_msg(LogLevel::info, "wrote " + (dir / name).string());
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

// --------------------------------------------------------------- context

struct CliContext {
  json config;
  fs::path out_dir;
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  mfg::MfgModel model;
  bool exact_critic = false;
  bool exact_mean = false;
};

std::vector<std::uint64_t> parse_seeds_string(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find(',', pos);
    if (next == std::string::npos) next = s.size();
    std::string tok = s.substr(pos, next - pos);
    const auto a = tok.find_first_not_of(" \t");
    const auto b = tok.find_last_not_of(" \t");
    tok = a == std::string::npos ? "" : tok.substr(a, b - a + 1);
    if (!tok.empty()) {
      if (tok.find_first_not_of("0123456789") != std::string::npos) {
        throw mfg::InvalidInput("--seeds: not a non-negative integer: " + tok);
      }
      out.push_back(std::stoull(tok));
    }
    pos = next + 1;
  }
  return out;
}

CliContext build_context(const std::string& config_path,
                         const std::string& out_flag,
                         const std::string& seeds_flag, bool got_seeds_flag,
                         bool exact_critic, bool exact_mean) {
  const fs::path cpath(config_path);
  json cfg = load_json_file(cpath, "config");
  if (!cfg.is_object()) {
    throw mfg::InvalidInput("config: root must be an object");
  }
  check_keys(cfg,
             {"model", "seeds", "out_dir", "solve_exact", "critic", "actor",
              "mfg"},
             "config");
  if (!cfg.contains("model") || !cfg.at("model").is_string()) {
    throw mfg::InvalidInput("config: model must be a path string");
  }
  fs::path mpath = cfg.at("model").get<std::string>();
  if (mpath.is_relative()) mpath = cpath.parent_path() / mpath;

  CliContext ctx;
  ctx.model = mfg::load_model(mpath.string());

  if (got_seeds_flag) {
    ctx.seeds = parse_seeds_string(seeds_flag);
  } else if (cfg.contains("seeds")) {
    const json& js = cfg.at("seeds");
    if (!js.is_array()) throw mfg::InvalidInput("config: seeds must be an array");
    for (const json& e : js) {
      if (!e.is_number_unsigned()) {
        throw mfg::InvalidInput("config: seeds must be non-negative integers");
      }
      ctx.seeds.push_back(e.get<std::uint64_t>());
    }
  }

  if (!out_flag.empty()) {
    ctx.out_dir = out_flag;
  } else if (cfg.contains("out_dir")) {
    if (!cfg.at("out_dir").is_string()) {
      throw mfg::InvalidInput("config: out_dir must be a string");
    }
    ctx.out_dir = cfg.at("out_dir").get<std::string>();
  } else {
    throw mfg::InvalidInput(
        "no output directory: set out_dir in the config or pass --out");
  }

  ctx.exact_critic = exact_critic;
  ctx.exact_mean = exact_mean;

  // The hash covers everything that can change the numbers: the config with
  // flag overrides folded in, minus the output location.
  json eff = cfg;
  eff.erase("out_dir");
  json jseeds = json::array();
  for (std::uint64_t s : ctx.seeds) jseeds.push_back(s);
  eff["seeds"] = jseeds;
  if (exact_critic) eff["exact_critic_override"] = true;
  if (exact_mean) eff["exact_mean_override"] = true;
  ctx.config_hash = hex64(fnv1a64(eff.dump()));
  ctx.config = std::move(cfg);
  return ctx;
}

void require_seeds(const CliContext& ctx) {
  if (ctx.seeds.empty()) {
    throw mfg::InvalidInput("seed list is empty: pass --seeds or set seeds");
  }
}

// --------------------------------------------------------- config parsing

mfg::LinearGaussianPolicy parse_policy(const json& j,
                                       const mfg::MfgModel& model,
                                       const std::string& what) {
  if (j.is_string()) {
    if (j.get<std::string>() == "zero") {
      return mfg::LinearGaussianPolicy::zero(model);
    }
    throw mfg::InvalidInput(what + ": only \"zero\" or an object is allowed");
  }
  check_keys(j, {"K", "b", "sigma"}, what);
  mfg::LinearGaussianPolicy pol = mfg::LinearGaussianPolicy::zero(model);
  if (j.contains("K")) pol.K = matrix_from_json(j.at("K"), what + ".K");
  if (j.contains("b")) pol.b = vector_from_json(j.at("b"), what + ".b");
  pol.sigma = get_num(j, "sigma", model.sigma);
  if (pol.K.rows() != model.k() || pol.K.cols() != model.m() ||
      pol.b.size() != model.k()) {
    throw mfg::DimMismatch(what + ": K must be k x m and b length k");
  }
  if (!(pol.sigma > 0.0)) {
    throw mfg::InvalidInput(what + ": sigma must be positive");
  }
  return pol;
}

mfg::ProjectionSets parse_projections(const json& sec,
                                      const mfg::MfgModel& model,
                                      const mfg::Matrix& K, double J0_auto) {
  check_keys(sec,
             {"mode", "J0", "C", "zeta1_max", "zeta2_radius", "xi1_max",
              "xi2_radius"},
             "projections");
  const std::string mode = get_str(sec, "mode", "analytic");
  if (mode == "manual") {
    mfg::ProjectionSets manual;
    manual.zeta1_max = get_num(sec, "zeta1_max", 0.0);
    manual.zeta2_radius = get_num(sec, "zeta2_radius", 0.0);
    manual.xi1_max = get_num(sec, "xi1_max", 0.0);
    manual.xi2_radius = get_num(sec, "xi2_radius", 0.0);
    return mfg::default_projection_sets(model, 1.0, K,
                                        mfg::ProjectionMode::manual, &manual);
  }
  if (mode != "analytic") {
    throw mfg::InvalidInput("projections: mode must be analytic or manual");
  }
  const double J0 = get_num(sec, "J0", J0_auto);
  const double C = get_num(sec, "C", 10.0);
  return mfg::default_projection_sets(model, J0, K,
                                      mfg::ProjectionMode::analytic, nullptr,
                                      C);
}

mfg::CriticConfig parse_critic_cfg(const json& sec,
                                   const mfg::MfgModel& model,
                                   const mfg::LinearGaussianPolicy& policy,
                                   double J0_auto) {
  check_keys(sec,
             {"T", "T_tilde", "gamma0", "burn_in", "exact_start",
              "exact_mean", "zero_noise", "projections"},
             "critic_cfg");
  mfg::CriticConfig cfg;
  cfg.T = get_long(sec, "T", cfg.T);
  cfg.T_tilde = get_long(sec, "T_tilde", cfg.T_tilde);
  cfg.gamma0 = get_num(sec, "gamma0", cfg.gamma0);
  cfg.burn_in = get_long(sec, "burn_in", cfg.burn_in);
  cfg.exact_start = get_bool(sec, "exact_start", cfg.exact_start);
  cfg.exact_mean = get_bool(sec, "exact_mean", cfg.exact_mean);
  cfg.zero_noise = get_bool(sec, "zero_noise", cfg.zero_noise);
  cfg.projections =
      parse_projections(sec.contains("projections") ? sec.at("projections")
                                                    : json::object(),
                        model, policy.K, J0_auto);
  return cfg;
}

// J0 is an upper bound on the initial cost; auto picks twice the oracle
// value so the primal box never clamps at the true cost itself.
double auto_J0(const mfg::MfgModel& model,
               const mfg::LinearGaussianPolicy& policy, const mfg::Vector& mu) {
  return 2.0 * std::max(mfg::policy_quantities(model, policy, mu).J, 1e-8);
}

mfg::CriticKind parse_critic_kind(const std::string& s) {
  if (s == "exact") return mfg::CriticKind::exact;
  if (s == "pd_gtd") return mfg::CriticKind::pd_gtd;
  if (s == "td0") return mfg::CriticKind::td0;
  throw mfg::InvalidInput("critic kind must be exact, pd_gtd, or td0");
}

mfg::ActorConfig parse_actor_cfg(const json& sec, const CliContext& ctx,
                                 const mfg::LinearGaussianPolicy& policy0,
                                 const mfg::Vector& mu) {
  check_keys(sec,
             {"N", "H", "gamma", "gamma_b", "critic", "safeguard",
              "max_halvings", "oracle_trace", "mu", "policy0", "critic_cfg"},
             "actor");
  mfg::ActorConfig a;
  a.N = get_long(sec, "N", 5);
  a.H = get_long(sec, "H", 5);
  a.gamma = get_num(sec, "gamma", 0.0);
  a.gamma_b = get_num(sec, "gamma_b", 0.0);
  a.critic = ctx.exact_critic
                 ? mfg::CriticKind::exact
                 : parse_critic_kind(get_str(sec, "critic", "pd_gtd"));
  a.safeguard = get_bool(sec, "safeguard", true);
  a.max_halvings = static_cast<int>(get_long(sec, "max_halvings", 10));
  a.oracle_trace = get_bool(sec, "oracle_trace", true);
  a.critic_cfg = parse_critic_cfg(
      sec.contains("critic_cfg") ? sec.at("critic_cfg") : json::object(),
      ctx.model, policy0, auto_J0(ctx.model, policy0, mu));
  if (ctx.exact_mean) a.critic_cfg.exact_mean = true;
  return a;
}

// ---------------------------------------------------------------- commands

void cmd_solve_exact(const CliContext& ctx) {
  const json sec = ctx.config.contains("solve_exact")
                       ? ctx.config.at("solve_exact")
                       : json::object();
  check_keys(sec, {"mu0", "tol", "max_iters"}, "solve_exact");
  const mfg::Vector mu0 =
      sec.contains("mu0") ? vector_from_json(sec.at("mu0"), "solve_exact.mu0")
                          : mfg::Vector::Zero(ctx.model.m());
  const double tol = get_num(sec, "tol", 1e-10);
  const long max_iters = get_long(sec, "max_iters", 10000);

  const mfg::NashResult nash = mfg::exact_nash(ctx.model, mu0, tol, max_iters);
  log_msg(LogLevel::info,
          "fixed point after " + std::to_string(nash.iters) + " iterations");

  json out;
  out["config_hash"] = ctx.config_hash;
  out["mu_star"] = vec_json(nash.mu_star);
  out["K_star"] = mat_json(nash.policy_star.K);
  out["b_star"] = vec_json(nash.policy_star.b);
  out["L0"] = nash.contraction.L0;
  out["L1"] = nash.contraction.L1;
  out["L2"] = nash.contraction.L2;
  out["L3"] = nash.contraction.L3;
  out["riccati_residual"] = nash.contraction.riccati_residual;
  out["fixedpoint_residual"] = nash.fixedpoint_residual;
  out["iters"] = nash.iters;
  atomic_write(ctx.out_dir, "nash.json", out.dump(2) + "\n");
}

void cmd_eval_critic(const CliContext& ctx) {
  require_seeds(ctx);
  const json sec = ctx.config.contains("critic") ? ctx.config.at("critic")
                                                 : json::object();
  check_keys(sec,
             {"algo", "T_sweep", "policy", "mu", "T", "T_tilde", "gamma0",
              "burn_in", "exact_start", "exact_mean", "zero_noise",
              "projections"},
             "critic");
  const mfg::LinearGaussianPolicy policy = parse_policy(
      sec.contains("policy") ? sec.at("policy") : json("zero"), ctx.model,
      "critic.policy");
  const mfg::Vector mu =
      sec.contains("mu") ? vector_from_json(sec.at("mu"), "critic.mu")
                         : mfg::Vector::Zero(ctx.model.m());
  std::string algo = get_str(sec, "algo", "pd_gtd");
  if (ctx.exact_critic) algo = "exact";
  if (algo != "pd_gtd" && algo != "td0" && algo != "exact") {
    throw mfg::InvalidInput("critic.algo must be pd_gtd, td0, or exact");
  }

  json ccfg = sec;
  for (const char* k : {"algo", "T_sweep", "policy", "mu"}) ccfg.erase(k);
  mfg::CriticConfig base =
      parse_critic_cfg(ccfg, ctx.model, policy, auto_J0(ctx.model, policy, mu));
  if (ctx.exact_mean) base.exact_mean = true;

  std::vector<long> sweep;
  if (sec.contains("T_sweep")) {
    for (const json& e : sec.at("T_sweep")) {
      if (!e.is_number_integer()) {
        throw mfg::InvalidInput("critic.T_sweep must hold integers");
      }
      sweep.push_back(e.get<long>());
    }
    if (sweep.empty()) throw mfg::InvalidInput("critic.T_sweep is empty");
  } else {
    sweep.push_back(base.T);
  }

  const mfg::QParams truth = mfg::q_params(ctx.model, policy, mu);
  const mfg::Vector mu_true = mfg::stationary_mean(ctx.model, policy, mu);
  const double J_true = mfg::policy_quantities(ctx.model, policy, mu).J;
  const double ups_scale = truth.Upsilon.norm();

  std::string csv = "# config_hash=" + ctx.config_hash + "\n";
  csv += "seed,T,Upsilon_err,q_err,mu_err,J_err\n";
  for (std::uint64_t seed : ctx.seeds) {
    for (long T : sweep) {
      mfg::CriticConfig cfg = base;
      cfg.T = T;
      mfg::RngState rng(seed);
      mfg::CriticEstimate est;
      if (algo == "exact") {
        est = mfg::exact_critic(ctx.model, policy, mu);
      } else if (algo == "pd_gtd") {
        est = mfg::pd_gtd(ctx.model, policy, mu, cfg, rng);
      } else {
        est = mfg::td0(ctx.model, policy, mu, cfg, rng);
      }
      const double ups_err =
          (est.Upsilon_hat - truth.Upsilon).norm() / ups_scale;
      const double q_err = (est.q_hat - truth.q).norm();
      const double mu_err = (est.mu_hat - mu_true).norm();
      const double J_err = std::abs(est.J_hat - J_true);
      csv += std::to_string(seed) + "," + std::to_string(T) + "," +
             num_str(ups_err) + "," + num_str(q_err) + "," + num_str(mu_err) +
             "," + num_str(J_err) + "\n";
      log_msg(LogLevel::debug, "seed " + std::to_string(seed) + " T " +
                                   std::to_string(T) + " Upsilon_err " +
                                   num_str(ups_err));
    }
  }
  atomic_write(ctx.out_dir, "critic_bench.csv", csv);
}

std::string actor_trace_csv(const CliContext& ctx, std::uint64_t seed,
                            const std::vector<mfg::ActorRecord>& trace) {
  std::string csv = "# config_hash=" + ctx.config_hash +
                    " seed=" + std::to_string(seed) + "\n";
  csv += "phase,iter,rho,J1_gap,J2_gap,K_err,b_err\n";
  for (const mfg::ActorRecord& r : trace) {
    csv += std::string(1, r.phase) + "," + std::to_string(r.iter) + "," +
           num_str(r.rho) + ",";
    if (r.has_oracle && r.phase == 'K') csv += num_str(r.J1_gap);
    csv += ",";
    if (r.has_oracle && r.phase == 'b') csv += num_str(r.J2_gap);
    csv += ",";
    if (r.has_oracle && r.phase == 'K') csv += num_str(r.K_err);
    csv += ",";
    if (r.has_oracle && r.phase == 'b') csv += num_str(r.b_err);
    csv += "\n";
  }
  return csv;
}

void cmd_run_actor(const CliContext& ctx) {
  require_seeds(ctx);
  const json sec = ctx.config.contains("actor") ? ctx.config.at("actor")
                                                : json::object();
  const mfg::LinearGaussianPolicy policy0 = parse_policy(
      sec.contains("policy0") ? sec.at("policy0") : json("zero"), ctx.model,
      "actor.policy0");
  const mfg::Vector mu =
      sec.contains("mu") ? vector_from_json(sec.at("mu"), "actor.mu")
                         : mfg::Vector::Zero(ctx.model.m());
  const mfg::ActorConfig acfg = parse_actor_cfg(sec, ctx, policy0, mu);

  json runs = json::array();
  for (std::uint64_t seed : ctx.seeds) {
    mfg::RngState rng(seed);
    const mfg::ActorResult res =
        mfg::natural_actor_critic(ctx.model, mu, policy0, acfg, rng);
    atomic_write(ctx.out_dir, "actor_trace_seed" + std::to_string(seed) + ".csv",
                 actor_trace_csv(ctx, seed, res.trace));
    json run;
    run["seed"] = seed;
    run["J_hat"] = res.J_hat;
    run["steps"] = res.steps;
    run["mu_hat"] = vec_json(res.mu_hat);
    run["K"] = mat_json(res.policy.K);
    run["b"] = vec_json(res.policy.b);
    runs.push_back(run);
  }
  json out;
  out["config_hash"] = ctx.config_hash;
  json jseeds = json::array();
  for (std::uint64_t s : ctx.seeds) jseeds.push_back(s);
  out["seeds"] = jseeds;
  out["runs"] = runs;
  atomic_write(ctx.out_dir, "actor_summary.json", out.dump(2) + "\n");
}

void cmd_run_mfg(const CliContext& ctx) {
  require_seeds(ctx);
  const json msec = ctx.config.contains("mfg") ? ctx.config.at("mfg")
                                               : json::object();
  check_keys(msec,
             {"S", "mu0", "budget_growth", "exact_mean_update",
              "oracle_diagnostics"},
             "mfg");
  const json asec = ctx.config.contains("actor") ? ctx.config.at("actor")
                                                 : json::object();
  const mfg::Vector mu0 =
      msec.contains("mu0") ? vector_from_json(msec.at("mu0"), "mfg.mu0")
                           : mfg::Vector::Zero(ctx.model.m());
  const mfg::LinearGaussianPolicy policy0 = parse_policy(
      asec.contains("policy0") ? asec.at("policy0") : json("zero"), ctx.model,
      "actor.policy0");

  mfg::MfgConfig mcfg;
  mcfg.S = get_long(msec, "S", 1);
  mcfg.mu0 = mu0;
  mcfg.policy0 = policy0;
  mcfg.budget_growth = get_num(msec, "budget_growth", 1.5);
  mcfg.exact_mean_update =
      get_bool(msec, "exact_mean_update", false) || ctx.exact_mean;
  mcfg.oracle_diagnostics = get_bool(msec, "oracle_diagnostics", true);
  mcfg.actor = parse_actor_cfg(asec, ctx, policy0, mu0);

  std::vector<std::vector<double>> mu_err_by_round;
  bool any_oracle = false;
  double L0 = 0.0;
  bool warned = false;
  json runs = json::array();
  for (std::uint64_t seed : ctx.seeds) {
    mfg::RngState rng(seed);
    const mfg::MfgResult res = mfg::solve_mfg(ctx.model, mcfg, rng);
    L0 = res.L0;
    if (res.contraction_warning && !warned) {
      log_msg(LogLevel::warn,
              "L0 = " + num_str(res.L0) +
                  " is not below 1: no contraction guarantee, proceeding");
      warned = true;
    }
    std::string csv = "# config_hash=" + ctx.config_hash +
                      " seed=" + std::to_string(seed) + "\n";
    csv += "s";
    for (Eigen::Index i = 0; i < ctx.model.m(); ++i) {
      csv += ",mu_" + std::to_string(i);
    }
    csv += ",mu_err,K_err,b_err,J_gap\n";
    if (mu_err_by_round.size() < res.trace.size()) {
      mu_err_by_round.resize(res.trace.size());
    }
    for (const mfg::MfgRecord& r : res.trace) {
      csv += std::to_string(r.s);
      for (Eigen::Index i = 0; i < r.mu.size(); ++i) {
        csv += "," + num_str(r.mu(i));
      }
      if (r.has_oracle) {
        any_oracle = true;
        mu_err_by_round[static_cast<std::size_t>(r.s)].push_back(r.mu_err);
        csv += "," + num_str(r.mu_err) + "," + num_str(r.K_err) + "," +
               num_str(r.b_err) + "," + num_str(r.J_gap);
      } else {
        csv += ",,,,";
      }
      csv += "\n";
    }
    atomic_write(ctx.out_dir, "mfg_trace_seed" + std::to_string(seed) + ".csv",
                 csv);
    json run;
    run["seed"] = seed;
    run["steps"] = res.steps;
    run["mu"] = vec_json(res.mu);
    run["K"] = mat_json(res.policy.K);
    run["b"] = vec_json(res.policy.b);
    runs.push_back(run);
  }

  json out;
  out["config_hash"] = ctx.config_hash;
  json jseeds = json::array();
  for (std::uint64_t s : ctx.seeds) jseeds.push_back(s);
  out["seeds"] = jseeds;
  out["L0"] = L0;
  out["contraction_warning"] = warned;
  out["runs"] = runs;
  if (any_oracle) {
    json rounds = json::array();
    for (std::size_t s = 0; s < mu_err_by_round.size(); ++s) {
      const std::vector<double>& errs = mu_err_by_round[s];
      if (errs.empty()) continue;
      json row;
      row["s"] = s;
      row["mu_err_median"] = quantile(errs, 0.5);
      row["mu_err_q25"] = quantile(errs, 0.25);
      row["mu_err_q75"] = quantile(errs, 0.75);
      rounds.push_back(row);
    }
    out["mu_err_by_round"] = rounds;
  }
  atomic_write(ctx.out_dir, "summary.json", out.dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    g_log_level = log_level_from_env();

    CLI::App app{"linear-quadratic mean-field game solver"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_flag;
    std::string seeds_flag;
    bool got_seeds = false;
    bool exact_critic = false;
    bool exact_mean = false;

    const auto add_common = [&](CLI::App* sub) {
      sub->add_option("--config", config_path, "experiment config JSON path")
          ->required();
      sub->add_option("--out", out_flag,
                      "output directory (overrides config out_dir)");
      sub->add_option("--seeds", seeds_flag,
                      "comma separated seeds (overrides config seeds)")
          ->each([&](const std::string&) { got_seeds = true; });
      sub->add_flag("--exact-critic", exact_critic,
                    "replace the sampled critic with the closed-form oracle");
      sub->add_flag("--exact-mean", exact_mean,
                    "use closed-form stationary means in place of sampled");
    };

    CLI::App* c_solve =
        app.add_subcommand("solve-exact", "closed-form Nash equilibrium");
    CLI::App* c_critic = app.add_subcommand(
        "eval-critic", "benchmark sampled critics against the oracle");
    CLI::App* c_actor =
        app.add_subcommand("run-actor", "natural actor-critic at fixed mu");
    CLI::App* c_mfg =
        app.add_subcommand("run-mfg", "fixed-point iteration over rounds");
    add_common(c_solve);
    add_common(c_critic);
    add_common(c_actor);
    add_common(c_mfg);

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      std::cerr << "error: " << e.what() << "\n\n" << app.help() << "\n";
      return 1;
    }

    const CliContext ctx = build_context(config_path, out_flag, seeds_flag,
                                         got_seeds, exact_critic, exact_mean);
    if (c_solve->parsed()) {
      cmd_solve_exact(ctx);
    } else if (c_critic->parsed()) {
      cmd_eval_critic(ctx);
    } else if (c_actor->parsed()) {
      cmd_run_actor(ctx);
    } else {
      cmd_run_mfg(ctx);
    }
    return 0;
  } catch (const mfg::InvalidInput& e) {
    log_msg(LogLevel::error, e.what());
    return 1;
  } catch (const mfg::PreconditionError& e) {
    log_msg(LogLevel::error, e.what());
    return 2;
  } catch (const mfg::DivergenceError& e) {
    log_msg(LogLevel::error, e.what());
    return 3;
  } catch (const std::exception& e) {
    log_msg(LogLevel::error, std::string("unexpected: ") + e.what());
    return 1;
  }
}
