#include "lrmr/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "lrmr/io.hpp"
#include "lrmr/seed.hpp"

namespace lrmr {

const char* to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::gaussian: return "gaussian";
    case EnsembleKind::coordinate: return "coordinate";
    case EnsembleKind::custom_path: return "custom-path";
  }
  return "unknown";
}

const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::none: return "none";
    case NoiseKind::sphere_uniform_at_eps: return "sphere-uniform-at-eps";
    case NoiseKind::sphere_uniform_scaled: return "sphere-uniform-scaled";
  }
  return "unknown";
}

EnsembleKind ensemble_kind_from_string(const std::string& s) {
  if (s == "gaussian") return EnsembleKind::gaussian;
  if (s == "coordinate") return EnsembleKind::coordinate;
  if (s == "custom-path") return EnsembleKind::custom_path;
  throw DomainError("unknown ensemble kind: " + s);
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "none") return NoiseKind::none;
  if (s == "sphere-uniform-at-eps") return NoiseKind::sphere_uniform_at_eps;
  if (s == "sphere-uniform-scaled") return NoiseKind::sphere_uniform_scaled;
  throw DomainError("unknown noise kind: " + s);
}

void ExperimentConfig::validate() const {
  if (n1 < 1 || n2 < 1) throw DomainError("config: n1 and n2 must be positive");
  if (ensemble_kind == EnsembleKind::gaussian && m < 1) throw DomainError("config: m must be >= 1");
  if (rank < 1 || rank > std::min(n1, n2)) throw DomainError("config: need 1 <= rank <= min(n1, n2)");
  if (k < 1) throw DomainError("config: k must be >= 1");
  if (!(t > 1.0)) throw DomainError("config: t must be > 1");
  if (!(lambda > 0.0)) throw DomainError("config: lambda must be > 0");
  if (!(epsilon >= 0.0)) throw DomainError("config: epsilon must be >= 0");
  if (trials < 1) throw DomainError("config: trials must be >= 1");
  if (ric_samples < 1) throw DomainError("config: ric_samples must be >= 1");
  if (!(ric_margin >= 0.0)) throw DomainError("config: ric_margin must be >= 0");
  if (ensemble_kind == EnsembleKind::custom_path && ensemble_path.empty())
    throw DomainError("config: custom-path ensemble needs ensemble_path");
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
  return nlohmann::json{{"n1", c.n1},
                        {"n2", c.n2},
                        {"m", c.m},
                        {"rank", c.rank},
                        {"k", c.k},
                        {"t", c.t},
                        {"lambda", c.lambda},
                        {"epsilon", c.epsilon},
                        {"ensemble_kind", to_string(c.ensemble_kind)},
                        {"ensemble_path", c.ensemble_path},
                        {"noise_kind", to_string(c.noise_kind)},
                        {"trials", c.trials},
                        {"seed", c.seed},
                        {"per_trial_ensemble", c.per_trial_ensemble},
                        {"clamp_noise_to_half_lambda", c.clamp_noise_to_half_lambda},
                        {"ric_samples", c.ric_samples},
                        {"ric_margin", c.ric_margin},
                        {"max_iters", c.solver.max_iters},
                        {"tol", c.solver.tol}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("config must be a JSON object");
  ExperimentConfig c;
  static const std::set<std::string> known{
      "n1",     "n2",         "m",          "rank",          "k",
      "t",      "lambda",     "epsilon",    "ensemble_kind", "ensemble_path",
      "noise_kind", "trials", "seed",       "per_trial_ensemble", "clamp_noise_to_half_lambda",
      "ric_samples", "ric_margin", "max_iters", "tol"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw Error("config: unknown key \"" + key + "\"");
  auto real = [&](const char* key, double& dst) {
    if (j.contains(key)) dst = real_from_json(j.at(key));
  };
  auto integer = [&](const char* key, auto& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::decay_t<decltype(dst)>>();
  };
  integer("n1", c.n1);
  integer("n2", c.n2);
  integer("m", c.m);
  integer("rank", c.rank);
  integer("k", c.k);
  real("t", c.t);
  real("lambda", c.lambda);
  real("epsilon", c.epsilon);
  if (j.contains("ensemble_kind"))
    c.ensemble_kind = ensemble_kind_from_string(j.at("ensemble_kind").get<std::string>());
  if (j.contains("ensemble_path")) c.ensemble_path = j.at("ensemble_path").get<std::string>();
  if (j.contains("noise_kind")) c.noise_kind = noise_kind_from_string(j.at("noise_kind").get<std::string>());
  integer("trials", c.trials);
  integer("seed", c.seed);
  integer("per_trial_ensemble", c.per_trial_ensemble);
  integer("clamp_noise_to_half_lambda", c.clamp_noise_to_half_lambda);
  integer("ric_samples", c.ric_samples);
  real("ric_margin", c.ric_margin);
  integer("max_iters", c.solver.max_iters);
  real("tol", c.solver.tol);
  c.validate();
  return c;
}

MeasurementEnsemble gen_gaussian_ensemble(Index m, Index n1, Index n2, std::uint64_t seed) {
  if (m < 1) throw DomainError("gen_gaussian_ensemble: m must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(m)));
  MatrixXd design(m, n1 * n2);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n1 * n2; ++j) design(i, j) = normal(rng);
  return MeasurementEnsemble(n1, n2, std::move(design));
}

MatrixXd gen_low_rank(Index n1, Index n2, int r, std::uint64_t seed) {
  if (r < 1 || r > std::min(n1, n2)) throw DomainError("gen_low_rank: need 1 <= r <= min(n1, n2)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  MatrixXd g(n1, r), h(n2, r);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = normal(rng);
  for (Index i = 0; i < h.size(); ++i) h.data()[i] = normal(rng);
  MatrixXd x = g * h.transpose();
  return x / x.norm();
}

VectorXd gen_noise(Index m, double epsilon, NoiseKind kind, std::uint64_t seed) {
  if (!(epsilon >= 0.0)) throw DomainError("gen_noise: epsilon must be >= 0");
  if (kind == NoiseKind::none || epsilon == 0.0) return VectorXd::Zero(m);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  VectorXd n(m);
  for (Index i = 0; i < m; ++i) n(i) = normal(rng);
  double radius = epsilon;
  if (kind == NoiseKind::sphere_uniform_scaled) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    radius *= unit(rng);
  }
  n *= radius / n.norm();
  // Rounding can overshoot the sphere by an ulp; pull back inside the ball.
  if (n.norm() > epsilon) n *= epsilon / n.norm() * (1.0 - 1e-15);
  return n;
}

const std::vector<std::string>& trial_csv_columns() {
  static const std::vector<std::string> cols{
      "trial_seed", "frob_error",  "map_error",  "tail_norm",   "lemma3_pass", "thm1_8_lhs",
      "thm1_8_rhs", "thm1_9_lhs", "thm1_9_rhs", "gate_status", "iterations"};
  return cols;
}

namespace {

std::string fmt_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MeasurementEnsemble make_ensemble(const ExperimentConfig& cfg, std::uint64_t seed) {
  switch (cfg.ensemble_kind) {
    case EnsembleKind::gaussian: return gen_gaussian_ensemble(cfg.m, cfg.n1, cfg.n2, seed);
    case EnsembleKind::coordinate: return MeasurementEnsemble::coordinate(cfg.n1, cfg.n2);
    case EnsembleKind::custom_path: {
      auto ens = read_ensemble(cfg.ensemble_path);
      if (ens.rows() != cfg.n1 || ens.cols() != cfg.n2)
        throw DimensionError("config: ensemble file shape differs from n1 x n2");
      return ens;
    }
  }
  throw DomainError("unknown ensemble kind");
}

constexpr std::uint64_t kCampaignEnsembleIndex = std::numeric_limits<std::uint64_t>::max();

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const auto idx = static_cast<std::size_t>(std::ceil(q * static_cast<double>(v.size())));
  return v[std::min(v.size() - 1, idx == 0 ? 0 : idx - 1)];
}

nlohmann::json gate_to_json(const CampaignContext& ctx, const ExperimentConfig& cfg) {
  nlohmann::json g{{"order", ric_order(cfg.t, cfg.k)},
                   {"margin", cfg.ric_margin},
                   {"threshold", rip_threshold(cfg.t)},
                   {"gate_delta", ctx.gate_delta},
                   {"gate_ok", ctx.gate_ok},
                   {"reason", ctx.gate_reason}};
  if (ctx.gate_estimate) g["estimate"] = ric_to_json(*ctx.gate_estimate);
  if (g.contains("estimate")) g["estimate"].erase("witness");
  return g;
}

}  // namespace

std::string records_to_csv(const std::vector<TrialRecord>& records) {
  std::ostringstream out;
  const auto& cols = trial_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const auto& r : records) {
    out << r.trial_seed << ',' << fmt_real(r.frob_error) << ',' << fmt_real(r.map_error) << ','
        << fmt_real(r.tail_norm) << ',' << (r.lemma3_pass ? "true" : "false") << ','
        << fmt_real(r.thm1_8_lhs) << ',' << fmt_real(r.thm1_8_rhs) << ',' << fmt_real(r.thm1_9_lhs)
        << ',' << fmt_real(r.thm1_9_rhs) << ',' << to_string(r.gate_status) << ',' << r.iterations
        << "\n";
  }
  return out.str();
}

CampaignContext prepare_campaign(const ExperimentConfig& cfg, std::uint64_t ensemble_seed) {
  CampaignContext ctx;
  ctx.ensemble = make_ensemble(cfg, ensemble_seed);
  const int order = ric_order(cfg.t, cfg.k);
  if (order > std::min(cfg.n1, cfg.n2)) {
    ctx.gate_reason = "RIC order exceeds min(n1, n2)";
    return ctx;
  }
  ctx.gate_estimate = mc_matrix_ric(ctx.ensemble, order, cfg.ric_samples, derive_seed(ensemble_seed, 4));
  ctx.gate_estimate->witness.reset();
  ctx.gate_delta = ctx.gate_estimate->value + cfg.ric_margin;
  ctx.gate_ok = ctx.gate_delta < rip_threshold(cfg.t);
  if (!ctx.gate_ok) {
    std::ostringstream msg;
    msg << "RIC estimate + margin " << ctx.gate_delta << " >= threshold " << rip_threshold(cfg.t);
    ctx.gate_reason = msg.str();
  }
  return ctx;
}

TrialRecord run_trial(const ExperimentConfig& cfg, int trial_index) {
  cfg.validate();
  const std::uint64_t ens_seed =
      cfg.per_trial_ensemble
          ? derive_seed(derive_seed(cfg.seed, static_cast<std::uint64_t>(trial_index)), 3)
          : derive_seed(cfg.seed, kCampaignEnsembleIndex);
  return run_trial(cfg, prepare_campaign(cfg, ens_seed), trial_index);
}

TrialRecord run_trial(const ExperimentConfig& cfg, const CampaignContext& ctx, int trial_index) {
  TrialRecord rec;
  rec.trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial_index));
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  rec.thm1_8_rhs = rec.thm1_9_rhs = nan;
  rec.gate_delta = ctx.gate_delta;

  RecoveryProblem p;
  p.ensemble = ctx.ensemble;
  p.lambda = cfg.lambda;
  p.epsilon = cfg.epsilon;
  const MatrixXd truth = gen_low_rank(cfg.n1, cfg.n2, cfg.rank, derive_seed(rec.trial_seed, 1));
  double radius = cfg.epsilon;
  if (cfg.clamp_noise_to_half_lambda) radius = std::min(radius, 0.5 * cfg.lambda);
  const VectorXd noise = gen_noise(p.ensemble.size(), radius, cfg.noise_kind, derive_seed(rec.trial_seed, 2));
  p.b = apply_map(p.ensemble, truth) + noise;
  p.truth = truth;
  p.noise = noise;

  SolverResult sol;
  try {
    sol = solve_rnnm(p, cfg.solver);
  } catch (const Error& e) {
    rec.solver_failed = true;
    rec.error = e.what();
    rec.frob_error = rec.map_error = rec.tail_norm = nan;
    rec.thm1_8_lhs = rec.thm1_9_lhs = nan;
    return rec;
  }
  rec.iterations = sol.iterations;
  rec.converged = sol.converged;
  // Recomputed from the returned solution, not copied from the solver.
  rec.certificate_pass = check_optimality(p, sol.solution, cfg.solver.tol).passes();

  rec.lemma3 = check_lemma3(p, sol.solution, cfg.k);
  rec.lemma3_pass = rec.lemma3.passes();

  TheoryParams params;
  params.t = cfg.t;
  params.k = cfg.k;
  params.delta = ctx.gate_delta;
  const Theorem1Report thm = verify_theorem1(p, sol.solution, params);
  rec.frob_error = thm.frob_error;
  rec.map_error = thm.map_error;
  rec.tail_norm = thm.tail_norm;
  rec.thm1_8_lhs = thm.map_error;
  rec.thm1_9_lhs = thm.frob_error;
  if (ctx.gate_ok && thm.status == GateStatus::verified) {
    rec.gate_status = GateStatus::verified;
    rec.thm1_8_rhs = thm.bound8_rhs;
    rec.thm1_9_rhs = thm.bound9_rhs;
    rec.thm1_pass = thm.passes();
  }
  return rec;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads) {
  cfg.validate();
  ExperimentResult out;
  out.records.resize(static_cast<std::size_t>(cfg.trials));

  std::optional<CampaignContext> shared;
  if (!cfg.per_trial_ensemble) shared = prepare_campaign(cfg, derive_seed(cfg.seed, kCampaignEnsembleIndex));

  auto work = [&](int first, int stride) {
    for (int i = first; i < cfg.trials; i += stride) {
      auto& rec = out.records[static_cast<std::size_t>(i)];
      try {
        rec = shared ? run_trial(cfg, *shared, i) : run_trial(cfg, i);
      } catch (const std::exception& e) {
        rec = TrialRecord{};
        rec.trial_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
        rec.solver_failed = true;
        rec.error = e.what();
      }
    }
  };
  const int workers = std::clamp(threads, 1, cfg.trials);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (auto& th : pool) th.join();
  }

  int failures = 0, converged = 0, cert_pass = 0, lemma3_conv = 0, lemma3_all = 0, gated = 0,
      thm_pass = 0;
  double slack5 = std::numeric_limits<double>::infinity(), slack6 = slack5, slack8 = slack5,
         slack9 = slack5;
  std::vector<double> errors;
  std::vector<std::string> failure_messages;
  for (const auto& r : out.records) {
    if (r.solver_failed) {
      ++failures;
      failure_messages.push_back(r.error);
      continue;
    }
    errors.push_back(r.frob_error);
    lemma3_all += r.lemma3_pass;
    if (r.converged) {
      ++converged;
      cert_pass += r.certificate_pass;
      lemma3_conv += r.lemma3_pass;
      slack5 = std::min(slack5, r.lemma3.ineq5_rhs - r.lemma3.ineq5_lhs);
      slack6 = std::min(slack6, r.lemma3.ineq6_rhs - r.lemma3.ineq6_lhs);
    }
    if (r.gate_status == GateStatus::verified) {
      ++gated;
      thm_pass += r.thm1_pass;
      slack8 = std::min(slack8, r.thm1_8_rhs - r.thm1_8_lhs);
      slack9 = std::min(slack9, r.thm1_9_rhs - r.thm1_9_lhs);
    }
  }
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  auto rate = [](int num, int den) {
    return den > 0 ? nlohmann::json(static_cast<double>(num) / den) : nlohmann::json(nullptr);
  };

  nlohmann::json s = provenance("experiment", config_to_json(cfg));
  s["trials"] = cfg.trials;
  s["solver_failures"] = failures;
  s["failure_messages"] = failure_messages;
  s["converged"] = converged;
  s["certificate_pass_among_converged"] = cert_pass;
  s["lemma3_pass_among_converged"] = lemma3_conv;
  s["lemma3_pass_rate_among_converged"] = rate(lemma3_conv, converged);
  s["lemma3_pass_all"] = lemma3_all;
  s["gated"] = gated;
  s["precondition_unmet"] = cfg.trials - failures - gated;
  s["thm1_pass_among_gated"] = thm_pass;
  s["thm1_pass_rate_among_gated"] = rate(thm_pass, gated);
  s["min_slack"] = {{"ineq5", finite_or_null(slack5)},
                    {"ineq6", finite_or_null(slack6)},
                    {"bound8", finite_or_null(slack8)},
                    {"bound9", finite_or_null(slack9)}};
  s["frob_error_quantiles"] = {{"min", finite_or_null(quantile(errors, 0.0))},
                               {"median", finite_or_null(quantile(errors, 0.5))},
                               {"p90", finite_or_null(quantile(errors, 0.9))},
                               {"max", finite_or_null(quantile(errors, 1.0))}};
  if (shared) s["gate"] = gate_to_json(*shared, cfg);
  out.summary = std::move(s);
  return out;
}

ExperimentConfig apply_axis(ExperimentConfig cfg, const std::string& name, double value) {
  if (name == "m") {
    cfg.m = static_cast<Index>(std::llround(value));
  } else if (name == "rank") {
    cfg.rank = static_cast<int>(std::llround(value));
    cfg.k = cfg.rank;
  } else if (name == "lambda") {
    cfg.lambda = value;
  } else if (name == "epsilon") {
    cfg.epsilon = value;
  } else {
    throw DomainError("phase axis must be one of m, rank, lambda, epsilon (got " + name + ")");
  }
  return cfg;
}

std::vector<PhaseCell> phase_sweep(const ExperimentConfig& base, const PhaseAxis& x,
                                   const PhaseAxis& y, double threshold, int threads) {
  if (x.values.empty() || y.values.empty()) throw DomainError("phase_sweep: empty axis");
  if (x.name == y.name) throw DomainError("phase_sweep: axes must differ");
  std::vector<PhaseCell> cells;
  for (double xv : x.values) {
    for (double yv : y.values) {
      const ExperimentConfig cfg = apply_axis(apply_axis(base, x.name, xv), y.name, yv);
      const auto res = run_experiment(cfg, threads);
      PhaseCell c;
      c.x = xv;
      c.y = yv;
      c.trials = cfg.trials;
      std::vector<double> errs;
      for (const auto& r : res.records) {
        if (r.solver_failed) continue;
        errs.push_back(r.frob_error);
        c.successes += r.frob_error <= threshold;
      }
      c.success_fraction = static_cast<double>(c.successes) / c.trials;
      c.median_frob_error = quantile(errs, 0.5);
      cells.push_back(c);
    }
  }
  return cells;
}

std::string phase_to_csv(const PhaseAxis& x, const PhaseAxis& y, const std::vector<PhaseCell>& cells) {
  std::ostringstream out;
  out << x.name << ',' << y.name << ",trials,successes,success_fraction,median_frob_error\n";
  for (const auto& c : cells)
    out << fmt_real(c.x) << ',' << fmt_real(c.y) << ',' << c.trials << ',' << c.successes << ','
        << fmt_real(c.success_fraction) << ',' << fmt_real(c.median_frob_error) << "\n";
  return out.str();
}

}  // namespace lrmr
