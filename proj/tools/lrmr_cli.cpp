// lrmr: command-line front end.
//
//   lrmr solve      --problem P.json [--solver rnnm|nnm|bpdn] [--max-iters N] [--tol T] [--out R.json]
//   lrmr bounds     --t T --k K --delta D --lambda L --eps E [--out B.json]
//   lrmr ric        --mode exact|mc|ascent --k K --ensemble E.json [--samples S] [--seed S] [--steps N] [--out R.json]
//   lrmr verify     --problem P.json --solution R.json --k K [--t T] (--delta D | --seed S) [--out V.json]
//   lrmr experiment --seed S [--config C.json] [--out trials.csv] [--summary S.json] [--threads N]
//   lrmr phase      --seed S --x NAME --x-values a,b --y NAME --y-values c,d [--config C.json] ...
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>

#include <cstdio>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "lrmr/harness.hpp"
#include "lrmr/io.hpp"
#include "lrmr/ric.hpp"
#include "lrmr/seed.hpp"
#include "lrmr/solvers.hpp"
#include "lrmr/theory.hpp"

namespace {

using lrmr::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes machine-readable JSON to `out` if given, else to stdout.
void emit_json(const json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    lrmr::write_json(j, out);
  }
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("not a number in list: \"" + item + "\"");
    }
  }
  if (out.empty()) throw UsageError("empty value list");
  return out;
}

struct SolveArgs {
  std::string problem, solver = "rnnm", out;
  int max_iters = 20000;
  double tol = 1e-6;
};

int run_solve(const SolveArgs& a) {
  const auto p = lrmr::read_problem(a.problem);
  lrmr::SolverOptions opts;
  opts.max_iters = a.max_iters;
  opts.tol = a.tol;
  const json config{{"problem", a.problem}, {"solver", a.solver}, {"max_iters", a.max_iters}, {"tol", a.tol}};

  json doc;
  bool converged = false;
  int iters = 0;
  double objective = 0.0;
  if (a.solver == "rnnm" || a.solver == "nnm") {
    const auto r = a.solver == "rnnm" ? lrmr::solve_rnnm(p, opts) : lrmr::solve_nnm_constrained(p, opts);
    doc = lrmr::solver_result_to_json(r);
    converged = r.converged;
    iters = r.iterations;
    objective = r.final_objective;
  } else {
    const auto r = lrmr::solve_bpdn(p.ensemble.design(), p.b, p.lambda, opts);
    doc = lrmr::solver_result_to_json(r);
    converged = r.converged;
    iters = r.iterations;
    objective = r.final_objective;
  }
  doc["solver"] = a.solver;
  doc["provenance"] = lrmr::provenance("solve", config);
  emit_json(doc, a.out);
  if (!a.out.empty())
    std::cout << a.solver << ": " << (converged ? "converged" : "NOT converged") << " after " << iters
              << " iterations, objective " << fmt(objective) << "\n";
  return 0;
}

struct BoundsArgs {
  double t = 0, delta = 0, lambda = 0, eps = 0;
  int k = 0;
  std::string out;
};

int run_bounds(const BoundsArgs& a) {
  lrmr::TheoryParams p{a.t, a.k, a.delta, a.lambda, a.eps};
  const auto b = lrmr::theorem1_constants(p);
  json doc = lrmr::bounds_to_json(b);
  doc["threshold"] = lrmr::rip_threshold(a.t);
  doc["provenance"] = lrmr::provenance(
      "bounds", json{{"t", a.t}, {"k", a.k}, {"delta", a.delta}, {"lambda", a.lambda}, {"eps", a.eps}});
  emit_json(doc, a.out);
  if (a.out.empty()) return 0;
  auto row = [](const char* name, const std::string& v) {
    std::cout << std::left << std::setw(14) << name << v << "\n";
  };
  row("threshold", fmt(lrmr::rip_threshold(a.t)));
  row("condition_ok", b.condition_ok ? "true" : "false");
  row("beta1", fmt(b.beta1));
  row("beta2", fmt(b.beta2));
  row("C1", fmt(b.c1));
  row("C2", fmt(b.c2));
  row("C3", b.c3 ? fmt(*b.c3) : "undefined");
  row("C4", b.c4 ? fmt(*b.c4) : "undefined");
  return 0;
}

struct RicArgs {
  std::string mode, ensemble, out;
  int k = 0, steps = 200;
  long long samples = 10000;
  std::optional<std::uint64_t> seed;
};

int run_ric(const RicArgs& a) {
  const auto ens = lrmr::read_ensemble(a.ensemble);
  lrmr::RicEstimate r;
  if (a.mode == "exact") {
    r = lrmr::exact_sparse_ric(ens.design(), a.k);
  } else {
    if (!a.seed) throw UsageError("--seed is required for --mode " + a.mode);
    r = lrmr::mc_matrix_ric(ens, a.k, a.samples, *a.seed);
    if (a.mode == "ascent") {
      lrmr::AscentOptions opts;
      opts.steps = a.steps;
      const auto refined = lrmr::ascent_refine_ric(ens, a.k, *r.witness, opts);
      const long long total = r.samples + refined.samples;
      if (refined.value >= r.value) r = refined;
      r.method = lrmr::RicMethod::mc_plus_ascent;
      r.samples = total;
    }
  }
  json doc = lrmr::ric_to_json(r);
  doc["provenance"] = lrmr::provenance(
      "ric", json{{"mode", a.mode}, {"k", a.k}, {"samples", a.samples}, {"steps", a.steps},
                  {"seed", a.seed ? json(*a.seed) : json(nullptr)}, {"ensemble", a.ensemble}});
  emit_json(doc, a.out);
  if (!a.out.empty())
    std::cout << "delta_" << r.order << " " << (r.is_exact ? "=" : ">=") << " " << fmt(r.value) << " ("
              << lrmr::to_string(r.method) << ")\n";
  return 0;
}

struct VerifyArgs {
  std::string problem, solution, out;
  int k = 0;
  double t = 2.0, margin = 0.05;
  std::optional<double> delta;
  std::optional<std::uint64_t> seed;
  long long samples = 10000;
};

int run_verify(const VerifyArgs& a) {
  const auto p = lrmr::read_problem(a.problem);
  if (!p.truth) throw lrmr::DomainError("verify: problem has no ground truth");
  const json sol = lrmr::read_json(a.solution);
  if (!sol.contains("solution")) throw lrmr::Error("verify: solution file lacks \"solution\"");
  const lrmr::MatrixXd x = lrmr::matrix_from_json(sol.at("solution"));

  json gate;
  double delta = 0.0;
  if (a.delta) {
    delta = *a.delta;
    gate = {{"source", "given"}, {"delta", delta}};
  } else {
    if (!a.seed) throw UsageError("verify needs --delta or --seed (for the Monte-Carlo gate)");
    const int order = lrmr::ric_order(a.t, a.k);
    const auto est = lrmr::mc_matrix_ric(p.ensemble, order, a.samples, *a.seed);
    delta = est.value + a.margin;
    gate = {{"source", "monte-carlo"}, {"order", order}, {"estimate", est.value},
            {"margin", a.margin}, {"delta", delta}};
  }
  lrmr::TheoryParams params;
  params.t = a.t;
  params.k = a.k;
  params.delta = delta;
  const auto l3 = lrmr::check_lemma3(p, x, a.k);
  const auto t1 = lrmr::verify_theorem1(p, x, params);

  json doc{{"lemma3", lrmr::lemma3_to_json(l3)}, {"theorem1", lrmr::theorem1_to_json(t1)}, {"gate", gate}};
  doc["provenance"] = lrmr::provenance(
      "verify", json{{"problem", a.problem}, {"solution", a.solution}, {"k", a.k}, {"t", a.t},
                     {"margin", a.margin}, {"samples", a.samples},
                     {"seed", a.seed ? json(*a.seed) : json(nullptr)}});
  emit_json(doc, a.out);
  if (!a.out.empty()) {
    std::cout << "minimizer inequalities: " << (l3.passes() ? "hold" : "VIOLATED") << "\n";
    std::cout << "error bounds: " << lrmr::to_string(t1.status);
    if (t1.status == lrmr::GateStatus::verified) std::cout << (t1.passes() ? ", hold" : ", VIOLATED");
    else std::cout << " (" << t1.reason << ")";
    std::cout << "\n";
  }
  return 0;
}

struct CampaignArgs {
  std::string config, out, summary, problem_out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::optional<int> emit_problem;
  // phase only
  std::string x, x_values, y, y_values;
  double threshold = 1e-2;
};

lrmr::ExperimentConfig load_config(const CampaignArgs& a) {
  if (!a.seed) throw UsageError("--seed is required");
  lrmr::ExperimentConfig cfg = a.config.empty() ? lrmr::ExperimentConfig{}
                                                : lrmr::config_from_json(lrmr::read_json(a.config));
  cfg.seed = *a.seed;
  cfg.validate();
  return cfg;
}

int run_experiment_cmd(const CampaignArgs& a) {
  const auto cfg = load_config(a);
  if (a.emit_problem) {
    if (a.problem_out.empty()) throw UsageError("--emit-problem needs --problem-out");
    // Rebuild the exact instance of one trial for use with solve / verify.
    const int i = *a.emit_problem;
    const std::uint64_t trial_seed = lrmr::derive_seed(cfg.seed, static_cast<std::uint64_t>(i));
    const std::uint64_t ens_seed = cfg.per_trial_ensemble
                                       ? lrmr::derive_seed(trial_seed, 3)
                                       : lrmr::derive_seed(cfg.seed, ~std::uint64_t{0});
    lrmr::ExperimentConfig quick = cfg;
    quick.ric_samples = 1;
    const auto ctx = lrmr::prepare_campaign(quick, ens_seed);
    lrmr::RecoveryProblem p;
    p.ensemble = ctx.ensemble;
    p.lambda = cfg.lambda;
    p.epsilon = cfg.epsilon;
    const auto truth = lrmr::gen_low_rank(cfg.n1, cfg.n2, cfg.rank, lrmr::derive_seed(trial_seed, 1));
    double radius = cfg.clamp_noise_to_half_lambda ? std::min(cfg.epsilon, 0.5 * cfg.lambda) : cfg.epsilon;
    const auto noise = lrmr::gen_noise(p.ensemble.size(), radius, cfg.noise_kind, lrmr::derive_seed(trial_seed, 2));
    p.b = lrmr::apply_map(p.ensemble, truth) + noise;
    p.truth = truth;
    p.noise = noise;
    lrmr::write_json(lrmr::problem_to_json(p), a.problem_out);
    std::cout << "wrote trial " << i << " (seed " << trial_seed << ") to " << a.problem_out << "\n";
    return 0;
  }
  const auto res = lrmr::run_experiment(cfg, a.threads);
  if (!a.out.empty()) lrmr::write_text(lrmr::records_to_csv(res.records), a.out);
  if (!a.summary.empty()) lrmr::write_json(res.summary, a.summary);
  if (a.out.empty() && a.summary.empty()) {
    std::cout << res.summary.dump(2) << "\n";
    return 0;
  }
  const auto& s = res.summary;
  std::cout << "trials " << s["trials"] << ", converged " << s["converged"] << ", solver failures "
            << s["solver_failures"] << "\n"
            << "minimizer inequalities pass (converged): " << s["lemma3_pass_among_converged"] << "\n"
            << "gated " << s["gated"] << ", error bounds pass " << s["thm1_pass_among_gated"] << "\n";
  return 0;
}

int run_phase_cmd(const CampaignArgs& a) {
  const auto cfg = load_config(a);
  const lrmr::PhaseAxis x{a.x, parse_list(a.x_values)};
  const lrmr::PhaseAxis y{a.y, parse_list(a.y_values)};
  const auto cells = lrmr::phase_sweep(cfg, x, y, a.threshold, a.threads);
  const std::string csv = lrmr::phase_to_csv(x, y, cells);
  if (!a.summary.empty()) {
    json meta = lrmr::provenance("phase", lrmr::config_to_json(cfg));
    meta["x"] = {{"name", x.name}, {"values", x.values}};
    meta["y"] = {{"name", y.name}, {"values", y.values}};
    meta["threshold"] = a.threshold;
    lrmr::write_json(meta, a.summary);
  }
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    lrmr::write_text(csv, a.out);
    std::cout << "wrote " << cells.size() << " cells to " << a.out << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank matrix recovery by regularized nuclear norm minimization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LRMR_VERSION);

  SolveArgs solve;
  auto* c_solve = app.add_subcommand("solve", "Solve a recovery problem file");
  c_solve->add_option("--problem", solve.problem, "Problem JSON")->required()->check(CLI::ExistingFile);
  c_solve->add_option("--solver", solve.solver, "rnnm | nnm | bpdn")
      ->check(CLI::IsMember({"rnnm", "nnm", "bpdn"}));
  c_solve->add_option("--max-iters", solve.max_iters)->check(CLI::PositiveNumber);
  c_solve->add_option("--tol", solve.tol)->check(CLI::PositiveNumber);
  c_solve->add_option("--out", solve.out, "Result JSON");

  BoundsArgs bounds;
  auto* c_bounds = app.add_subcommand("bounds", "Evaluate the recovery constants");
  c_bounds->add_option("--t", bounds.t)->required();
  c_bounds->add_option("--k", bounds.k)->required();
  c_bounds->add_option("--delta", bounds.delta)->required();
  c_bounds->add_option("--lambda", bounds.lambda)->required();
  c_bounds->add_option("--eps", bounds.eps)->required();
  c_bounds->add_option("--out", bounds.out, "Bounds JSON");

  RicArgs ric;
  std::uint64_t ric_seed = 0;
  auto* c_ric = app.add_subcommand("ric", "Estimate a restricted isometry constant");
  c_ric->add_option("--mode", ric.mode)->required()->check(CLI::IsMember({"exact", "mc", "ascent"}));
  c_ric->add_option("--k", ric.k)->required()->check(CLI::PositiveNumber);
  c_ric->add_option("--ensemble", ric.ensemble, "Ensemble JSON")->required()->check(CLI::ExistingFile);
  c_ric->add_option("--samples", ric.samples)->check(CLI::PositiveNumber);
  auto* o_ric_seed = c_ric->add_option("--seed", ric_seed);
  c_ric->add_option("--steps", ric.steps)->check(CLI::PositiveNumber);
  c_ric->add_option("--out", ric.out, "Estimate JSON");

  VerifyArgs verify;
  double verify_delta = 0.0;
  std::uint64_t verify_seed = 0;
  auto* c_verify = app.add_subcommand("verify", "Check the minimizer inequalities and error bounds");
  c_verify->add_option("--problem", verify.problem)->required()->check(CLI::ExistingFile);
  c_verify->add_option("--solution", verify.solution, "Output of `solve`")->required()->check(CLI::ExistingFile);
  c_verify->add_option("--k", verify.k)->required()->check(CLI::PositiveNumber);
  c_verify->add_option("--t", verify.t);
  auto* o_verify_delta = c_verify->add_option("--delta", verify_delta, "RIC of order ceil(t k)");
  auto* o_verify_seed = c_verify->add_option("--seed", verify_seed, "Seed for the Monte-Carlo gate");
  c_verify->add_option("--samples", verify.samples)->check(CLI::PositiveNumber);
  c_verify->add_option("--margin", verify.margin);
  c_verify->add_option("--out", verify.out, "Report JSON");

  CampaignArgs exp;
  std::uint64_t exp_seed = 0;
  int emit_index = 0;
  auto* c_exp = app.add_subcommand("experiment", "Run a seeded verification campaign");
  c_exp->add_option("--config", exp.config)->check(CLI::ExistingFile);
  c_exp->add_option("--seed", exp_seed)->required();
  c_exp->add_option("--out", exp.out, "Trial CSV");
  c_exp->add_option("--summary", exp.summary, "Summary JSON");
  c_exp->add_option("--threads", exp.threads)->check(CLI::PositiveNumber);
  auto* o_emit = c_exp->add_option("--emit-problem", emit_index, "Write trial INDEX as a problem file");
  c_exp->add_option("--problem-out", exp.problem_out);

  CampaignArgs phase;
  std::uint64_t phase_seed = 0;
  auto* c_phase = app.add_subcommand("phase", "Success-rate sweep over a 2-D grid");
  c_phase->add_option("--config", phase.config)->check(CLI::ExistingFile);
  c_phase->add_option("--seed", phase_seed)->required();
  c_phase->add_option("--x", phase.x)->required()->check(CLI::IsMember({"m", "rank", "lambda", "epsilon"}));
  c_phase->add_option("--x-values", phase.x_values)->required();
  c_phase->add_option("--y", phase.y)->required()->check(CLI::IsMember({"m", "rank", "lambda", "epsilon"}));
  c_phase->add_option("--y-values", phase.y_values)->required();
  c_phase->add_option("--threshold", phase.threshold)->check(CLI::PositiveNumber);
  c_phase->add_option("--out", phase.out, "Cell CSV");
  c_phase->add_option("--summary", phase.summary, "Metadata JSON");
  c_phase->add_option("--threads", phase.threads)->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << "\n" << app.help();
    return 2;
  }

  try {
    if (*c_solve) return run_solve(solve);
    if (*c_bounds) return run_bounds(bounds);
    if (*c_ric) {
      if (*o_ric_seed) ric.seed = ric_seed;
      return run_ric(ric);
    }
    if (*c_verify) {
      if (*o_verify_delta) verify.delta = verify_delta;
      if (*o_verify_seed) verify.seed = verify_seed;
      return run_verify(verify);
    }
    if (*c_exp) {
      exp.seed = exp_seed;
      if (*o_emit) exp.emit_problem = emit_index;
      return run_experiment_cmd(exp);
    }
    if (*c_phase) {
      phase.seed = phase_seed;
      return run_phase_cmd(phase);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
