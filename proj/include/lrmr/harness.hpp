#pragma once

// Seeded instance generation and verification campaigns.
//
// Seeds: trial i of a campaign with seed s uses trial_seed = hash64(s, i)
// (see derive_seed). From the trial seed, truth uses hash64(trial_seed, 1),
// noise hash64(trial_seed, 2) and a per-trial ensemble hash64(trial_seed, 3).
// A shared campaign ensemble uses hash64(s, 2^64 - 1); the RIC gate of an
// ensemble with seed e samples with hash64(e, 4).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrmr/ensemble.hpp"
#include "lrmr/ric.hpp"
#include "lrmr/solvers.hpp"
#include "lrmr/theory.hpp"

namespace lrmr {

enum class EnsembleKind { gaussian, coordinate, custom_path };
enum class NoiseKind { none, sphere_uniform_at_eps, sphere_uniform_scaled };

const char* to_string(EnsembleKind k);
const char* to_string(NoiseKind k);
EnsembleKind ensemble_kind_from_string(const std::string& s);
NoiseKind noise_kind_from_string(const std::string& s);

struct ExperimentConfig {
  Index n1 = 5;
  Index n2 = 5;
  Index m = 20;  // overridden by the ensemble for coordinate / custom-path
  int rank = 1;
  int k = 1;
  double t = 2.0;
  double lambda = 0.1;
  double epsilon = 0.05;
  EnsembleKind ensemble_kind = EnsembleKind::gaussian;
  std::string ensemble_path;
  NoiseKind noise_kind = NoiseKind::sphere_uniform_at_eps;
  int trials = 1;
  std::uint64_t seed = 0;

  // Fresh ensemble (and RIC gate) per trial instead of one per campaign.
  bool per_trial_ensemble = false;
  // Cap the noise radius at min(epsilon, lambda / 2).
  bool clamp_noise_to_half_lambda = false;
  long long ric_samples = 10000;
  double ric_margin = 0.05;
  SolverOptions solver;

  void validate() const;
};

nlohmann::json config_to_json(const ExperimentConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);

struct TrialRecord {
  std::uint64_t trial_seed = 0;
  double frob_error = 0.0;  // ||Xsharp - X||_F
  double map_error = 0.0;   // ||A(Xsharp - X)||_2
  double tail_norm = 0.0;   // ||X - X_[k]||_*
  bool lemma3_pass = false;
  double thm1_8_lhs = 0.0;
  double thm1_8_rhs = 0.0;
  double thm1_9_lhs = 0.0;
  double thm1_9_rhs = 0.0;
  GateStatus gate_status = GateStatus::precondition_unmet;
  int iterations = 0;

  // In-memory diagnostics, not part of the CSV.
  bool converged = false;
  bool certificate_pass = false;
  bool thm1_pass = false;
  bool solver_failed = false;
  double gate_delta = 0.0;
  Lemma3Report lemma3;
  std::string error;
};

/// Column names of the trial CSV, in order.
const std::vector<std::string>& trial_csv_columns();
std::string records_to_csv(const std::vector<TrialRecord>& records);

MeasurementEnsemble gen_gaussian_ensemble(Index m, Index n1, Index n2, std::uint64_t seed);
/// Product of Gaussian factors, rank r almost surely, unit Frobenius norm.
MatrixXd gen_low_rank(Index n1, Index n2, int r, std::uint64_t seed);
VectorXd gen_noise(Index m, double epsilon, NoiseKind kind, std::uint64_t seed);

/// Ensemble plus its RIC gate decision: gate_delta = MC estimate of
/// delta_{ceil(t k)} + margin, gate_ok when gate_delta < sqrt((t-1)/t).
struct CampaignContext {
  MeasurementEnsemble ensemble;
  std::optional<RicEstimate> gate_estimate;
  double gate_delta = 1.0;
  bool gate_ok = false;
  std::string gate_reason;
};

CampaignContext prepare_campaign(const ExperimentConfig& cfg, std::uint64_t ensemble_seed);

TrialRecord run_trial(const ExperimentConfig& cfg, int trial_index);
TrialRecord run_trial(const ExperimentConfig& cfg, const CampaignContext& ctx, int trial_index);

struct ExperimentResult {
  std::vector<TrialRecord> records;
  nlohmann::json summary;
};

/// Trials run on up to `threads` workers; records are ordered by index.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int threads = 1);

struct PhaseAxis {
  std::string name;  // m | rank | lambda | epsilon
  std::vector<double> values;
};

struct PhaseCell {
  double x = 0.0;
  double y = 0.0;
  int trials = 0;
  int successes = 0;
  double success_fraction = 0.0;
  double median_frob_error = 0.0;
};

/// Sweeping `rank` also sets k = rank.
ExperimentConfig apply_axis(ExperimentConfig cfg, const std::string& name, double value);

/// Success means frob_error <= threshold. Each cell is a full campaign with
/// the cell's config and the base seed.
std::vector<PhaseCell> phase_sweep(const ExperimentConfig& base, const PhaseAxis& x,
                                   const PhaseAxis& y, double threshold, int threads = 1);
std::string phase_to_csv(const PhaseAxis& x, const PhaseAxis& y, const std::vector<PhaseCell>& cells);

}  // namespace lrmr
