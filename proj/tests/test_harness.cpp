#include <doctest.h>

#include "lrmr/harness.hpp"
#include "lrmr/seed.hpp"
#include "support.hpp"

using namespace lrmr;

TEST_CASE("seed derivation is a pure function") {
  static_assert(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(1, 3));
  CHECK(derive_seed(1, 2) != derive_seed(2, 2));
}

TEST_CASE("gaussian ensemble entries have variance 1/m") {
  const auto ens = gen_gaussian_ensemble(400, 5, 5, 1);
  const double var = ens.design().squaredNorm() / static_cast<double>(ens.design().size());
  CHECK(var == doctest::Approx(1.0 / 400).epsilon(0.05));
  CHECK(gen_gaussian_ensemble(20, 5, 5, 9).design() == gen_gaussian_ensemble(20, 5, 5, 9).design());
}

TEST_CASE("low rank generator") {
  for (int r = 1; r <= 3; ++r) {
    const MatrixXd x = gen_low_rank(5, 6, r, 100 + r);
    CHECK(x.norm() == doctest::Approx(1.0).epsilon(1e-12));
    const VectorXd s = singular_values(x);
    CHECK(s(r - 1) > 1e-6);
    if (r < 5) CHECK(s(r) <= 1e-10);
    CHECK(gen_low_rank(5, 6, r, 100 + r) == x);
  }
  CHECK_THROWS_AS(gen_low_rank(3, 3, 4, 1), DomainError);
}

TEST_CASE("noise generator") {
  CHECK(gen_noise(10, 0.5, NoiseKind::none, 1).isZero());
  for (std::uint64_t s = 0; s < 1000; ++s) {
    CHECK(std::abs(gen_noise(10, 0.05, NoiseKind::sphere_uniform_at_eps, s).norm() - 0.05) <= 1e-12);
    CHECK(gen_noise(10, 0.05, NoiseKind::sphere_uniform_scaled, s).norm() <= 0.05);
  }
  CHECK_THROWS_AS(gen_noise(10, -1.0, NoiseKind::none, 1), DomainError);
}

TEST_CASE("config json round trip and validation") {
  ExperimentConfig c;
  c.m = 17;
  c.rank = 2;
  c.k = 2;
  c.seed = 123456789012345ULL;
  c.noise_kind = NoiseKind::sphere_uniform_scaled;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK_THROWS(config_from_json(nlohmann::json{{"bogus", 1}}));
  CHECK_THROWS(config_from_json(nlohmann::json{{"rank", 9}}));
  CHECK_THROWS(config_from_json(nlohmann::json{{"lambda", -1.0}}));
}

TEST_CASE("trial determinism and reduction") {
  ExperimentConfig c;
  c.seed = 5;
  c.trials = 3;
  const auto a = run_experiment(c);
  const auto b = run_experiment(c, 3);
  CHECK(records_to_csv(a.records) == records_to_csv(b.records));
  CHECK(a.summary.dump() == b.summary.dump());

  ExperimentConfig one = c;
  one.trials = 1;
  const auto single = run_experiment(one);
  const auto direct = run_trial(one, 0);
  CHECK(records_to_csv(single.records) == records_to_csv({direct}));
  CHECK(a.records[0].trial_seed == derive_seed(5, 0));
}

TEST_CASE("csv layout") {
  ExperimentConfig c;
  c.seed = 1;
  const auto csv = records_to_csv(run_experiment(c).records);
  const auto header = csv.substr(0, csv.find('\n'));
  CHECK(header ==
        "trial_seed,frob_error,map_error,tail_norm,lemma3_pass,thm1_8_lhs,thm1_8_rhs,thm1_9_lhs,"
        "thm1_9_rhs,gate_status,iterations");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("gate behaviour in trials") {
  SUBCASE("underdetermined gaussian fails the gate") {
    ExperimentConfig c;
    c.seed = 3;
    const auto r = run_trial(c, 0);
    CHECK(r.gate_status == GateStatus::precondition_unmet);
    CHECK(!r.thm1_pass);
    CHECK(r.converged);
    CHECK(r.lemma3_pass);
  }
  SUBCASE("coordinate ensemble passes the gate and the bounds") {
    ExperimentConfig c;
    c.ensemble_kind = EnsembleKind::coordinate;
    c.seed = 3;
    const auto r = run_trial(c, 0);
    CHECK(r.gate_status == GateStatus::verified);
    CHECK(r.thm1_pass);
  }
  SUBCASE("coordinate, noiseless, small lambda: error vanishes") {
    ExperimentConfig c;
    c.ensemble_kind = EnsembleKind::coordinate;
    c.noise_kind = NoiseKind::none;
    c.lambda = 1e-4;
    c.epsilon = 0.0;
    c.rank = c.k = 2;
    c.seed = 4;
    const auto r = run_trial(c, 0);
    CHECK(r.frob_error <= 2 * c.lambda * std::sqrt(2.0));
  }
}

TEST_CASE("noise is clamped to half lambda on request") {
  ExperimentConfig c;
  c.ensemble_kind = EnsembleKind::coordinate;
  c.lambda = 0.05;
  c.epsilon = 0.1;
  c.seed = 8;
  // Noise on the 0.1-sphere exceeds lambda / 2, so the bounds are not claimed.
  CHECK(run_trial(c, 0).gate_status == GateStatus::precondition_unmet);
  c.clamp_noise_to_half_lambda = true;
  const auto r = run_trial(c, 0);
  CHECK(r.gate_status == GateStatus::verified);
  CHECK(r.thm1_pass);
}

TEST_CASE("phase sweep") {
  ExperimentConfig c;
  c.ensemble_kind = EnsembleKind::coordinate;
  c.noise_kind = NoiseKind::none;
  c.epsilon = 0.0;
  c.lambda = 1e-4;
  c.trials = 2;
  c.seed = 1;
  const PhaseAxis x{"rank", {1, 2}}, y{"lambda", {1e-4}};
  const auto cells = phase_sweep(c, x, y, 1e-3);
  REQUIRE(cells.size() == 2);
  for (const auto& cell : cells) CHECK(cell.success_fraction == 1.0);
  CHECK(phase_to_csv(x, y, cells) == phase_to_csv(x, y, phase_sweep(c, x, y, 1e-3)));
  CHECK_THROWS(apply_axis(c, "bogus", 1.0));
}
