#include <doctest.h>

#include "checks.hpp"
#include "lrmr/theory.hpp"
#include "oracle.hpp"

using namespace lrmr;
using lrmr::testing::Gen;
using lrmr::testing::rel_diff;

TEST_CASE("constants at a reference point") {
  const TheoryParams p{2.0, 4, 0.5, 0.1, 0.05};
  const auto b = theorem1_constants(p);
  CHECK(b.beta1 == doctest::Approx(3.2659863237109046).epsilon(1e-15));
  CHECK(b.beta2 == doctest::Approx(0.5773502691896258).epsilon(1e-15));
  CHECK(b.c1 == doctest::Approx(0.28441521323796345).epsilon(1e-14));
  CHECK(b.c2 == doctest::Approx(1.4063945294843617).epsilon(1e-14));
  CHECK(b.condition_ok);
  CHECK(b.beta2_lt_one);
  REQUIRE(b.c3);
  REQUIRE(b.c4);
  CHECK(rip_threshold(2.0) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(rip_threshold_small_t(1.2) == doctest::Approx(1.2 / 2.8).epsilon(1e-15));
}

TEST_CASE("condition failure leaves c3 and c4 undefined") {
  const auto b = theorem1_constants({2.0, 4, 0.8, 0.1, 0.05});
  CHECK(!b.condition_ok);
  CHECK(!b.beta2_lt_one);
  CHECK(!b.c3);
  CHECK(!b.c4);
}

TEST_CASE("constants match the multiprecision oracle") {
  Gen g(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const double t = g.uniform(1.01, 5.0), delta = g.uniform(0.01, 0.99);
    const int k = g.integer(1, 10);
    const double lambda = g.uniform(1e-3, 1.0), eps = g.uniform(1e-3, 1.0);
    const auto o = oracle::evaluate(t, k, delta, lambda, eps);
    const auto b = theorem1_constants({t, k, delta, lambda, eps});
    CHECK(rel_diff(rip_threshold(t), o.threshold.convert_to<double>()) <= 1e-12);
    CHECK(rel_diff(b.beta1, o.beta1.convert_to<double>()) <= 1e-12);
    CHECK(rel_diff(b.beta2, o.beta2.convert_to<double>()) <= 1e-12);
    CHECK(rel_diff(b.c1, o.c1.convert_to<double>()) <= 1e-12);
    CHECK(rel_diff(b.c2, o.c2.convert_to<double>()) <= 1e-12);
    CHECK(b.c3.has_value() == (o.beta2 < 1));
    if (b.c3) {
      CHECK(rel_diff(*b.c3, o.c3.convert_to<double>()) <= 1e-12);
      CHECK(rel_diff(*b.c4, o.c4.convert_to<double>()) <= 1e-12);
    }
  }
}

TEST_CASE("beta2 < 1 exactly when delta is below the threshold") {
  for (int i = 0; i < 60; ++i)
    for (int j = 0; j < 60; ++j) {
      const double delta = 0.005 + 0.99 * i / 59.0, t = 1.01 + 3.99 * j / 59.0;
      CHECK((betas(delta, t).beta2 < 1.0) == (delta < rip_threshold(t)));
    }
}

TEST_CASE("constants are monotone in delta and the threshold in t") {
  double prev1 = 0.0, prev2 = 0.0;
  for (double d = 0.05; d < 0.95; d += 0.05) {
    const auto b = betas(d, 2.0);
    CHECK(b.beta1 > prev1);
    CHECK(b.beta2 > prev2);
    prev1 = b.beta1;
    prev2 = b.beta2;
  }
  double prev = 0.0;
  for (double t = 1.05; t < 6.0; t += 0.25) {
    CHECK(rip_threshold(t) > prev);
    prev = rip_threshold(t);
  }
}

TEST_CASE("theory domain errors") {
  CHECK_THROWS_AS(rip_threshold(1.0), DomainError);
  CHECK_THROWS_AS(betas(0.0, 2.0), DomainError);
  CHECK_THROWS_AS(betas(0.5, 0.9), DomainError);
  CHECK_THROWS_AS(theorem1_constants({2.0, 0, 0.5, 0.1, 0.0}), DomainError);
  CHECK_THROWS_AS(theorem1_constants({2.0, 1, 0.5, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(theorem1_constants({2.0, 1, 0.5, 0.1, -1.0}), DomainError);
}

TEST_CASE("tolerance comparison") {
  CHECK(holds_within_tolerance(1.0, 1.0));
  CHECK(holds_within_tolerance(1.0 + 5e-9, 1.0));
  CHECK(!holds_within_tolerance(1.0 + 1e-7, 1.0));
  CHECK(holds_within_tolerance(-3.0, -3.0));
}

namespace {

RecoveryProblem planted(std::uint64_t seed, double lambda, double eps) {
  Gen g(seed);
  RecoveryProblem p;
  p.ensemble = MeasurementEnsemble(5, 5, g.gaussian(20, 25) / std::sqrt(20.0));
  const MatrixXd x = g.low_rank(5, 5, 1);
  p.truth = x / x.norm();
  p.noise = VectorXd::Zero(20);
  p.b = apply_map(p.ensemble, *p.truth);
  p.lambda = lambda;
  p.epsilon = eps;
  return p;
}

}  // namespace

TEST_CASE("minimizer inequalities hold at exact recovery and at the minimizer") {
  const RecoveryProblem p = planted(4, 0.1, 0.05);
  const auto exact = check_lemma3(p, *p.truth, 1);
  CHECK(exact.passes());
  CHECK(exact.map_error == doctest::Approx(0.0));
  const auto r = solve_rnnm(p);
  REQUIRE(r.converged);
  CHECK(check_lemma3(p, r.solution, 1).passes());
}

TEST_CASE("minimizer inequalities reject a spread-out error") {
  RecoveryProblem p = planted(5, 0.1, 0.0);
  // H = I has head 1 and tail 4 while the truth tail is zero.
  const auto rep = check_lemma3(p, *p.truth + MatrixXd::Identity(5, 5), 1);
  CHECK(!rep.ineq6_pass);
  CHECK(rep.head_nuclear == doctest::Approx(1.0));
  CHECK(rep.tail_nuclear == doctest::Approx(4.0));
}

TEST_CASE("minimizer inequalities need a ground truth") {
  RecoveryProblem p = planted(6, 0.1, 0.0);
  p.truth.reset();
  p.noise.reset();
  CHECK_THROWS_AS(check_lemma3(p, MatrixXd::Zero(5, 5), 1), DomainError);
}

TEST_CASE("error bound gate") {
  RecoveryProblem p = planted(7, 0.1, 0.05);
  const auto r = solve_rnnm(p);
  SUBCASE("verified under a small delta") {
    const auto rep = verify_theorem1(p, r.solution, {2.0, 1, 0.3, 0.1, 0.05});
    CHECK(rep.status == GateStatus::verified);
    CHECK(rep.passes());
    CHECK(rep.bound8_rhs > 0.0);
  }
  SUBCASE("refused above the threshold") {
    const auto rep = verify_theorem1(p, r.solution, {2.0, 1, 0.8, 0.1, 0.05});
    CHECK(rep.status == GateStatus::precondition_unmet);
    CHECK(!rep.reason.empty());
    CHECK(!rep.passes());
  }
  SUBCASE("refused when noise exceeds half of lambda") {
    Gen g(1);
    VectorXd n = g.gaussian(20);
    n *= 0.09 / n.norm();
    p.noise = n;
    p.epsilon = 0.1;
    p.b = apply_map(p.ensemble, *p.truth) + n;
    const auto rep = verify_theorem1(p, solve_rnnm(p).solution, {2.0, 1, 0.3, 0.1, 0.1});
    CHECK(rep.status == GateStatus::precondition_unmet);
  }
  CHECK(std::string(to_string(GateStatus::precondition_unmet)) == "precondition-unmet");
}

TEST_CASE("polytope decomposition examples") {
  VectorXd v(2);
  v << 0.5, 0.5;
  const auto d = lemma1_decompose(v, 1.0, 1);
  CHECK(testing::decomposition_violation(d, v, 1.0, 1).empty());
  REQUIRE(d.atoms.size() == 2);
  CHECK(d.weights[0] == doctest::Approx(0.5));
  CHECK(d.weights[1] == doctest::Approx(0.5));

  VectorXd w(2);
  w << 1.0, 1.0;
  CHECK(!in_polytope(w, 1.0, 1));
  CHECK_THROWS_AS(lemma1_decompose(w, 1.0, 1), DomainError);

  VectorXd sparse(4);
  sparse << 0.0, 0.3, 0.0, 0.0;
  const auto single = lemma1_decompose(sparse, 1.0, 2);
  CHECK(single.atoms.size() == 1);
  CHECK(single.weights[0] == 1.0);
}

TEST_CASE("polytope decomposition invariants on random members") {
  Gen g(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = g.integer(1, 8);
    const int k = g.integer(1, 3);
    const double alpha = g.uniform(0.1, 2.0);
    const VectorXd v = testing::random_polytope_member(g, n, alpha, k);
    REQUIRE(in_polytope(v, alpha, k));
    const auto d = lemma1_decompose(v, alpha, k);
    CHECK_MESSAGE(testing::decomposition_violation(d, v, alpha, k).empty(), "trial ", trial);
  }
}

TEST_CASE("polytope decomposition input errors") {
  VectorXd v(3);
  v << 0.2, -0.1, 0.0;
  CHECK_THROWS_AS(lemma1_decompose(v, 1.0, 1), DomainError);
  CHECK_THROWS_AS(lemma1_decompose(VectorXd::Zero(3), 0.0, 1), DomainError);
  CHECK_THROWS_AS(lemma1_decompose(VectorXd::Zero(11), 1.0, 1), DimensionError);
}
