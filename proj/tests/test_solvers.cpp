#include <doctest.h>

#include <numeric>

#include "lrmr/solvers.hpp"
#include "support.hpp"

using namespace lrmr;
using lrmr::testing::Gen;

namespace {

RecoveryProblem gaussian_problem(std::uint64_t seed, Index m, Index n, Index rank, double lambda,
                                 double epsilon = 0.0) {
  Gen g(seed);
  RecoveryProblem p;
  p.ensemble = MeasurementEnsemble(n, n, g.gaussian(m, n * n) / std::sqrt(double(m)));
  const MatrixXd x = g.low_rank(n, n, rank);
  p.truth = x / x.norm();
  p.b = apply_map(p.ensemble, *p.truth);
  p.lambda = lambda;
  p.epsilon = epsilon;
  return p;
}

}  // namespace

TEST_CASE("rnnm: zero observations give zero") {
  RecoveryProblem p = gaussian_problem(1, 15, 4, 1, 0.1);
  p.truth.reset();
  p.b.setZero();
  const auto r = solve_rnnm(p);
  CHECK(r.solution.isZero());
  CHECK(r.converged);
}

TEST_CASE("rnnm: large lambda gives zero") {
  RecoveryProblem p = gaussian_problem(2, 15, 4, 1, 0.1);
  p.lambda = 1.01 * spectral_norm(adjoint_map(p.ensemble, p.b));
  const auto r = solve_rnnm(p);
  CHECK(r.solution.norm() <= 1e-12);
  CHECK(r.converged);
}

TEST_CASE("rnnm on the coordinate ensemble is svt") {
  Gen g(3);
  RecoveryProblem p;
  p.ensemble = MeasurementEnsemble::coordinate(5, 5);
  p.b = g.gaussian(25);
  p.lambda = 0.3;
  const auto r = solve_rnnm(p);
  const MatrixXd expect = svt(unflatten(p.b, 5, 5), 0.3);
  CHECK((r.solution - expect).norm() <= 1e-6 * expect.norm());
}

TEST_CASE("rnnm trace is nonincreasing and certificate passes") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const RecoveryProblem p = gaussian_problem(seed, 18, 5, 2, 0.05);
    const auto r = solve_rnnm(p);
    REQUIRE(!r.objective_trace.empty());
    for (std::size_t i = 1; i < r.objective_trace.size(); ++i)
      CHECK(r.objective_trace[i] <= r.objective_trace[i - 1]);
    CHECK(r.converged);
    CHECK(r.certificate.passes());
    CHECK(r.final_objective == doctest::Approx(rnnm_objective(p, r.solution)).epsilon(1e-12));
  }
}

TEST_CASE("rnnm certificate is sound") {
  Gen g(77);
  const RecoveryProblem p = gaussian_problem(5, 20, 5, 1, 0.1);
  const auto r = solve_rnnm(p);
  REQUIRE(r.certificate.passes());
  const double best = rnnm_objective(p, r.solution);
  for (int trial = 0; trial < 100; ++trial) {
    const MatrixXd z = r.solution + g.uniform(1e-3, 1.0) * g.gaussian(5, 5);
    CHECK(rnnm_objective(p, z) >= best - 1e-6);
  }
  // The zero matrix is not optimal here, and the certificate says so.
  CHECK(!check_optimality(p, MatrixXd::Zero(5, 5), 1e-6).passes());
}

TEST_CASE("rnnm is invariant under measurement permutation") {
  RecoveryProblem p = gaussian_problem(6, 20, 5, 2, 0.05);
  std::vector<Index> perm(20);
  std::iota(perm.begin(), perm.end(), Index(0));
  std::reverse(perm.begin(), perm.end());
  RecoveryProblem q = p;
  q.ensemble = p.ensemble.permuted(perm);
  for (Index i = 0; i < 20; ++i) q.b(i) = p.b(perm[i]);
  const auto a = solve_rnnm(p), b = solve_rnnm(q);
  CHECK((a.solution - b.solution).norm() <= 1e-5);
}

TEST_CASE("rnnm rejects invalid problems") {
  RecoveryProblem p = gaussian_problem(7, 10, 3, 1, 0.1);
  p.lambda = 0.0;
  CHECK_THROWS_AS(solve_rnnm(p), DomainError);
  p.lambda = 0.1;
  p.b = VectorXd::Zero(3);
  CHECK_THROWS_AS(solve_rnnm(p), DimensionError);
}

TEST_CASE("constrained nnm: loose budget gives zero") {
  RecoveryProblem p = gaussian_problem(8, 20, 5, 1, 0.1);
  p.epsilon = 1.0001 * p.b.norm();
  const auto r = solve_nnm_constrained(p);
  CHECK(r.solution.norm() <= 1e-12);
  CHECK(r.residual_norm <= p.epsilon);
}

TEST_CASE("constrained nnm: coordinate ensemble with no slack reproduces b") {
  Gen g(9);
  RecoveryProblem p;
  p.ensemble = MeasurementEnsemble::coordinate(4, 4);
  p.b = g.gaussian(16);
  p.lambda = 1.0;
  p.epsilon = 0.0;
  const auto r = solve_nnm_constrained(p);
  CHECK((r.solution - unflatten(p.b, 4, 4)).norm() <= 1e-6);
}

TEST_CASE("constrained nnm recovers a rank-1 matrix and agrees with rnnm at small lambda") {
  const RecoveryProblem p = gaussian_problem(12, 40, 8, 1, 1e-4, 0.0);
  const auto r = solve_nnm_constrained(p);
  CHECK(r.residual_norm <= 1e-8);
  CHECK((r.solution - *p.truth).norm() <= 1e-3);
  const auto s = solve_rnnm(p);
  CHECK((s.solution - r.solution).norm() <= 1e-3);
}

TEST_CASE("bpdn") {
  Gen g(13);
  const VectorXd b = g.gaussian(8);
  SUBCASE("identity design is soft thresholding") {
    const auto r = solve_bpdn(MatrixXd::Identity(8, 8), b, 0.4);
    CHECK((r.solution - soft_threshold(b, 0.4)).norm() <= 1e-6 * soft_threshold(b, 0.4).norm());
  }
  SUBCASE("large lambda gives zero") {
    const MatrixXd a = g.gaussian(6, 8);
    const double lam = 1.01 * (a.transpose() * b.head(6)).cwiseAbs().maxCoeff();
    CHECK(solve_bpdn(a, b.head(6), lam).solution.isZero());
  }
  SUBCASE("certificate on a generic design") {
    const MatrixXd a = g.gaussian(6, 10);
    const auto r = solve_bpdn(a, b.head(6), 0.05);
    CHECK(r.converged);
    CHECK(check_bpdn_optimality(a, b.head(6), 0.05, r.solution, 1e-6).passes());
  }
  SUBCASE("shape errors") {
    CHECK_THROWS_AS(solve_bpdn(g.gaussian(5, 3), b, 0.1), DimensionError);
  }
}
