#pragma once

// Closed-form recovery constants for the regularized program and post-hoc
// checks of the inequalities they certify.

#include <optional>
#include <string>
#include <vector>

#include "lrmr/linalg.hpp"
#include "lrmr/solvers.hpp"

namespace lrmr {

struct TheoryParams {
  double t = 2.0;       // order multiplier, > 1
  int k = 1;            // target rank
  double delta = 0.0;   // RIC of order ceil(t*k), in (0, 1)
  double lambda = 1.0;  // > 0
  double epsilon = 0.0; // >= 0

  void validate() const;
};

struct Betas {
  double beta1 = 0.0;
  double beta2 = 0.0;
};

struct TheoryBounds {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  // Undefined unless beta2 < 1.
  std::optional<double> c3;
  std::optional<double> c4;
  bool condition_ok = false;  // delta < sqrt((t - 1) / t)
  bool beta2_lt_one = false;
};

/// sqrt((t - 1) / t): the largest delta_{tk} under which the bounds hold.
double rip_threshold(double t);

/// Prior sharp threshold for t < 4/3 on the constrained program, t / (4 - t).
/// Reported for comparison only; no bound here depends on it.
double rip_threshold_small_t(double t);

/// beta1 = 2 / ((1 - delta) sqrt(1 + delta)),
/// beta2 = delta / sqrt((1 - delta^2)(t - 1)).
Betas betas(double delta, double t);

/// C1..C4 evaluated exactly as printed in the source theorem.
TheoryBounds theorem1_constants(const TheoryParams& p);

/// Two-sided comparison used by every inequality check:
/// lhs <= rhs + 1e-8 + 1e-8 * max(|lhs|, |rhs|).
bool holds_within_tolerance(double lhs, double rhs);

struct Lemma3Report {
  // Building blocks, E = the top-k singular indices of each matrix.
  double map_error = 0.0;     // ||A(H)||_2, H = Xsharp - X
  double head_nuclear = 0.0;  // ||H_E||_*
  double tail_nuclear = 0.0;  // ||H_{E^c}||_*
  double truth_tail = 0.0;    // ||X_{E^c}||_*
  // ||A(H)||^2 - 2 eps ||A(H)|| <= 2 lambda (||H_E||_* - ||H_Ec||_* + 2 ||X_Ec||_*)
  double ineq5_lhs = 0.0;
  double ineq5_rhs = 0.0;
  // ||H_Ec||_* <= ||H_E||_* + 2 ||X_Ec||_* + (eps / lambda) ||A(H)||
  double ineq6_lhs = 0.0;
  double ineq6_rhs = 0.0;
  bool ineq5_pass = false;
  bool ineq6_pass = false;

  bool passes() const { return ineq5_pass && ineq6_pass; }
};

Lemma3Report check_lemma3(const RecoveryProblem& p, const MatrixXd& xsharp, int k);

enum class GateStatus { verified, precondition_unmet };

const char* to_string(GateStatus s);

struct Theorem1Report {
  GateStatus status = GateStatus::precondition_unmet;
  std::string reason;  // why the gate refused, empty when verified
  TheoryBounds bounds;
  double noise_norm = 0.0;   // ||b - A(truth)||_2
  double tail_norm = 0.0;    // ||X - X_[k]||_*
  double map_error = 0.0;    // ||A(Xsharp - X)||_2
  double frob_error = 0.0;   // ||Xsharp - X||_F
  double bound8_rhs = 0.0;   // C1 * tail + C2
  double bound9_rhs = 0.0;   // C3 * tail + C4
  bool bound8_pass = false;
  bool bound9_pass = false;

  bool passes() const { return status == GateStatus::verified && bound8_pass && bound9_pass; }
};

/// Checks the map-error and Frobenius-error bounds. Refuses (status
/// precondition_unmet) unless delta < threshold(t) and the realized noise
/// satisfies ||b - A(X)||_2 <= min(epsilon, lambda / 2). The lambda and
/// epsilon in `params` are taken from the problem.
Theorem1Report verify_theorem1(const RecoveryProblem& p, const MatrixXd& xsharp,
                               const TheoryParams& params);

/// Convex decomposition of v in T(alpha, k) = {||v||_inf <= alpha,
/// ||v||_1 <= k alpha} into atoms supported on supp(v) with at most k
/// nonzeros, l1 norm ||v||_1 and sup norm <= alpha.
struct PolytopeDecomposition {
  double alpha = 0.0;
  int k = 0;
  std::vector<double> weights;
  std::vector<VectorXd> atoms;

  VectorXd recombine() const;
};

/// Largest input accepted by lemma1_decompose.
inline constexpr Index kMaxDecomposeLength = 10;
inline constexpr int kMaxDecomposeSparsity = 4;

PolytopeDecomposition lemma1_decompose(const VectorXd& v, double alpha, int k);

/// True when v (nonnegative) lies in T(alpha, k), up to 1e-12 relative slack.
bool in_polytope(const VectorXd& v, double alpha, int k);

}  // namespace lrmr
