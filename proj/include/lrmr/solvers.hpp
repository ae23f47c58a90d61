#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "lrmr/ensemble.hpp"
#include "lrmr/linalg.hpp"

namespace lrmr {

/// Observations b = A(truth) + noise together with the regularization weight
/// lambda and the declared noise budget epsilon.
struct RecoveryProblem {
  MeasurementEnsemble ensemble;
  VectorXd b;
  double lambda = 1.0;
  double epsilon = 0.0;
  std::optional<MatrixXd> truth;
  std::optional<VectorXd> noise;

  /// Throws on violated invariants (shapes, lambda <= 0, noise over budget,
  /// b inconsistent with truth + noise).
  void validate() const;
};

struct SolverOptions {
  int max_iters = 20000;
  // Certificate tolerance; also the convergence target.
  double tol = 1e-6;
  // Stall stop: relative objective change below stall_rtol for
  // stall_window consecutive iterations.
  double stall_rtol = 1e-15;
  int stall_window = 5;
  int power_iters = 500;
  double lipschitz_safety = 1.01;
  std::uint64_t power_seed = 0x5eed;
};

/// First-order optimality witness. For the regularized programs the dual
/// object is G = A*(b - A(X))/lambda; optimality means G lies in the
/// subdifferential of the norm at X, i.e. dual norm <= 1 and <G, X> = ||X||.
struct OptimalityCertificate {
  double dual_norm = 0.0;       // spectral norm (matrix) or sup norm (vector)
  double alignment_gap = 0.0;   // ||X|| - <G, X>
  double solution_norm = 0.0;   // ||X||_* or ||x||_1
  double tolerance = 1e-6;

  bool passes() const {
    return dual_norm <= 1.0 + tolerance &&
           alignment_gap <= tolerance * std::max(1.0, solution_norm);
  }
};

template <typename Solution>
struct BasicSolverResult {
  Solution solution;
  int iterations = 0;
  double final_objective = 0.0;
  std::vector<double> objective_trace;
  bool converged = false;
  OptimalityCertificate certificate;
  // Constrained program only: ||b - A(X)||_2.
  double residual_norm = 0.0;
};

using SolverResult = BasicSolverResult<MatrixXd>;
using VectorSolverResult = BasicSolverResult<VectorXd>;

/// ||X||_* + ||b - A(X)||^2 / (2 lambda).
double rnnm_objective(const RecoveryProblem& p, const MatrixXd& x);

/// Accelerated proximal gradient with function-value restart on the
/// regularized program. Starts from X = 0; the recorded objective sequence
/// is nonincreasing. Non-convergence is reported through `converged`.
SolverResult solve_rnnm(const RecoveryProblem& p, const SolverOptions& opts = {});

/// min ||X||_* s.t. ||b - A(X)||_2 <= epsilon by linearized ADMM on the
/// splitting A(X) + r = b, ||r|| <= epsilon, followed by a minimum-norm
/// feasibility correction. The certificate uses G = -A*(y) for the ADMM
/// multiplier y.
SolverResult solve_nnm_constrained(const RecoveryProblem& p, const SolverOptions& opts = {});

/// ||x||_1 + ||b - A x||^2 / (2 lambda) by the same accelerated scheme with
/// componentwise soft thresholding.
VectorSolverResult solve_bpdn(const MatrixXd& a, const VectorXd& b, double lambda,
                              const SolverOptions& opts = {});

OptimalityCertificate check_optimality(const RecoveryProblem& p, const MatrixXd& x, double tol);

OptimalityCertificate check_bpdn_optimality(const MatrixXd& a, const VectorXd& b, double lambda,
                                            const VectorXd& x, double tol);

}  // namespace lrmr
