#pragma once

// Restricted isometry constants: exact values for sparse vectors by support
// enumeration, and sampled / locally refined lower bounds for rank-k
// matrices under a measurement ensemble.

#include <cstdint>
#include <optional>
#include <string>

#include "lrmr/ensemble.hpp"
#include "lrmr/linalg.hpp"

namespace lrmr {

enum class RicMethod { exact_enumeration, monte_carlo, mc_plus_ascent };

const char* to_string(RicMethod m);
RicMethod ric_method_from_string(const std::string& s);

struct RicEstimate {
  int order = 1;
  double value = 0.0;
  RicMethod method = RicMethod::monte_carlo;
  long long samples = 0;
  bool is_exact = false;
  bool is_lower_bound = true;
  // Unit-Frobenius matrix attaining `value` (sampled methods only).
  std::optional<MatrixXd> witness;
};

/// Combinatorial caps for exact_sparse_ric.
inline constexpr Index kMaxExactColumns = 20;
inline constexpr int kMaxExactOrder = 6;

/// delta_k of the columns of A: max over |S| = k of the largest deviation of
/// eig(A_S^T A_S) from 1.
RicEstimate exact_sparse_ric(const MatrixXd& a, int k);

/// Orders are ceiled: delta_{tk} for non-integer tk means delta_{ceil(tk)}.
int ric_order(double t, int k);

/// The j-th column pair of the i-th rank-k sample depends only on
/// (seed, i, j), so a rank-j sample is the rank-j prefix of every higher-rank
/// sample drawn with the same (seed, i).
MatrixXd rank_sample_factor(Index rows, int rank, std::uint64_t seed, long long index);

/// Monte-Carlo lower bound on delta_k: max |‖A(X)‖^2 - 1| over normalized
/// samples X = G H^T / ‖G H^T‖_F and all their rank-j prefixes, j <= k.
/// Nondecreasing in both `samples` and k.
RicEstimate mc_matrix_ric(const MeasurementEnsemble& ens, int k, long long samples,
                          std::uint64_t seed);

struct AscentOptions {
  int steps = 200;
  // Initial step is step_scale / ||A||^2, halved on every rejected step.
  double step_scale = 0.05;
  int power_iters = 200;
};

/// Projected gradient ascent and descent of f(X) = ‖A(X)‖^2 over the
/// unit-Frobenius rank-<=k set starting at `init`; returns
/// max(f_max - 1, 1 - f_min), never below the deviation at `init`.
RicEstimate ascent_refine_ric(const MeasurementEnsemble& ens, int k, const MatrixXd& init,
                              const AscentOptions& opts = {});

}  // namespace lrmr
