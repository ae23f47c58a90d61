#include "lrmr/ric.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lrmr/seed.hpp"

namespace lrmr {

const char* to_string(RicMethod m) {
  switch (m) {
    case RicMethod::exact_enumeration: return "exact-enumeration";
    case RicMethod::monte_carlo: return "monte-carlo";
    case RicMethod::mc_plus_ascent: return "mc-plus-ascent";
  }
  return "unknown";
}

RicMethod ric_method_from_string(const std::string& s) {
  if (s == "exact-enumeration") return RicMethod::exact_enumeration;
  if (s == "monte-carlo") return RicMethod::monte_carlo;
  if (s == "mc-plus-ascent") return RicMethod::mc_plus_ascent;
  throw DomainError("unknown RIC method: " + s);
}

int ric_order(double t, int k) {
  if (!(t > 0.0) || k < 1) throw DomainError("ric_order: need t > 0 and k >= 1");
  // Guard against t*k landing a hair above an integer through rounding.
  const double tk = t * static_cast<double>(k);
  return static_cast<int>(std::ceil(tk - 1e-12 * tk));
}

RicEstimate exact_sparse_ric(const MatrixXd& a, int k) {
  const Index n = a.cols();
  if (k < 1) throw DomainError("exact_sparse_ric: k must be >= 1");
  if (n > kMaxExactColumns || k > kMaxExactOrder)
    throw DimensionError("exact_sparse_ric: exceeds combinatorial cap (n <= 20, k <= 6)");
  if (k > n) throw DomainError("exact_sparse_ric: k exceeds the number of columns");
  if (!a.allFinite()) throw NumericalError("exact_sparse_ric: non-finite entries");

  const MatrixXd gram = a.transpose() * a;
  std::vector<Index> support(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) support[static_cast<std::size_t>(i)] = i;

  double worst = 0.0;
  MatrixXd sub(k, k);
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig;
  while (true) {
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub(i, j) = gram(support[i], support[j]);
    eig.compute(sub, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("exact_sparse_ric: eigensolver failed");
    const auto& ev = eig.eigenvalues();
    worst = std::max({worst, ev(k - 1) - 1.0, 1.0 - ev(0)});

    // Next k-combination in lexicographic order.
    int i = k - 1;
    while (i >= 0 && support[i] == n - k + i) --i;
    if (i < 0) break;
    ++support[i];
    for (int j = i + 1; j < k; ++j) support[j] = support[j - 1] + 1;
  }

  RicEstimate r;
  r.order = k;
  r.value = worst;
  r.method = RicMethod::exact_enumeration;
  r.is_exact = true;
  r.is_lower_bound = false;
  return r;
}

MatrixXd rank_sample_factor(Index rows, int rank, std::uint64_t seed, long long index) {
  MatrixXd g(rows, rank);
  const std::uint64_t base = derive_seed(seed, static_cast<std::uint64_t>(index));
  std::normal_distribution<double> normal;
  for (int j = 0; j < rank; ++j) {
    std::mt19937_64 rng(derive_seed(base, static_cast<std::uint64_t>(j)));
    for (Index i = 0; i < rows; ++i) g(i, j) = normal(rng);
  }
  return g;
}

RicEstimate mc_matrix_ric(const MeasurementEnsemble& ens, int k, long long samples,
                          std::uint64_t seed) {
  if (k < 1) throw DomainError("mc_matrix_ric: k must be >= 1");
  if (k > std::min(ens.rows(), ens.cols()))
    throw DomainError("mc_matrix_ric: k exceeds min(n1, n2)");
  if (samples < 1) throw DomainError("mc_matrix_ric: samples must be >= 1");

  const std::uint64_t left_seed = derive_seed(seed, 0);
  const std::uint64_t right_seed = derive_seed(seed, 1);
  const MatrixXd& d = ens.design();

  RicEstimate r;
  r.order = k;
  r.method = RicMethod::monte_carlo;
  r.samples = samples;
  r.is_exact = false;
  r.is_lower_bound = true;

  MatrixXd x(ens.rows(), ens.cols());
  for (long long s = 0; s < samples; ++s) {
    const MatrixXd g = rank_sample_factor(ens.rows(), k, left_seed, s);
    const MatrixXd h = rank_sample_factor(ens.cols(), k, right_seed, s);
    x.setZero();
    for (int j = 0; j < k; ++j) {
      x.noalias() += g.col(j) * h.col(j).transpose();
      const double fro2 = x.squaredNorm();
      if (!(fro2 > 0.0)) continue;
      const double q = (d * flatten(x)).squaredNorm() / fro2;
      const double dev = std::abs(q - 1.0);
      if (dev > r.value || !r.witness) {
        r.value = std::max(r.value, dev);
        r.witness = x / std::sqrt(fro2);
      }
    }
  }
  return r;
}

RicEstimate ascent_refine_ric(const MeasurementEnsemble& ens, int k, const MatrixXd& init,
                              const AscentOptions& opts) {
  if (k < 1) throw DomainError("ascent_refine_ric: k must be >= 1");
  if (opts.steps < 1) throw DomainError("ascent_refine_ric: steps must be >= 1");
  if (init.rows() != ens.rows() || init.cols() != ens.cols())
    throw DimensionError("ascent_refine_ric: init shape does not match ensemble");
  if (std::abs(init.norm() - 1.0) > 1e-8)
    throw DomainError("ascent_refine_ric: init must have unit Frobenius norm");
  const VectorXd sv = singular_values(init);
  if (k < sv.size() && sv(k) > 1e-10 * std::max(1.0, sv(0)))
    throw DomainError("ascent_refine_ric: init rank exceeds k");

  auto f = [&](const MatrixXd& x) { return apply_map(ens, x).squaredNorm(); };
  auto grad = [&](const MatrixXd& x) -> MatrixXd {
    return 2.0 * adjoint_map(ens, apply_map(ens, x));
  };
  auto project = [&](const MatrixXd& x) -> MatrixXd {
    MatrixXd z = truncate_rank(x, k);
    const double n = z.norm();
    return n > 0.0 ? MatrixXd(z / n) : z;
  };

  const double lipschitz = op_norm_sq(ens, opts.power_iters, 0x5eed);
  const double eta0 = lipschitz > 0.0 ? opts.step_scale / lipschitz : opts.step_scale;

  // direction = +1 climbs f, -1 descends.
  auto run = [&](double direction) {
    MatrixXd x = init;
    double fx = f(x);
    double eta = eta0;
    for (int s = 0; s < opts.steps; ++s) {
      const MatrixXd cand = project(x + direction * eta * grad(x));
      if (cand.norm() == 0.0) {
        eta *= 0.5;
        continue;
      }
      const double fc = f(cand);
      if (direction * (fc - fx) > 0.0) {
        x = cand;
        fx = fc;
      } else {
        eta *= 0.5;
      }
    }
    return std::make_pair(x, fx);
  };

  const auto [x_hi, f_hi] = run(1.0);
  const auto [x_lo, f_lo] = run(-1.0);

  RicEstimate r;
  r.order = k;
  r.method = RicMethod::mc_plus_ascent;
  r.samples = 2LL * opts.steps + 1;
  r.is_exact = false;
  r.is_lower_bound = true;
  if (f_hi - 1.0 >= 1.0 - f_lo) {
    r.value = f_hi - 1.0;
    r.witness = x_hi;
  } else {
    r.value = 1.0 - f_lo;
    r.witness = x_lo;
  }
  // Both runs start at init, so value >= |f(init) - 1|; the max keeps that
  // exact when f_hi and f_lo both stay at f(init).
  r.value = std::max(r.value, std::abs(f(init) - 1.0));
  return r;
}

}  // namespace lrmr
