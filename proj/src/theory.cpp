#include "lrmr/theory.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lrmr {

void TheoryParams::validate() const {
  if (!(t > 1.0) || !std::isfinite(t)) throw DomainError("theory: t must be > 1");
  if (k < 1) throw DomainError("theory: k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("theory: delta must lie in (0, 1)");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("theory: lambda must be > 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("theory: epsilon must be >= 0");
}

double rip_threshold(double t) {
  if (!(t > 1.0) || !std::isfinite(t)) throw DomainError("rip_threshold: t must be > 1");
  return std::sqrt((t - 1.0) / t);
}

double rip_threshold_small_t(double t) {
  if (!(t > 0.0 && t < 4.0)) throw DomainError("rip_threshold_small_t: t must lie in (0, 4)");
  return t / (4.0 - t);
}

Betas betas(double delta, double t) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("betas: delta must lie in (0, 1)");
  if (!(t > 1.0) || !std::isfinite(t)) throw DomainError("betas: t must be > 1");
  Betas b;
  b.beta1 = 2.0 / ((1.0 - delta) * std::sqrt(1.0 + delta));
  b.beta2 = delta / std::sqrt((1.0 - delta * delta) * (t - 1.0));
  return b;
}

TheoryBounds theorem1_constants(const TheoryParams& p) {
  p.validate();
  const auto [beta1, beta2] = betas(p.delta, p.t);
  const double k = p.k;
  const double sk = std::sqrt(k);
  const double lam = p.lambda;
  const double eps = p.epsilon;
  const double head = sk * beta1 * lam + eps;

  TheoryBounds out;
  out.beta1 = beta1;
  out.beta2 = beta2;
  out.c1 = 2.0 * lam / head;
  out.c2 = 2.0 * sk * beta1 * lam + 2.0 * eps;
  out.condition_ok = p.delta < rip_threshold(p.t);
  out.beta2_lt_one = beta2 < 1.0;
  if (out.beta2_lt_one) {
    const double gap = 1.0 - beta2;
    out.c3 = (2.0 * sk * beta1 * (2.0 * sk + 1.0 + beta2) * lam +
              2.0 * (sk * beta2 + 2.0 * beta2 + sk) * eps) /
             (k * beta1 * gap * lam);
    // The printed denominator carries the factor (sqrt(k) beta1 lambda + eps)^-1.
    out.c4 = (2.0 * (k + sk) * beta1 * lam + (beta2 + 2.0 * sk - sk * beta2) * eps) /
             (sk * gap * lam / head);
  }
  return out;
}

bool holds_within_tolerance(double lhs, double rhs) {
  return lhs <= rhs + 1e-8 + 1e-8 * std::max(std::abs(lhs), std::abs(rhs));
}

namespace {

struct SplitNuclear {
  double head = 0.0;
  double tail = 0.0;
};

SplitNuclear split_nuclear(const MatrixXd& x, int k) {
  const VectorXd s = singular_values(x);
  const Index h = std::min<Index>(k, s.size());
  return {s.head(h).sum(), s.tail(s.size() - h).sum()};
}

const MatrixXd& require_truth(const RecoveryProblem& p, const char* who) {
  if (!p.truth) throw DomainError(std::string(who) + ": problem has no ground truth");
  return *p.truth;
}

}  // namespace

Lemma3Report check_lemma3(const RecoveryProblem& p, const MatrixXd& xsharp, int k) {
  const MatrixXd& truth = require_truth(p, "check_lemma3");
  if (k < 1) throw DomainError("check_lemma3: k must be >= 1");
  if (xsharp.rows() != truth.rows() || xsharp.cols() != truth.cols())
    throw DimensionError("check_lemma3: solution shape does not match truth");

  const MatrixXd h = xsharp - truth;
  const auto hs = split_nuclear(h, k);
  const double x_tail = split_nuclear(truth, k).tail;
  const double ah = apply_map(p.ensemble, h).norm();
  const double lam = p.lambda;
  const double eps = p.epsilon;

  Lemma3Report r;
  r.map_error = ah;
  r.head_nuclear = hs.head;
  r.tail_nuclear = hs.tail;
  r.truth_tail = x_tail;
  r.ineq5_lhs = ah * ah - 2.0 * eps * ah;
  r.ineq5_rhs = 2.0 * lam * (hs.head - hs.tail + 2.0 * x_tail);
  r.ineq6_lhs = hs.tail;
  r.ineq6_rhs = hs.head + 2.0 * x_tail + (eps / lam) * ah;
  r.ineq5_pass = holds_within_tolerance(r.ineq5_lhs, r.ineq5_rhs);
  r.ineq6_pass = holds_within_tolerance(r.ineq6_lhs, r.ineq6_rhs);
  return r;
}

const char* to_string(GateStatus s) {
  return s == GateStatus::verified ? "verified" : "precondition-unmet";
}

Theorem1Report verify_theorem1(const RecoveryProblem& p, const MatrixXd& xsharp,
                               const TheoryParams& params) {
  const MatrixXd& truth = require_truth(p, "verify_theorem1");
  if (xsharp.rows() != truth.rows() || xsharp.cols() != truth.cols())
    throw DimensionError("verify_theorem1: solution shape does not match truth");

  TheoryParams q = params;
  q.lambda = p.lambda;
  q.epsilon = p.epsilon;

  Theorem1Report r;
  r.noise_norm = (p.b - apply_map(p.ensemble, truth)).norm();
  r.tail_norm = split_nuclear(truth, q.k).tail;
  r.map_error = apply_map(p.ensemble, MatrixXd(xsharp - truth)).norm();
  r.frob_error = (xsharp - truth).norm();

  if (!(q.delta > 0.0 && q.delta < 1.0)) {
    std::ostringstream msg;
    msg << "delta " << q.delta << " outside (0, 1)";
    r.reason = msg.str();
    return r;
  }
  r.bounds = theorem1_constants(q);
  if (!r.bounds.condition_ok) {
    std::ostringstream msg;
    msg << "delta " << q.delta << " >= threshold " << rip_threshold(q.t);
    r.reason = msg.str();
    return r;
  }
  const double budget = std::min(q.epsilon, 0.5 * q.lambda);
  if (r.noise_norm > budget + 1e-12) {
    std::ostringstream msg;
    msg << "noise norm " << r.noise_norm << " exceeds min(epsilon, lambda/2) = " << budget;
    r.reason = msg.str();
    return r;
  }

  r.status = GateStatus::verified;
  r.bound8_rhs = r.bounds.c1 * r.tail_norm + r.bounds.c2;
  r.bound9_rhs = *r.bounds.c3 * r.tail_norm + *r.bounds.c4;
  r.bound8_pass = holds_within_tolerance(r.map_error, r.bound8_rhs);
  r.bound9_pass = holds_within_tolerance(r.frob_error, r.bound9_rhs);
  return r;
}

VectorXd PolytopeDecomposition::recombine() const {
  if (atoms.empty()) return {};
  VectorXd sum = VectorXd::Zero(atoms.front().size());
  for (std::size_t i = 0; i < atoms.size(); ++i) sum += weights[i] * atoms[i];
  return sum;
}

bool in_polytope(const VectorXd& v, double alpha, int k) {
  if (v.size() == 0) return true;
  const double slack = 1.0 + 1e-12;
  return v.minCoeff() >= 0.0 && v.maxCoeff() <= alpha * slack &&
         v.sum() <= static_cast<double>(k) * alpha * slack;
}

// Carathéodory walk on the capped simplex P = {0 <= u <= 1, sum u = s} over
// supp(v), in units of alpha. Every vertex of P has at most one fractional
// coordinate, hence at most ceil(s) <= k nonzeros, so vertices are valid
// atoms. Each step peels off a vertex of the minimal face containing the
// current point and moves to the face boundary, fixing one more coordinate.
PolytopeDecomposition lemma1_decompose(const VectorXd& v, double alpha, int k) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("lemma1_decompose: alpha must be > 0");
  if (k < 1) throw DomainError("lemma1_decompose: k must be >= 1");
  if (v.size() > kMaxDecomposeLength || k > kMaxDecomposeSparsity)
    throw DimensionError("lemma1_decompose: input exceeds size cap (length <= 10, k <= 4)");
  if (!v.allFinite()) throw NumericalError("lemma1_decompose: non-finite entries");
  if (v.size() > 0 && v.minCoeff() < 0.0) throw DomainError("lemma1_decompose: v must be nonnegative");
  if (!in_polytope(v, alpha, k)) {
    std::ostringstream msg;
    msg << "lemma1_decompose: v is not in T(alpha, k): ||v||_inf = "
        << (v.size() ? v.maxCoeff() : 0.0) << ", ||v||_1 = " << v.sum() << ", alpha = " << alpha
        << ", k = " << k;
    throw DomainError(msg.str());
  }

  PolytopeDecomposition out;
  out.alpha = alpha;
  out.k = k;
  const Index n = v.size();
  if ((v.array() > 0.0).count() <= k) {
    out.weights.push_back(1.0);
    out.atoms.push_back(v);
    return out;
  }

  constexpr double kSnap = 1e-12;
  VectorXd p = (v / alpha).cwiseMin(1.0);
  auto snap = [&] {
    for (Index j = 0; j < n; ++j) {
      if (p(j) <= kSnap) p(j) = 0.0;
      else if (p(j) >= 1.0 - kSnap) p(j) = 1.0;
    }
  };
  snap();

  double mass = 1.0;
  for (Index guard = 0; guard <= n + 1; ++guard) {
    std::vector<Index> free;
    Index ones = 0;
    double r = 0.0;
    for (Index j = 0; j < n; ++j) {
      if (p(j) == 1.0) ++ones;
      else if (p(j) > 0.0) {
        free.push_back(j);
        r += p(j);
      }
    }
    std::stable_sort(free.begin(), free.end(), [&](Index a, Index b) { return p(a) > p(b); });

    const Index full = static_cast<Index>(std::floor(r + kSnap));
    double frac = std::max(r - static_cast<double>(full), 0.0);
    if (ones + full >= k || frac <= kSnap) frac = 0.0;

    VectorXd x = p;  // fixed coordinates keep their 0/1 values
    double mu = 1.0;
    for (std::size_t i = 0; i < free.size(); ++i) {
      const Index j = free[i];
      const auto idx = static_cast<Index>(i);
      const double xj = idx < full ? 1.0 : (idx == full ? frac : 0.0);
      x(j) = xj;
      if (xj == 1.0) mu = std::min(mu, p(j));
      else if (xj == 0.0) mu = std::min(mu, 1.0 - p(j));
      else mu = std::min({mu, p(j) / xj, (1.0 - p(j)) / (1.0 - xj)});
    }

    if (mu >= 1.0 - kSnap) {
      out.weights.push_back(mass);
      out.atoms.push_back(alpha * x);
      return out;
    }
    out.weights.push_back(mass * mu);
    out.atoms.push_back(alpha * x);
    mass *= 1.0 - mu;
    p = ((p - mu * x) / (1.0 - mu)).cwiseMax(0.0).cwiseMin(1.0);
    snap();
  }
  throw NumericalError("lemma1_decompose: vertex walk did not terminate");
}

}  // namespace lrmr
