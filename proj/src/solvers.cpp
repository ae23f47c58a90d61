#include "lrmr/solvers.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace lrmr {

namespace {

struct ProxOutput {
  VectorXd x;
  double norm;  // value of the nonsmooth term at x
};

// Iteration stops once the certificate holds at tol * kStopTighten (or on a
// stall); `converged` is judged at tol itself.
constexpr double kStopTighten = 1e-2;

// FISTA with function-value restart on ||x||_R + ||b - D x||^2 / (2 lambda),
// where x lives in the flattened coordinates of D. `prox(v, tau)` returns
// argmin tau*||x||_R + ||x - v||^2/2 and its norm; `certify(x, norm)` returns
// the optimality certificate at x.
template <typename Prox, typename Certify>
VectorSolverResult accelerated_prox_gradient(const MatrixXd& d, const VectorXd& b, double lambda,
                                             double lipschitz, Prox&& prox, Certify&& certify,
                                             const SolverOptions& opts) {
  if (opts.max_iters < 1) throw DomainError("solver: max_iters must be >= 1");
  VectorSolverResult out;
  VectorXd x = VectorXd::Zero(d.cols());
  auto smooth = [&](const VectorXd& z) { return (b - d * z).squaredNorm() / (2.0 * lambda); };

  double f = smooth(x);
  double norm = 0.0;

  if (lipschitz <= 0.0) {
    // A == 0: the data term is constant and zero is the minimizer.
    out.solution = x;
    out.final_objective = f;
    out.objective_trace.push_back(f);
    out.iterations = 1;
    out.certificate = certify(x, 0.0);
    out.converged = out.certificate.passes();
    return out;
  }

  const double step = lambda / lipschitz;
  auto step_from = [&](const VectorXd& point) {
    const VectorXd grad = d.transpose() * (d * point - b) / lambda;
    return prox(point - step * grad, step);
  };

  VectorXd y = x;
  double t = 1.0;
  int stalled = 0;
  for (int it = 1; it <= opts.max_iters; ++it) {
    ProxOutput next = step_from(y);
    double f_next = next.norm + smooth(next.x);
    if (!std::isfinite(f_next) || !next.x.allFinite()) {
      std::ostringstream msg;
      msg << "solver: non-finite iterate at iteration " << it;
      throw NumericalError(msg.str());
    }
    if (f_next > f) {
      // Restart: drop momentum and take a plain proximal-gradient step, which
      // cannot increase the objective for step <= lambda / ||A||^2.
      t = 1.0;
      next = step_from(x);
      f_next = next.norm + smooth(next.x);
      if (!(f_next <= f)) {
        next = ProxOutput{x, norm};
        f_next = f;
      }
      y = next.x;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = next.x + ((t - 1.0) / t_next) * (next.x - x);
      t = t_next;
    }
    const double rel_change = std::abs(f - f_next) / std::max(1.0, std::abs(f));
    x = std::move(next.x);
    norm = next.norm;
    f = f_next;
    out.objective_trace.push_back(f);
    out.iterations = it;

    out.certificate = certify(x, norm);
    OptimalityCertificate target = out.certificate;
    target.tolerance *= kStopTighten;
    if (target.passes()) break;
    stalled = rel_change < opts.stall_rtol ? stalled + 1 : 0;
    if (stalled >= opts.stall_window) break;
  }
  out.converged = out.certificate.passes();
  out.final_objective = norm + smooth(x);
  out.solution = std::move(x);
  return out;
}

void check_options(const SolverOptions& opts) {
  if (opts.max_iters < 1) throw DomainError("solver: max_iters must be >= 1");
  if (!(opts.tol > 0.0)) throw DomainError("solver: tol must be positive");
}

OptimalityCertificate matrix_certificate(const MatrixXd& dual, const MatrixXd& x, double x_nuclear,
                                         double tol) {
  OptimalityCertificate c;
  c.dual_norm = spectral_norm(dual);
  c.solution_norm = x_nuclear;
  c.alignment_gap = x_nuclear - (dual.array() * x.array()).sum();
  c.tolerance = tol;
  return c;
}

}  // namespace

void RecoveryProblem::validate() const {
  const Index m = ensemble.size();
  if (m < 1) throw DimensionError("problem: empty ensemble");
  if (b.size() != m) throw DimensionError("problem: b length != m");
  if (!b.allFinite()) throw NumericalError("problem: b has non-finite entries");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("problem: lambda must be > 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
    throw DomainError("problem: epsilon must be >= 0");
  if (truth && (truth->rows() != ensemble.rows() || truth->cols() != ensemble.cols()))
    throw DimensionError("problem: truth shape does not match ensemble");
  if (noise) {
    if (noise->size() != m) throw DimensionError("problem: noise length != m");
    if (noise->norm() > epsilon + 1e-12) throw DomainError("problem: ||noise||_2 exceeds epsilon");
  }
  if (truth && noise) {
    const double mismatch = (b - apply_map(ensemble, *truth) - *noise).norm();
    if (mismatch > 1e-10 * std::max(1.0, b.norm()))
      throw DomainError("problem: b differs from A(truth) + noise");
  }
}

double rnnm_objective(const RecoveryProblem& p, const MatrixXd& x) {
  return nuclear_norm(x) + (p.b - apply_map(p.ensemble, x)).squaredNorm() / (2.0 * p.lambda);
}

OptimalityCertificate check_optimality(const RecoveryProblem& p, const MatrixXd& x, double tol) {
  if (!(p.lambda > 0.0)) throw DomainError("check_optimality: lambda must be > 0");
  const MatrixXd g = adjoint_map(p.ensemble, p.b - apply_map(p.ensemble, x)) / p.lambda;
  return matrix_certificate(g, x, nuclear_norm(x), tol);
}

OptimalityCertificate check_bpdn_optimality(const MatrixXd& a, const VectorXd& b, double lambda,
                                            const VectorXd& x, double tol) {
  if (a.rows() != b.size() || a.cols() != x.size())
    throw DimensionError("check_bpdn_optimality: dimension mismatch");
  const VectorXd g = a.transpose() * (b - a * x) / lambda;
  OptimalityCertificate c;
  c.dual_norm = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  c.solution_norm = x.lpNorm<1>();
  c.alignment_gap = c.solution_norm - g.dot(x);
  c.tolerance = tol;
  return c;
}

SolverResult solve_rnnm(const RecoveryProblem& p, const SolverOptions& opts) {
  p.validate();
  check_options(opts);
  const auto& ens = p.ensemble;
  const double lipschitz = opts.lipschitz_safety * op_norm_sq(ens, opts.power_iters, opts.power_seed);

  auto prox = [&](const VectorXd& v, double tau) {
    double nuclear = 0.0;
    MatrixXd z = svt(unflatten(v, ens.rows(), ens.cols()), tau, &nuclear);
    return ProxOutput{flatten(z), nuclear};
  };
  auto certify = [&](const VectorXd& x, double nuclear) {
    const MatrixXd xm = unflatten(x, ens.rows(), ens.cols());
    const MatrixXd g = adjoint_map(ens, p.b - ens.design() * x) / p.lambda;
    return matrix_certificate(g, xm, nuclear, opts.tol);
  };

  VectorSolverResult flat =
      accelerated_prox_gradient(ens.design(), p.b, p.lambda, lipschitz, prox, certify, opts);
  SolverResult out;
  out.solution = unflatten(flat.solution, ens.rows(), ens.cols());
  out.iterations = flat.iterations;
  out.objective_trace = std::move(flat.objective_trace);
  out.final_objective = rnnm_objective(p, out.solution);
  out.certificate = flat.certificate;
  out.converged = flat.converged;
  out.residual_norm = (p.b - apply_map(ens, out.solution)).norm();
  return out;
}

VectorSolverResult solve_bpdn(const MatrixXd& a, const VectorXd& b, double lambda,
                              const SolverOptions& opts) {
  if (a.rows() != b.size()) throw DimensionError("solve_bpdn: rows(A) != length(b)");
  if (a.rows() < 1 || a.cols() < 1) throw DimensionError("solve_bpdn: empty design");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("solve_bpdn: lambda must be > 0");
  if (!a.allFinite() || !b.allFinite()) throw NumericalError("solve_bpdn: non-finite input");
  check_options(opts);

  const double lipschitz =
      opts.lipschitz_safety * op_norm_sq(MeasurementEnsemble(a.cols(), 1, a), opts.power_iters,
                                         opts.power_seed);
  auto prox = [](const VectorXd& v, double tau) {
    VectorXd x = soft_threshold(v, tau);
    const double n = x.lpNorm<1>();
    return ProxOutput{std::move(x), n};
  };
  auto certify = [&](const VectorXd& x, double) {
    return check_bpdn_optimality(a, b, lambda, x, opts.tol);
  };
  VectorSolverResult out = accelerated_prox_gradient(a, b, lambda, lipschitz, prox, certify, opts);
  out.residual_norm = (b - a * out.solution).norm();
  return out;
}

SolverResult solve_nnm_constrained(const RecoveryProblem& p, const SolverOptions& opts) {
  p.validate();
  check_options(opts);
  const auto& ens = p.ensemble;
  const MatrixXd& d = ens.design();
  const double eps = p.epsilon;
  constexpr double kFeasibilityTol = 1e-8;

  auto project_ball = [eps](const VectorXd& v) -> VectorXd {
    const double n = v.norm();
    return n <= eps ? v : VectorXd(v * (eps / n));
  };

  SolverResult out;
  VectorXd x = VectorXd::Zero(d.cols());
  const double lipschitz = opts.lipschitz_safety * op_norm_sq(ens, opts.power_iters, opts.power_seed);
  if (lipschitz <= 0.0) {
    // A == 0: zero is optimal whenever it is feasible; nothing else can help.
    out.solution = MatrixXd::Zero(ens.rows(), ens.cols());
    out.iterations = 1;
    out.objective_trace.push_back(0.0);
    out.residual_norm = p.b.norm();
    out.certificate = matrix_certificate(MatrixXd::Zero(ens.rows(), ens.cols()), out.solution, 0.0,
                                         opts.tol);
    out.converged = out.residual_norm <= eps + kFeasibilityTol;
    return out;
  }
  const double tau = 1.0 / lipschitz;

  // Minimum-norm correction moving the residual onto the epsilon-ball.
  const Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(d);
  auto polish = [&](const VectorXd& z) -> VectorXd {
    const VectorXd res = p.b - d * z;
    const double rn = res.norm();
    if (rn <= eps) return z;
    const VectorXd target = eps > 0.0 ? VectorXd(res * (eps / rn)) : VectorXd::Zero(res.size());
    return z + cod.solve(VectorXd(res - target));
  };

  const double b_norm = p.b.norm();
  double beta = std::sqrt(lipschitz) / std::max(b_norm, 1e-12);
  VectorXd u = VectorXd::Zero(d.rows());  // scaled multiplier y / beta
  VectorXd ax = d * x;

  for (int it = 1; it <= opts.max_iters; ++it) {
    const VectorXd r = project_ball(p.b - ax - u);
    const VectorXd v = x - tau * (d.transpose() * (ax + r - p.b + u));
    double nuclear = 0.0;
    VectorXd x_next = flatten(svt(unflatten(v, ens.rows(), ens.cols()), tau / beta, &nuclear));
    if (!x_next.allFinite()) throw NumericalError("solve_nnm_constrained: non-finite iterate");
    const VectorXd ax_next = d * x_next;
    const VectorXd primal = ax_next + r - p.b;
    const double dual_res = beta * (d.transpose() * (ax_next - ax)).norm();
    u += primal;
    x = std::move(x_next);
    ax = ax_next;
    out.objective_trace.push_back(nuclear);
    out.iterations = it;

    if (primal.norm() <= 1e-9 * std::max(1.0, b_norm)) {
      const VectorXd xp = polish(x);
      const MatrixXd xm = unflatten(xp, ens.rows(), ens.cols());
      const MatrixXd g = -beta * unflatten(VectorXd(d.transpose() * u), ens.rows(), ens.cols());
      const auto cert = matrix_certificate(g, xm, nuclear_norm(xm), opts.tol);
      const double resid = (p.b - d * xp).norm();
      if (cert.passes() && resid <= eps + kFeasibilityTol) {
        out.certificate = cert;
        out.converged = true;
        x = xp;
        break;
      }
      out.certificate = cert;
    }

    if (it % 25 == 0) {
      const double pn = primal.norm();
      if (pn > 10.0 * dual_res) {
        beta *= 2.0;
        u /= 2.0;
      } else if (dual_res > 10.0 * pn) {
        beta /= 2.0;
        u *= 2.0;
      }
    }
  }

  if (!out.converged) {
    x = polish(x);
    const MatrixXd xm = unflatten(x, ens.rows(), ens.cols());
    const MatrixXd g = -beta * unflatten(VectorXd(d.transpose() * u), ens.rows(), ens.cols());
    out.certificate = matrix_certificate(g, xm, nuclear_norm(xm), opts.tol);
  }
  out.solution = unflatten(x, ens.rows(), ens.cols());
  out.residual_norm = (p.b - d * x).norm();
  out.final_objective = nuclear_norm(out.solution);
  if (!out.converged)
    out.converged = out.certificate.passes() && out.residual_norm <= eps + kFeasibilityTol;
  return out;
}

}  // namespace lrmr
