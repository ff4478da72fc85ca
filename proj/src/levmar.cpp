#include "decoh/levmar.hpp"

#include <cmath>

#include "decoh/error.hpp"

namespace decoh {

namespace {

void numeric_jacobian(const ResidualFn& f, const Eigen::VectorXd& p, Eigen::MatrixXd& jac, Eigen::Index n) {
  Eigen::VectorXd plus(n), minus(n);
  jac.resize(n, p.size());
  Eigen::VectorXd q = p;
  for (Eigen::Index j = 0; j < p.size(); ++j) {
    const double h = 1e-6 * std::max(std::abs(p[j]), 1e-6);
    q[j] = p[j] + h;
    f(q, plus);
    q[j] = p[j] - h;
    f(q, minus);
    q[j] = p[j];
    jac.col(j) = (plus - minus) / (2.0 * h);
  }
}

}  // namespace

LmResult levenberg_marquardt(const ResidualFn& residual, const std::optional<JacobianFn>& jacobian,
                             Eigen::VectorXd p, Eigen::Index n, const LmOptions& opt) {
  const Eigen::Index m = p.size();
  if (n < m) throw InvalidArgument("fewer residuals than parameters");
  const bool bounded = opt.lower_bounds.size() == m;
  auto project = [&](Eigen::VectorXd& q) {
    if (bounded) q = q.cwiseMax(opt.lower_bounds);
  };
  project(p);

  auto eval_jac = [&](const Eigen::VectorXd& q, Eigen::MatrixXd& jac) {
    if (jacobian) {
      jac.resize(n, m);
      (*jacobian)(q, jac);
    } else {
      numeric_jacobian(residual, q, jac, n);
    }
  };

  Eigen::VectorXd r(n), r_try(n);
  residual(p, r);
  if (!r.allFinite()) throw NumericError("fit residuals are not finite at the starting point");
  double cost = r.squaredNorm();
  Eigen::MatrixXd jac;
  eval_jac(p, jac);
  double lambda = opt.initial_damping;

  LmResult result;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * r;
    if (grad.lpNorm<Eigen::Infinity>() == 0.0) {
      result.converged = true;
      result.message = "zero gradient";
      break;
    }
    bool accepted = false;
    bool small_step = false;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index j = 0; j < m; ++j) a(j, j) += lambda * std::max(jtj(j, j), 1e-30);
      const Eigen::VectorXd step = a.ldlt().solve(-grad);
      Eigen::VectorXd p_try = p + step;
      project(p_try);
      const Eigen::VectorXd actual = p_try - p;
      if (actual.norm() <= opt.step_tolerance * (p.norm() + opt.step_tolerance)) {
        small_step = true;
        break;
      }
      residual(p_try, r_try);
      const double cost_try = r_try.allFinite() ? r_try.squaredNorm() : INFINITY;
      if (cost_try < cost) {
        p = p_try;
        r = r_try;
        const double rel = (cost - cost_try) / std::max(cost, 1e-300);
        cost = cost_try;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
        eval_jac(p, jac);
        if (actual.norm() <= opt.step_tolerance * (p.norm() + opt.step_tolerance) || rel < 1e-15 || cost == 0.0)
          small_step = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (small_step) {
      result.converged = true;
      result.message = "relative step below tolerance";
      ++it;
      break;
    }
    if (!accepted) {
      // no decrease possible at any damping: a (possibly flat) minimum
      result.converged = true;
      result.message = "no further reduction";
      ++it;
      break;
    }
  }
  if (!result.converged) result.message = "iteration limit reached";

  result.params = p;
  result.iterations = it;
  result.residual_norm = std::sqrt(cost);
  residual(p, r);
  eval_jac(p, jac);
  const double dof = static_cast<double>(n - m);
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  const Eigen::MatrixXd inv = jtj.completeOrthogonalDecomposition().pseudoInverse();
  if (opt.robust_covariance) {
    const Eigen::MatrixXd meat = jac.transpose() * r.cwiseAbs2().asDiagonal() * jac;
    const double scale = dof > 0 ? static_cast<double>(n) / dof : 1.0;
    result.covariance = scale * inv * meat * inv;
  } else {
    const double s2 = dof > 0 ? cost / dof : 1.0;
    result.covariance = s2 * inv;
  }
  return result;
}

}  // namespace decoh
