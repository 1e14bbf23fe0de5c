#pragma once

#include <Eigen/Dense>

namespace zscan {

// Damped least squares in the style of Madsen, Nielsen & Tingleff,
// "Methods for Non-Linear Least Squares Problems" (2004).

struct LmOptions {
  int max_iterations = 300;
  double tau = 1e-3;          // initial damping scale
  double grad_tol = 1e-14;    // stop on small gradient (inf norm)
  double step_tol = 1e-15;    // stop on small relative step
  double target_cost = 5e-27; // stop once 0.5*|r|^2 falls below this
};

struct LmOutcome {
  Eigen::VectorXd x;
  double cost = 0.0;  // 0.5 * |r|^2 at x
  int iterations = 0;
};

// fn(x, r, J) must fill the residual vector r and Jacobian J at x.
template <typename Residual>
LmOutcome lm_minimize(const Residual& fn, Eigen::VectorXd x,
                      const LmOptions& opt = {}) {
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  fn(x, r, J);
  Eigen::MatrixXd A = J.transpose() * J;
  Eigen::VectorXd g = J.transpose() * r;
  double cost = 0.5 * r.squaredNorm();

  if (x.size() == 0) return {x, cost, 0};

  double mu = opt.tau * A.diagonal().maxCoeff();
  if (!(mu > 0)) mu = opt.tau;
  double nu = 2.0;
  int it = 0;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(x.size(), x.size());

  for (; it < opt.max_iterations; ++it) {
    if (cost <= opt.target_cost) break;
    if (g.lpNorm<Eigen::Infinity>() <= opt.grad_tol) break;

    Eigen::VectorXd dx = (A + mu * I).ldlt().solve(-g);
    if (dx.norm() <= opt.step_tol * (x.norm() + opt.step_tol)) break;

    Eigen::VectorXd xn = x + dx;
    Eigen::VectorXd rn;
    Eigen::MatrixXd Jn;
    fn(xn, rn, Jn);
    double cost_n = 0.5 * rn.squaredNorm();
    double predicted = 0.5 * dx.dot(mu * dx - g);
    double rho = predicted > 0 ? (cost - cost_n) / predicted : -1.0;

    if (rho > 0) {
      x = std::move(xn);
      J = std::move(Jn);
      r = std::move(rn);
      A = J.transpose() * J;
      g = J.transpose() * r;
      cost = cost_n;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
    } else {
      mu *= nu;
      nu *= 2.0;
      if (mu > 1e40) break;
    }
  }
  return {std::move(x), cost, it};
}

}  // namespace zscan
