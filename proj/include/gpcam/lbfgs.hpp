#pragma once

#include <Eigen/Dense>
#include <deque>
#include <functional>
#include <limits>

namespace gpcam::opt {

// Objective: returns f(x) and writes the gradient. May return a non-finite
// value; the line search treats that as an inadmissible step.
using Objective =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct LbfgsOptions {
  int history = 10;
  int max_iterations = 200;
  double grad_tolerance = 1e-5;  // infinity norm
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
  int max_line_search = 40;
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;  // gradient tolerance reached
};

// Limited-memory BFGS minimization with a strong-Wolfe line search
// (bracket/zoom, Nocedal & Wright alg. 3.5-3.6). Deterministic.
LbfgsResult minimize(const Objective& f, const Eigen::VectorXd& x0,
                     const LbfgsOptions& opts = {});

}  // namespace gpcam::opt
