#include "gpcam/lbfgs.hpp"

#include <cmath>

#include "gpcam/errors.hpp"

namespace gpcam::opt {

namespace {

struct Eval {
  double f;
  double df;  // directional derivative along the search direction
};

// Quadratic interpolation minimizer of a bracketing interval, clamped to
// the interior with a 10% safeguard.
double interpolate(double a, double fa, double dfa, double b, double fb) {
  double t;
  const double denom = 2.0 * (fb - fa - dfa * (b - a));
  if (std::abs(denom) > 1e-300) {
    t = a - dfa * (b - a) * (b - a) / denom;
  } else {
    t = 0.5 * (a + b);
  }
  const double lo = std::min(a, b), hi = std::max(a, b);
  const double margin = 0.1 * (hi - lo);
  if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (a + b);
  return t;
}

}  // namespace

LbfgsResult minimize(const Objective& obj, const Eigen::VectorXd& x0,
                     const LbfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  Eigen::VectorXd x = x0;
  Eigen::VectorXd g(n);
  double f = obj(x, g);
  if (!std::isfinite(f))
    throw OptimizationDiverged("objective non-finite at initial point");

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;

  LbfgsResult result;
  result.x = x;
  result.value = f;
  result.gradient = g;

  auto phi = [&](double alpha, const Eigen::VectorXd& p,
                 Eigen::VectorXd& xt, Eigen::VectorXd& gt) -> Eval {
    xt = x + alpha * p;
    const double ft = obj(xt, gt);
    return {ft, std::isfinite(ft) ? gt.dot(p)
                                  : std::numeric_limits<double>::quiet_NaN()};
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    if (g.lpNorm<Eigen::Infinity>() < opts.grad_tolerance) {
      result.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = -g;
    const int k = static_cast<int>(s_hist.size());
    Eigen::VectorXd alpha_vec(k);
    for (int i = k - 1; i >= 0; --i) {
      alpha_vec[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha_vec[i] * y_hist[i];
    }
    if (k > 0) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (int i = 0; i < k; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha_vec[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd p = q;
    double dphi0 = g.dot(p);
    if (!(dphi0 < 0)) {  // not a descent direction; fall back to steepest
      p = -g;
      dphi0 = g.dot(p);
    }

    // Strong-Wolfe line search.
    Eigen::VectorXd xt(n), gt(n);
    const double f0 = f;
    double alpha_prev = 0.0, f_prev = f0, df_prev = dphi0;
    double alpha = 1.0;
    double alpha_found = -1.0;
    double f_found = f0;

    auto zoom = [&](double lo, double flo, double dflo, double hi,
                    double fhi) -> double {
      for (int z = 0; z < opts.max_line_search; ++z) {
        const double a = interpolate(lo, flo, dflo, hi, fhi);
        const Eval e = phi(a, p, xt, gt);
        if (!std::isfinite(e.f) || e.f > f0 + opts.wolfe_c1 * a * dphi0 ||
            e.f >= flo) {
          hi = a;
          fhi = std::isfinite(e.f) ? e.f : std::numeric_limits<double>::max();
        } else {
          if (std::abs(e.df) <= -opts.wolfe_c2 * dphi0) {
            f_found = e.f;
            return a;
          }
          if (e.df * (hi - lo) >= 0) {
            hi = lo;
            fhi = flo;
          }
          lo = a;
          flo = e.f;
          dflo = e.df;
        }
        if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) {
          f_found = flo;
          return lo;
        }
      }
      f_found = flo;
      return lo;
    };

    for (int ls = 0; ls < opts.max_line_search; ++ls) {
      const Eval e = phi(alpha, p, xt, gt);
      if (!std::isfinite(e.f)) {
        alpha *= 0.5;  // step into a non-finite region; shrink directly
        continue;
      }
      if (e.f > f0 + opts.wolfe_c1 * alpha * dphi0 ||
          (ls > 0 && e.f >= f_prev)) {
        alpha_found = zoom(alpha_prev, f_prev, df_prev, alpha, e.f);
        break;
      }
      if (std::abs(e.df) <= -opts.wolfe_c2 * dphi0) {
        alpha_found = alpha;
        f_found = e.f;
        break;
      }
      if (e.df >= 0) {
        alpha_found = zoom(alpha, e.f, e.df, alpha_prev, f_prev);
        break;
      }
      alpha_prev = alpha;
      f_prev = e.f;
      df_prev = e.df;
      alpha *= 2.0;
    }

    if (alpha_found <= 0) break;  // line search failed; accept current point

    const Eval e = phi(alpha_found, p, xt, gt);
    if (!std::isfinite(e.f) || e.f > f0) break;

    const Eigen::VectorXd s = xt - x;
    const Eigen::VectorXd yv = gt - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.history) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    x = xt;
    f = e.f;
    g = gt;
    result.iterations = iter + 1;
    (void)f_found;
  }

  result.x = x;
  result.value = f;
  result.gradient = g;
  return result;
}

}  // namespace gpcam::opt
