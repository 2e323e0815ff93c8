#include "gpcam/gp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <vector>

#include "gpcam/lbfgs.hpp"

namespace gpcam::gp {

Eigen::Vector3d Hyperparams::log() const {
  return {std::log(signal_variance), std::log(length_scale),
          std::log(std::max(noise_variance, 1e-300))};
}

Hyperparams Hyperparams::from_log(const Eigen::Vector3d& theta) {
  return {std::exp(theta[0]), std::exp(theta[1]), std::exp(theta[2])};
}

InputTransform InputTransform::fit(const Inputs& x) {
  InputTransform t;
  t.offset = x.colwise().mean().transpose();
  const double max_abs =
      (x.rowwise() - t.offset.transpose()).cwiseAbs().maxCoeff();
  t.scale = max_abs > 1e-300 ? max_abs : 1.0;
  return t;
}

double se_kernel(const Eigen::Vector2d& x, const Eigen::Vector2d& x_prime,
                 const Hyperparams& h) {
  const double d2 = (x - x_prime).squaredNorm();
  return h.signal_variance *
         std::exp(-d2 / (2.0 * h.length_scale * h.length_scale));
}

Eigen::MatrixXd kernel_matrix(const Inputs& a, const Inputs& b,
                              const Hyperparams& h) {
  // |a_i - b_j|^2 = |a_i|^2 + |b_j|^2 - 2 a_i . b_j
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd bn = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (a * b.transpose());
  d2.colwise() += an;
  d2.rowwise() += bn.transpose();
  d2 = d2.cwiseMax(0.0);
  const double inv = -0.5 / (h.length_scale * h.length_scale);
  return h.signal_variance * (d2 * inv).array().exp().matrix();
}

std::pair<Eigen::MatrixXd, double> cholesky_with_jitter(
    const Eigen::MatrixXd& k, double noise_variance, double signal_variance) {
  const Eigen::Index n = k.rows();
  double jitter = 1e-10 * signal_variance;
  const double jitter_cap = 1e-4 * signal_variance;
  while (true) {
    Eigen::MatrixXd sys = k;
    sys.diagonal().array() += noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(sys);
    if (llt.info() == Eigen::Success)
      return {Eigen::MatrixXd(llt.matrixL()), jitter};
    if (jitter >= jitter_cap)
      throw FactorizationFailure(
          "kernel system not factorizable at jitter cap (n=" +
          std::to_string(n) + ")");
    jitter *= 10.0;
  }
}

std::pair<double, Eigen::Vector3d> log_marginal_likelihood(
    const Inputs& x, const Eigen::VectorXd& y_centered, const Hyperparams& h) {
  const Eigen::Index n = x.rows();
  const Eigen::MatrixXd k = kernel_matrix(x, x, h);
  auto [L, jitter] = cholesky_with_jitter(k, h.noise_variance, h.signal_variance);

  const Eigen::VectorXd alpha = L.transpose()
                                    .triangularView<Eigen::Upper>()
                                    .solve(L.triangularView<Eigen::Lower>()
                                               .solve(y_centered));
  double logdet = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) logdet += std::log(L(i, i));
  logdet *= 2.0;

  const double value = -0.5 * y_centered.dot(alpha) - 0.5 * logdet -
                       0.5 * n * std::log(2.0 * std::numbers::pi);

  // K^-1 via the factor; n is small enough for the dense inverse.
  Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
  L.triangularView<Eigen::Lower>().solveInPlace(kinv);
  L.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);

  const Eigen::MatrixXd w = alpha * alpha.transpose() - kinv;

  // Pairwise squared distances, for the length-scale derivative.
  const Eigen::VectorXd xn = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * (x * x.transpose());
  d2.colwise() += xn;
  d2.rowwise() += xn.transpose();
  d2 = d2.cwiseMax(0.0);

  // dK/dlog sigma_f^2 = K_se, dK/dlog l = K_se .* d2/l^2,
  // dK/dlog sigma_eps^2 = sigma_eps^2 I.
  Eigen::Vector3d grad;
  grad[0] = 0.5 * w.cwiseProduct(k).sum();
  const double inv_l2 = 1.0 / (h.length_scale * h.length_scale);
  grad[1] = 0.5 * w.cwiseProduct(k.cwiseProduct(d2 * inv_l2)).sum();
  grad[2] = 0.5 * h.noise_variance * w.trace();
  return {value, grad};
}

GpModel::GpModel(const Inputs& train_inputs, const Eigen::VectorXd& targets,
                 const Hyperparams& h)
    : GpModel(train_inputs, targets, h, InputTransform::fit(train_inputs)) {}

GpModel::GpModel(const Inputs& train_inputs, const Eigen::VectorXd& targets,
                 const Hyperparams& h, const InputTransform& transform)
    : train_inputs_(train_inputs),
      normalized_inputs_(transform.apply(train_inputs)),
      target_mean_(targets.mean()),
      hyperparams_(h),
      transform_(transform) {
  if (train_inputs.rows() < 2)
    throw Error("GpModel: need at least 2 training points");
  if (!h.valid()) throw Error("GpModel: invalid hyperparameters");
  centered_targets_ = targets.array() - target_mean_;
  factorize();
}

void GpModel::factorize() {
  const Eigen::MatrixXd k =
      kernel_matrix(normalized_inputs_, normalized_inputs_, hyperparams_);
  auto [L, jitter] = cholesky_with_jitter(k, hyperparams_.noise_variance,
                                          hyperparams_.signal_variance);
  kernel_factor_ = L;
  jitter_ = jitter;
  alpha_ = kernel_factor_.transpose()
               .triangularView<Eigen::Upper>()
               .solve(kernel_factor_.triangularView<Eigen::Lower>().solve(
                   centered_targets_));
}

Eigen::VectorXd GpModel::predict_mean(const Inputs& x_star) const {
  const Eigen::MatrixXd ks =
      kernel_matrix(transform_.apply(x_star), normalized_inputs_, hyperparams_);
  return (ks * alpha_).array() + target_mean_;
}

Eigen::VectorXd GpModel::predict_variance(const Inputs& x_star) const {
  const Eigen::MatrixXd ks =
      kernel_matrix(transform_.apply(x_star), normalized_inputs_, hyperparams_)
          .transpose();
  const Eigen::MatrixXd v =
      kernel_factor_.triangularView<Eigen::Lower>().solve(ks);
  Eigen::VectorXd var =
      Eigen::VectorXd::Constant(x_star.rows(), hyperparams_.signal_variance) -
      v.colwise().squaredNorm().transpose();
  return var.cwiseMax(0.0);
}

GpModel fit(const Inputs& x, const Eigen::VectorXd& y, const Hyperparams& init,
            const FitOptions& opts) {
  if (x.rows() < 2) throw Error("fit: need at least 2 training points");
  if (!x.allFinite() || !y.allFinite())
    throw Error("fit: non-finite inputs or targets");

  const InputTransform transform = InputTransform::fit(x);
  const Inputs xn = transform.apply(x);
  const double mean = y.mean();
  const Eigen::VectorXd yc = y.array() - mean;

  opt::Objective objective = [&](const Eigen::VectorXd& theta,
                                 Eigen::VectorXd& grad) -> double {
    Eigen::Vector3d t3 = theta;
    // Keep the exponentials in a sane range; outside it the kernel is
    // numerically constant or zero anyway.
    for (int i = 0; i < 3; ++i) t3[i] = std::clamp(t3[i], -46.0, 46.0);
    const Hyperparams h = Hyperparams::from_log(t3);
    try {
      auto [value, g] = log_marginal_likelihood(xn, yc, h);
      grad = -g;
      return -value;
    } catch (const FactorizationFailure&) {
      grad = Eigen::VectorXd::Zero(3);
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  // Median pairwise distance of the conditioned inputs, the multi-start
  // anchor for the length scale.
  double median_dist = 1.0;
  {
    std::vector<double> d;
    const Eigen::Index n = std::min<Eigen::Index>(xn.rows(), 200);
    d.reserve(static_cast<size_t>(n * (n - 1) / 2));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        d.push_back((xn.row(i) - xn.row(j)).norm());
    if (!d.empty()) {
      std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
      median_dist = std::max(d[d.size() / 2], 1e-12);
    }
  }

  const double var_y = yc.squaredNorm() / std::max<Eigen::Index>(yc.size(), 1);
  const double sf2 = var_y > 1e-300 ? var_y : 1.0;

  std::vector<Hyperparams> starts;
  starts.push_back(init);
  if (opts.multistart) {
    // Both moderate- and low-noise starts; the interpolation regime of
    // the likelihood is only reachable from a small noise variance.
    for (double m : {0.1, 1.0, 10.0})
      for (double s : {1e-6, 1e-10})
        starts.push_back({sf2, m * median_dist, s * sf2});
  }

  opt::LbfgsOptions lopts;
  lopts.max_iterations = opts.max_iterations;
  lopts.grad_tolerance = opts.grad_tolerance;

  // Leave-one-out RMS error, closed form from the factorization. Raw
  // likelihood values are not comparable across basins once the jitter
  // floor kicks in, so candidates are ranked by predictive error.
  auto loo_rms = [&](const Hyperparams& h) -> double {
    const Eigen::MatrixXd k = kernel_matrix(xn, xn, h);
    auto [L, jitter] = cholesky_with_jitter(k, h.noise_variance,
                                            h.signal_variance);
    (void)jitter;
    const Eigen::Index n = xn.rows();
    Eigen::MatrixXd kinv = Eigen::MatrixXd::Identity(n, n);
    L.triangularView<Eigen::Lower>().solveInPlace(kinv);
    L.transpose().triangularView<Eigen::Upper>().solveInPlace(kinv);
    const Eigen::VectorXd alpha =
        L.transpose().triangularView<Eigen::Upper>().solve(
            L.triangularView<Eigen::Lower>().solve(yc));
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double e = alpha[i] / kinv(i, i);
      sum += e * e;
    }
    return std::sqrt(sum / static_cast<double>(n));
  };

  bool have_best = false;
  double best_loo = std::numeric_limits<double>::infinity();
  Hyperparams best_h = init;
  for (const Hyperparams& h0 : starts) {
    if (!h0.valid()) continue;
    Eigen::Vector3d theta0 = h0.log();
    theta0[2] = std::max(theta0[2], std::log(1e-12 * h0.signal_variance));
    opt::LbfgsResult r;
    try {
      r = opt::minimize(objective, theta0, lopts);
    } catch (const OptimizationDiverged&) {
      continue;
    }
    if (!std::isfinite(r.value)) continue;
    Eigen::Vector3d t3 = r.x;
    for (int i = 0; i < 3; ++i) t3[i] = std::clamp(t3[i], -46.0, 46.0);
    const Hyperparams h = Hyperparams::from_log(t3);
    double loo;
    try {
      loo = loo_rms(h);
    } catch (const FactorizationFailure&) {
      continue;
    }
    if (!std::isfinite(loo)) continue;
    if (loo < best_loo) {
      best_loo = loo;
      best_h = h;
      have_best = true;
    }
  }
  if (!have_best)
    throw OptimizationDiverged("fit: no initialization produced a finite LML");

  return GpModel(x, y.eval(), best_h, transform);
}

nlohmann::json GpModel::to_json() const {
  nlohmann::json doc;
  doc["schema"] = "gpcam-gp/1";
  doc["target_mean"] = target_mean_;
  doc["log_hyperparams"] = {std::log(hyperparams_.signal_variance),
                            std::log(hyperparams_.length_scale),
                            hyperparams_.noise_variance > 0
                                ? std::log(hyperparams_.noise_variance)
                                : -std::numeric_limits<double>::infinity()};
  doc["input_transform"] = {{"offset", {transform_.offset.x(),
                                        transform_.offset.y()}},
                            {"scale", transform_.scale}};
  nlohmann::json inputs = nlohmann::json::array();
  nlohmann::json targets = nlohmann::json::array();
  for (Eigen::Index i = 0; i < train_inputs_.rows(); ++i) {
    inputs.push_back({train_inputs_(i, 0), train_inputs_(i, 1)});
    targets.push_back(centered_targets_[i]);
  }
  doc["inputs"] = std::move(inputs);
  doc["centered_targets"] = std::move(targets);
  return doc;
}

GpModel from_json_impl(const nlohmann::json& doc) {
  if (doc.value("schema", "") != "gpcam-gp/1")
    throw FormatError("GpModel: unrecognized schema");
  const auto& in = doc.at("inputs");
  const Eigen::Index n = static_cast<Eigen::Index>(in.size());
  Inputs x(n, 2);
  Eigen::VectorXd yc(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i, 0) = in[i][0].get<double>();
    x(i, 1) = in[i][1].get<double>();
    yc[i] = doc.at("centered_targets")[i].get<double>();
  }
  const auto& lh = doc.at("log_hyperparams");
  Hyperparams h;
  h.signal_variance = std::exp(lh[0].get<double>());
  h.length_scale = std::exp(lh[1].get<double>());
  const double ln = lh[2].get<double>();
  h.noise_variance = std::isfinite(ln) ? std::exp(ln) : 0.0;
  InputTransform t;
  t.offset.x() = doc.at("input_transform").at("offset")[0].get<double>();
  t.offset.y() = doc.at("input_transform").at("offset")[1].get<double>();
  t.scale = doc.at("input_transform").at("scale").get<double>();
  const double mean = doc.at("target_mean").get<double>();
  return GpModel(x, (yc.array() + mean).matrix().eval(), h, t);
}

GpModel GpModel::from_json(const nlohmann::json& doc) {
  return from_json_impl(doc);
}

}  // namespace gpcam::gp
