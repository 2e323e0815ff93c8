#pragma once

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>
#include <utility>

#include "gpcam/errors.hpp"

namespace gpcam::gp {

using Inputs = Eigen::Matrix<double, Eigen::Dynamic, 2>;

struct Hyperparams {
  double signal_variance = 1.0;  // sigma_f^2
  double length_scale = 1.0;     // l
  double noise_variance = 0.0;   // sigma_eps^2

  bool valid() const {
    return signal_variance > 0 && length_scale > 0 && noise_variance >= 0;
  }
  Eigen::Vector3d log() const;
  static Hyperparams from_log(const Eigen::Vector3d& theta);
};

// Affine conditioning applied to GP inputs before training: zero mean,
// unit max-absolute-value. Stored so predictions see the same frame.
struct InputTransform {
  Eigen::Vector2d offset = Eigen::Vector2d::Zero();
  double scale = 1.0;

  Inputs apply(const Inputs& x) const {
    return (x.rowwise() - offset.transpose()) / scale;
  }
  static InputTransform fit(const Inputs& x);
};

double se_kernel(const Eigen::Vector2d& x, const Eigen::Vector2d& x_prime,
                 const Hyperparams& h);

Eigen::MatrixXd kernel_matrix(const Inputs& a, const Inputs& b,
                              const Hyperparams& h);

// Trained scalar GP. Immutable after construction; prediction is
// thread-safe.
class GpModel {
public:
  // Builds the factorized kernel system for given hyperparameters.
  // Inputs are in original units; the transform is fitted internally
  // unless one is supplied.
  GpModel(const Inputs& train_inputs, const Eigen::VectorXd& targets,
          const Hyperparams& h);
  GpModel(const Inputs& train_inputs, const Eigen::VectorXd& targets,
          const Hyperparams& h, const InputTransform& transform);

  Eigen::VectorXd predict_mean(const Inputs& x_star) const;
  Eigen::VectorXd predict_variance(const Inputs& x_star) const;

  const Inputs& train_inputs() const { return train_inputs_; }
  const Eigen::VectorXd& centered_targets() const { return centered_targets_; }
  double target_mean() const { return target_mean_; }
  const Hyperparams& hyperparams() const { return hyperparams_; }
  const InputTransform& input_transform() const { return transform_; }
  const Eigen::MatrixXd& kernel_factor() const { return kernel_factor_; }
  double jitter() const { return jitter_; }

  nlohmann::json to_json() const;
  static GpModel from_json(const nlohmann::json& doc);

private:
  void factorize();

  Inputs train_inputs_;             // original units
  Inputs normalized_inputs_;        // conditioned units
  Eigen::VectorXd centered_targets_;
  double target_mean_ = 0.0;
  Hyperparams hyperparams_;
  InputTransform transform_;
  Eigen::MatrixXd kernel_factor_;   // lower-triangular L, L L^T = K + noise
  Eigen::VectorXd alpha_;           // (K + noise)^-1 centered_targets
  double jitter_ = 0.0;
};

// Log marginal likelihood of centered targets plus its gradient with
// respect to (log sigma_f^2, log l, log sigma_eps^2). Inputs are used
// as given (no conditioning).
std::pair<double, Eigen::Vector3d> log_marginal_likelihood(
    const Inputs& x, const Eigen::VectorXd& y_centered, const Hyperparams& h);

struct FitOptions {
  int max_iterations = 200;
  double grad_tolerance = 1e-5;
  bool multistart = true;  // l in {0.1, 1, 10} x median pairwise distance
};

// Trains by maximizing the log marginal likelihood with L-BFGS in
// log-hyperparameter space; multistart candidates are ranked by their
// leave-one-out predictive error. Deterministic.
GpModel fit(const Inputs& x, const Eigen::VectorXd& y, const Hyperparams& init,
            const FitOptions& opts = {});

// Jittered Cholesky of K + sigma_eps^2 I: starts at 1e-10 sigma_f^2 on the
// diagonal, escalates x10 up to 1e-4 sigma_f^2, then throws
// FactorizationFailure. Returns the factor and the jitter used.
std::pair<Eigen::MatrixXd, double> cholesky_with_jitter(
    const Eigen::MatrixXd& k, double noise_variance, double signal_variance);

}  // namespace gpcam::gp
