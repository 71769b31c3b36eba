#pragma once

#include <Eigen/Core>
#include <vector>

#include "gfe/ssid.hpp"

namespace gfe::kalman {

/// Noise covariances estimated from the identification residuals.
/// Q and R are diagonal; the filter weighting matrices are
/// Q_kf = Gamma Q Gamma^T and R_kf = R (minimum-variance tuning).
struct NoiseCovariances {
  Eigen::MatrixXd Q;     // n x n diagonal, process-noise variances
  Eigen::MatrixXd R;     // 1 x 1, measurement-noise variance
  Eigen::MatrixXd Q_kf;  // n x n
  Eigen::MatrixXd R_kf;  // 1 x 1
  double variance_floor = 1e-9;
};

/// Sample variances (unbiased) of the recorded w and v histories, floored at
/// `variance_floor` so noise-free data cannot produce a singular R_kf.
/// Histories shorter than two entries are rejected.
NoiseCovariances estimate_noise_covariances(const ssid::RlsEstimator& est,
                                            const Eigen::MatrixXd& Gamma,
                                            double variance_floor = 1e-9);

/// Iterates the estimator Riccati difference equation
///   P <- A P A^T - A P C^T (C P C^T + R_kf)^-1 C P A^T + Q_kf
/// from P0 until the max-abs change drops below `tol`. The iterate is
/// re-symmetrized every step. Throws ConvergenceFailure when the cap is hit.
/// A non-positive `tol` runs exactly `max_iter` sweeps and returns.
Eigen::MatrixXd riccati_iterate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                const Eigen::MatrixXd& Q_kf, const Eigen::MatrixXd& R_kf,
                                const Eigen::MatrixXd& P0, double tol = 1e-10,
                                long max_iter = 100000);

struct KalmanGain {
  Eigen::VectorXd L;            // n x 1
  double spectral_radius = 0.0; // of A - L C
  bool stable = false;          // spectral radius < 1 - 1e-9
};

/// Optimal stationary gain L = A P C^T (C P C^T + R_kf)^-1 together with the
/// spectral radius of the estimator matrix A - L C.
KalmanGain kalman_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                       const Eigen::MatrixXd& P_kf, const Eigen::MatrixXd& R_kf);

/// Stationary Kalman estimator: gain and converged covariance over a model.
struct KalmanEstimator {
  ssid::StateSpaceModel model;
  Eigen::VectorXd L;
  Eigen::MatrixXd P_kf;
  NoiseCovariances noise;
  double spectral_radius = 0.0;
  bool stable = false;
};

/// Offline tuning for the non-adaptive case: residual covariances, Riccati
/// fixed point from a high-magnitude P0 and the stationary gain.
KalmanEstimator tune(const ssid::StateSpaceModel& model, const ssid::RlsEstimator& est,
                     double variance_floor = 1e-9, double p0_magnitude = 1e3,
                     double riccati_tol = 1e-10, long riccati_max_iter = 100000);

/// Single-stream filter state for the per-window estimation loop:
///   x(k) = (A - L C) x(k-1) + B u(k-1) + L y(k-1),  y_kf(k) = C x(k).
class KalmanFilterState {
 public:
  KalmanFilterState(const KalmanEstimator& kf, const Eigen::VectorXd& x0);

  double step(const Eigen::VectorXd& u_prev, double y_prev);
  double output() const { return x_hat_(0); }

 private:
  Eigen::MatrixXd A_lc_;  // A - L C
  Eigen::MatrixXd B_;
  Eigen::VectorXd L_;
  Eigen::VectorXd x_hat_;
};

/// Runs the estimator over aligned input and measured-output sequences with
/// x(0) = x0; the first output is C x0. Values are not clamped here; only the
/// final force report clamps to [0, 1].
std::vector<double> kf_run(const KalmanEstimator& kf, const Eigen::MatrixXd& u,
                           const std::vector<double>& y, const Eigen::VectorXd& x0);

}  // namespace gfe::kalman
