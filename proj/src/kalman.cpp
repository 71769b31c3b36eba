#include "gfe/kalman.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "gfe/errors.hpp"

namespace gfe::kalman {

namespace {

double unbiased_variance(const std::vector<double>& samples) {
  const long n = static_cast<long>(samples.size());
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= n;
  double acc = 0.0;
  for (double s : samples) acc += (s - mean) * (s - mean);
  return acc / (n - 1);
}

double spectral_radius_of(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> eig(m);
  double radius = 0.0;
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    radius = std::max(radius, std::abs(eig.eigenvalues()(k)));
  }
  return radius;
}

}  // namespace

NoiseCovariances estimate_noise_covariances(const ssid::RlsEstimator& est,
                                            const Eigen::MatrixXd& Gamma,
                                            double variance_floor) {
  const auto& w_hist = est.process_noise_history();
  const auto& v_hist = est.measurement_noise_history();
  if (w_hist.size() < 2 || v_hist.size() < 2) {
    throw std::invalid_argument("noise covariances need at least two recorded residuals");
  }
  const int n = est.order();
  if (Gamma.rows() != n || Gamma.cols() != n) {
    throw std::invalid_argument("Gamma must be n x n");
  }

  NoiseCovariances cov;
  cov.variance_floor = variance_floor;
  cov.Q = Eigen::MatrixXd::Zero(n, n);
  std::vector<double> component(w_hist.size());
  for (int m = 0; m < n; ++m) {
    for (std::size_t k = 0; k < w_hist.size(); ++k) component[k] = w_hist[k](m);
    cov.Q(m, m) = std::max(unbiased_variance(component), variance_floor);
  }
  cov.R = Eigen::MatrixXd::Constant(1, 1, std::max(unbiased_variance(v_hist), variance_floor));
  cov.Q_kf = Gamma * cov.Q * Gamma.transpose();
  cov.R_kf = cov.R;
  return cov;
}

Eigen::MatrixXd riccati_iterate(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                                const Eigen::MatrixXd& Q_kf, const Eigen::MatrixXd& R_kf,
                                const Eigen::MatrixXd& P0, double tol, long max_iter) {
  const long n = A.rows();
  if (A.cols() != n || C.rows() != 1 || C.cols() != n || Q_kf.rows() != n || Q_kf.cols() != n ||
      R_kf.rows() != 1 || R_kf.cols() != 1 || P0.rows() != n || P0.cols() != n) {
    throw std::invalid_argument("riccati_iterate: inconsistent dimensions");
  }

  Eigen::MatrixXd P = 0.5 * (P0 + P0.transpose());
  double delta = 0.0;
  for (long it = 0; it < max_iter; ++it) {
    const double innovation = (C * P * C.transpose())(0, 0) + R_kf(0, 0);
    if (!(innovation > 0.0) || !std::isfinite(innovation)) {
      throw NumericalFailure("riccati_iterate: singular innovation covariance", it);
    }
    const Eigen::VectorXd apct = A * P * C.transpose();
    Eigen::MatrixXd next = A * P * A.transpose() - apct * apct.transpose() / innovation + Q_kf;
    next = 0.5 * (next + next.transpose());
    delta = (next - P).cwiseAbs().maxCoeff();
    P = next;
    if (tol > 0.0 && delta < tol) return P;
  }
  if (tol <= 0.0) return P;  // fixed sweep count requested
  throw ConvergenceFailure("riccati_iterate did not converge", delta, max_iter);
}

KalmanGain kalman_gain(const Eigen::MatrixXd& A, const Eigen::MatrixXd& C,
                       const Eigen::MatrixXd& P_kf, const Eigen::MatrixXd& R_kf) {
  const double innovation = (C * P_kf * C.transpose())(0, 0) + R_kf(0, 0);
  if (!(innovation > 0.0) || !std::isfinite(innovation)) {
    throw NumericalFailure("kalman_gain: singular innovation covariance");
  }
  KalmanGain gain;
  gain.L = A * P_kf * C.transpose() / innovation;
  gain.spectral_radius = spectral_radius_of(A - gain.L * C);
  gain.stable = gain.spectral_radius < 1.0 - 1e-9;
  return gain;
}

KalmanEstimator tune(const ssid::StateSpaceModel& model, const ssid::RlsEstimator& est,
                     double variance_floor, double p0_magnitude, double riccati_tol,
                     long riccati_max_iter) {
  model.validate();
  KalmanEstimator kf;
  kf.model = model;
  kf.noise = estimate_noise_covariances(est, model.Gamma, variance_floor);
  const Eigen::MatrixXd p0 = p0_magnitude * Eigen::MatrixXd::Identity(model.n, model.n);
  kf.P_kf = riccati_iterate(model.A, model.C, kf.noise.Q_kf, kf.noise.R_kf, p0, riccati_tol,
                            riccati_max_iter);
  const KalmanGain gain = kalman_gain(model.A, model.C, kf.P_kf, kf.noise.R_kf);
  kf.L = gain.L;
  kf.spectral_radius = gain.spectral_radius;
  kf.stable = gain.stable;
  return kf;
}

KalmanFilterState::KalmanFilterState(const KalmanEstimator& kf, const Eigen::VectorXd& x0)
    : A_lc_(kf.model.A - kf.L * kf.model.C), B_(kf.model.B), L_(kf.L), x_hat_(x0) {
  if (x0.size() != kf.model.n) {
    throw std::invalid_argument("KalmanFilterState: x0 must have length n");
  }
}

double KalmanFilterState::step(const Eigen::VectorXd& u_prev, double y_prev) {
  x_hat_ = A_lc_ * x_hat_ + B_ * u_prev + L_ * y_prev;
  return x_hat_(0);
}

std::vector<double> kf_run(const KalmanEstimator& kf, const Eigen::MatrixXd& u,
                           const std::vector<double>& y, const Eigen::VectorXd& x0) {
  if (u.rows() != static_cast<long>(y.size())) {
    throw std::invalid_argument("kf_run: input and measured output must have equal length");
  }
  if (u.cols() != kf.model.i) {
    throw std::invalid_argument("kf_run: input has " + std::to_string(u.cols()) +
                                " columns, model expects " + std::to_string(kf.model.i));
  }

  std::vector<double> out(y.size());
  if (y.empty()) return out;
  KalmanFilterState state(kf, x0);
  out[0] = state.output();
  for (long k = 1; k < u.rows(); ++k) {
    out[k] = state.step(u.row(k - 1).transpose(), y[k - 1]);
  }
  return out;
}

}  // namespace gfe::kalman
