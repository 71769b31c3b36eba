#include "gfe/ssid.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "gfe/errors.hpp"

namespace gfe::ssid {

Eigen::MatrixXd StateSpaceModel::output_matrix(int order) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, order);
  c(0, 0) = 1.0;
  return c;
}

void StateSpaceModel::validate() const {
  if (n < 1 || i < 1 || j != 1) {
    throw std::invalid_argument("model dimensions must satisfy n >= 1, i >= 1, j == 1");
  }
  if (A.rows() != n || A.cols() != n) throw std::invalid_argument("A must be n x n");
  if (B.rows() != n || B.cols() != i) throw std::invalid_argument("B must be n x i");
  if (Gamma.rows() != n || Gamma.cols() != n) throw std::invalid_argument("Gamma must be n x n");
  if (C.rows() != 1 || C.cols() != n || !C.isApprox(output_matrix(n))) {
    throw std::invalid_argument("C must equal [I 0]");
  }
  if (!(ts_s > 0.0)) throw std::invalid_argument("ts_s must be positive");
}

StateTrajectory build_states(std::span<const double> y, int order, double ts_s) {
  if (order < 1) throw std::invalid_argument("build_states: order must be >= 1");
  if (y.size() < 2) throw std::invalid_argument("build_states: need at least two output samples");
  if (!(ts_s > 0.0)) throw std::invalid_argument("build_states: ts must be positive");

  const long rows = static_cast<long>(y.size());
  StateTrajectory traj;
  traj.x.resize(rows, order);
  for (long k = 0; k < rows; ++k) traj.x(k, 0) = y[k];
  // Each further state is the backward difference of the previous one; the
  // first sample uses a zero previous value (null initial conditions).
  for (int m = 1; m < order; ++m) {
    traj.x(0, m) = traj.x(0, m - 1) / ts_s;
    for (long k = 1; k < rows; ++k) {
      traj.x(k, m) = (traj.x(k, m - 1) - traj.x(k - 1, m - 1)) / ts_s;
    }
  }
  return traj;
}

Eigen::VectorXd regressor(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& u_prev,
                          const Eigen::VectorXd& w_prev) {
  if (x_prev.size() != w_prev.size()) {
    throw std::invalid_argument("regressor: x and w must both have length n");
  }
  if (x_prev.size() < 1 || u_prev.size() < 1) {
    throw std::invalid_argument("regressor: state and input must be non-empty");
  }
  Eigen::VectorXd phi(2 * x_prev.size() + u_prev.size());
  phi << x_prev, u_prev, w_prev;
  return phi;
}

RlsEstimator::RlsEstimator(int order, int inputs, double theta0, double p0_scale)
    : n_(order), i_(inputs), theta0_(theta0), p0_scale_(p0_scale) {
  if (order < 1 || inputs < 1) {
    throw std::invalid_argument("RlsEstimator: order and inputs must be >= 1");
  }
  if (!(p0_scale > 0.0)) {
    throw std::invalid_argument("RlsEstimator: P(0) scale must be positive");
  }
  const int dim = 2 * n_ + i_;
  theta_ = Eigen::MatrixXd::Constant(dim, n_, theta0);
  P_ = p0_scale * Eigen::MatrixXd::Identity(dim, dim);
  w_last_ = Eigen::VectorXd::Zero(n_);
}

RlsStepResult RlsEstimator::step(const Eigen::VectorXd& x_k, const Eigen::VectorXd& phi,
                                 double y_k) {
  const int dim = 2 * n_ + i_;
  if (x_k.size() != n_) throw std::invalid_argument("rls_step: state must have length n");
  if (phi.size() != dim) throw std::invalid_argument("rls_step: regressor must have length 2n+i");
  if (!x_k.allFinite() || !phi.allFinite() || !std::isfinite(y_k)) {
    throw NumericalFailure("rls_step: non-finite input", steps_ + 1);
  }

  RlsStepResult res;
  res.x_hat = theta_.transpose() * phi;       // predicted state
  res.y_hat = res.x_hat(0);                   // C = [1 0 ... 0]
  res.e = x_k - res.x_hat;                    // prediction error

  const Eigen::VectorXd p_phi = P_ * phi;
  const double denom = 1.0 + phi.dot(p_phi);
  const Eigen::VectorXd gain = p_phi / denom;

  theta_ += gain * res.e.transpose();
  w_last_ = x_k - theta_.transpose() * phi;   // process-noise estimate
  const double v = y_k - res.y_hat;           // measurement-noise estimate

  P_ -= gain * p_phi.transpose();             // (I - K phi^T) P for symmetric P
  P_ = 0.5 * (P_ + P_.transpose());

  if (!theta_.allFinite()) {
    throw NumericalFailure("rls_step: parameter estimate diverged", steps_ + 1);
  }

  w_history_.push_back(w_last_);
  v_history_.push_back(v);
  phi_history_.push_back(phi);
  ++steps_;
  return res;
}

Identification identify(const FeatureMatrix& fm, int order, double theta0, double p0_scale) {
  if (order < 1) throw std::invalid_argument("identify: order must be >= 1");
  const long rows = fm.rows();
  const int inputs = static_cast<int>(fm.cols());
  if (inputs < 1) throw std::invalid_argument("identify: feature matrix has no columns");
  if (rows < 2 * order + inputs) {
    throw std::invalid_argument("identify: need at least 2n+i = " +
                                std::to_string(2 * order + inputs) + " rows, got " +
                                std::to_string(rows));
  }

  const StateTrajectory traj = build_states(fm.y, order, fm.ts_s);
  RlsEstimator est(order, inputs, theta0, p0_scale);

  Eigen::VectorXd w_prev = Eigen::VectorXd::Zero(order);
  for (long k = 1; k < rows; ++k) {
    const Eigen::VectorXd phi =
        regressor(traj.x.row(k - 1).transpose(), fm.u.row(k - 1).transpose(), w_prev);
    est.step(traj.x.row(k).transpose(), phi, fm.y[k]);
    w_prev = est.last_process_noise();
  }

  // theta^T = [A B Gamma]
  const Eigen::MatrixXd theta_t = est.theta().transpose();
  StateSpaceModel model;
  model.n = order;
  model.i = inputs;
  model.j = 1;
  model.ts_s = fm.ts_s;
  model.A = theta_t.leftCols(order);
  model.B = theta_t.middleCols(order, inputs);
  model.Gamma = theta_t.rightCols(order);
  model.C = StateSpaceModel::output_matrix(order);
  return {std::move(model), std::move(est)};
}

std::vector<double> simulate(const StateSpaceModel& model, const Eigen::MatrixXd& u,
                             const Eigen::VectorXd& x0) {
  if (u.cols() != model.i) {
    throw std::invalid_argument("simulate: input has " + std::to_string(u.cols()) +
                                " columns, model expects " + std::to_string(model.i));
  }
  if (x0.size() != model.n) throw std::invalid_argument("simulate: x0 must have length n");

  std::vector<double> out(u.rows());
  if (u.rows() == 0) return out;
  Eigen::VectorXd x = x0;
  out[0] = x(0);
  for (long k = 1; k < u.rows(); ++k) {
    x = model.A * x + model.B * u.row(k - 1).transpose();
    out[k] = x(0);
  }
  return out;
}

double aic(std::span<const double> residuals, int param_count, long sample_count) {
  if (sample_count <= 0) throw std::invalid_argument("aic: sample count must be positive");
  double sse = 0.0;
  for (double r : residuals) sse += r * r;
  return (1.0 + 2.0 * param_count / static_cast<double>(sample_count)) * sse;
}

OrderSelection select_order(const FeatureMatrix& fm, int n_min, int n_max, double rel_threshold,
                            double theta0, double p0_scale) {
  if (n_min < 1 || n_max < n_min) throw std::invalid_argument("select_order: empty order range");

  OrderSelection sel;
  for (int n = n_min; n <= n_max; ++n) {
    OrderSelection::Row row;
    row.order = n;
    try {
      Identification id = identify(fm, n, theta0, p0_scale);
      const auto& v = id.estimator.measurement_noise_history();
      if (static_cast<long>(v.size()) <= n) {
        throw std::invalid_argument("not enough residuals after transient exclusion");
      }
      std::span<const double> residuals(v.data() + n, v.size() - n);
      const int p = n * (2 * n + static_cast<int>(fm.cols()));
      row.aic_value = aic(residuals, p, static_cast<long>(residuals.size()));
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
    sel.table.push_back(row);
  }

  // Walk successive successful orders; stop at the first step that no longer
  // improves the AIC by more than the relative threshold.
  const OrderSelection::Row* prev = nullptr;
  for (const auto& row : sel.table) {
    if (row.failed) continue;
    if (prev == nullptr) {
      prev = &row;
      sel.selected_order = row.order;
      continue;
    }
    if (prev->aic_value <= 0.0) break;  // previous order already fits exactly
    const double improvement = (prev->aic_value - row.aic_value) / prev->aic_value;
    if (improvement < rel_threshold) break;
    prev = &row;
    sel.selected_order = row.order;
  }
  if (sel.selected_order == 0) {
    throw NumericalFailure("select_order: identification failed for every order in range");
  }
  return sel;
}

namespace {

long matrix_rank(const Eigen::MatrixXd& m, double rank_tol_rel) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  const double tol = rank_tol_rel * sv(0);
  long rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > tol) ++rank;
  }
  return rank;
}

}  // namespace

ModelAnalysis analyze(const StateSpaceModel& model, double rank_tol_rel) {
  model.validate();
  const int n = model.n;

  ModelAnalysis report;
  Eigen::EigenSolver<Eigen::MatrixXd> eig(model.A);
  for (Eigen::Index k = 0; k < n; ++k) {
    report.pole_moduli.push_back(std::abs(eig.eigenvalues()(k)));
  }
  report.spectral_radius = *std::max_element(report.pole_moduli.begin(), report.pole_moduli.end());
  report.stable = report.spectral_radius < 1.0;

  Eigen::MatrixXd ctrb(n, static_cast<long>(n) * model.i);
  Eigen::MatrixXd block = model.B;
  for (int k = 0; k < n; ++k) {
    ctrb.middleCols(static_cast<long>(k) * model.i, model.i) = block;
    block = model.A * block;
  }
  report.controllable = matrix_rank(ctrb, rank_tol_rel) == n;

  Eigen::MatrixXd obsv(n, n);
  Eigen::MatrixXd row = model.C;
  for (int k = 0; k < n; ++k) {
    obsv.row(k) = row;
    row = row * model.A;
  }
  report.observable = matrix_rank(obsv, rank_tol_rel) == n;
  return report;
}

}  // namespace gfe::ssid
