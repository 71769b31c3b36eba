#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "gfe/types.hpp"

namespace gfe::ssid {

/// Discrete stochastic state-space MISO model
///   x(k) = A x(k-1) + B u(k-1) + Gamma w(k-1)
///   y(k) = C x(k) + v(k),  C = [1 0 ... 0]
struct StateSpaceModel {
  Eigen::MatrixXd A;      // n x n
  Eigen::MatrixXd B;      // n x i
  Eigen::MatrixXd Gamma;  // n x n, noise-input matrix
  Eigen::MatrixXd C;      // 1 x n, fixed to [I 0]
  int n = 0;              // order
  int i = 0;              // input count
  int j = 1;              // output count (single output)
  double ts_s = 0.125;    // seconds between consecutive feature rows

  static Eigen::MatrixXd output_matrix(int order);

  void validate() const;  // throws std::invalid_argument on shape violations
};

/// States constructed from the output by repeated backward differences:
/// column 1 is y itself, column m is the difference of column m-1 over ts.
struct StateTrajectory {
  Eigen::MatrixXd x;  // rows x n
};

StateTrajectory build_states(std::span<const double> y, int order, double ts_s);

/// phi(k) = [x(k-1); u(k-1); w(k-1)], length 2n+i.
Eigen::VectorXd regressor(const Eigen::VectorXd& x_prev, const Eigen::VectorXd& u_prev,
                          const Eigen::VectorXd& w_prev);

struct RlsStepResult {
  Eigen::VectorXd x_hat;  // predicted state, from the previous parameter estimate
  double y_hat = 0.0;     // predicted output C * x_hat
  Eigen::VectorXd e;      // prediction error x(k) - x_hat(k)
};

/// Recursive least-squares estimator of theta = [A B Gamma]^T with unit
/// forgetting. The regressor order is [x; u; w]; the w entering a step's
/// regressor is the process-noise estimate produced by the previous step
/// (zero initial conditions). P is re-symmetrized after every update.
class RlsEstimator {
 public:
  RlsEstimator(int order, int inputs, double theta0 = 0.3, double p0_scale = 1e3);

  RlsStepResult step(const Eigen::VectorXd& x_k, const Eigen::VectorXd& phi, double y_k);

  const Eigen::MatrixXd& theta() const { return theta_; }
  const Eigen::MatrixXd& P() const { return P_; }
  const Eigen::VectorXd& last_process_noise() const { return w_last_; }

  const std::vector<Eigen::VectorXd>& process_noise_history() const { return w_history_; }
  const std::vector<double>& measurement_noise_history() const { return v_history_; }
  const std::vector<Eigen::VectorXd>& regressor_history() const { return phi_history_; }

  int order() const { return n_; }
  int inputs() const { return i_; }
  long steps() const { return steps_; }
  double theta0() const { return theta0_; }
  double p0_scale() const { return p0_scale_; }

 private:
  int n_;
  int i_;
  double theta0_;
  double p0_scale_;
  long steps_ = 0;
  Eigen::MatrixXd theta_;  // (2n+i) x n
  Eigen::MatrixXd P_;      // (2n+i) x (2n+i)
  Eigen::VectorXd w_last_;
  std::vector<Eigen::VectorXd> w_history_;
  std::vector<double> v_history_;
  std::vector<Eigen::VectorXd> phi_history_;
};

struct Identification {
  StateSpaceModel model;
  RlsEstimator estimator;
};

/// Builds the state trajectory from fm.y, runs the RLS recursion over all
/// rows in order and unpacks the final theta into (A, B, Gamma).
Identification identify(const FeatureMatrix& fm, int order, double theta0 = 0.3,
                        double p0_scale = 1e3);

/// Deterministic simulation x(k) = A x(k-1) + B u(k-1), y = C x (w = 0).
std::vector<double> simulate(const StateSpaceModel& model, const Eigen::MatrixXd& u,
                             const Eigen::VectorXd& x0);

/// Akaike information criterion (1 + 2p/N) * sum(residual^2).
double aic(std::span<const double> residuals, int param_count, long sample_count);

struct OrderSelection {
  struct Row {
    int order = 0;
    double aic_value = 0.0;
    bool failed = false;
    std::string error;
  };
  int selected_order = 0;
  std::vector<Row> table;
};

/// Identifies one model per order in [n_min, n_max], scores each by the AIC
/// of its output residuals (the first `order` residuals are dropped to skip
/// the zero-initialization transient) and picks the smallest order after
/// which the relative AIC improvement falls below `rel_threshold`.
OrderSelection select_order(const FeatureMatrix& fm, int n_min = 1, int n_max = 12,
                            double rel_threshold = 0.05, double theta0 = 0.3,
                            double p0_scale = 1e3);

struct ModelAnalysis {
  bool stable = false;        // all |eig(A)| < 1
  bool controllable = false;  // rank [B AB ... A^(n-1)B] == n
  bool observable = false;    // rank [C; CA; ...; CA^(n-1)] == n
  std::vector<double> pole_moduli;
  double spectral_radius = 0.0;
};

/// Structural report; ranks are decided by singular values relative to the
/// largest one (sigma > rank_tol_rel * sigma_max).
ModelAnalysis analyze(const StateSpaceModel& model, double rank_tol_rel = 1e-8);

}  // namespace gfe::ssid
