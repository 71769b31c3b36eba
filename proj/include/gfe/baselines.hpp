#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "gfe/types.hpp"

namespace gfe::baselines {

/// Shared training settings for the neural baselines: per-sample
/// backpropagation (mini-batch 1) with RMSprop and a squared-error cost.
struct TrainConfig {
  int epochs = 1000;
  double learning_rate = 0.001;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  int hidden = 4;  // hidden neurons; matched to the state-space order
  std::uint64_t seed = 1;
};

/// Three-layer perceptron: sigmoid hidden layer, linear single output.
/// Both layers carry a bias weight in column/entry 0.
struct MlpModel {
  Eigen::MatrixXd w1;  // hidden x (inputs + 1)
  Eigen::VectorXd w2;  // hidden + 1
  int inputs = 0;
  int hidden = 0;
  double final_mse = 0.0;
  TrainConfig cfg;
};

MlpModel mlp_train(const FeatureMatrix& fm, const TrainConfig& cfg);

/// Raw variant used by the NARX wrapper; rows of `x` are samples.
MlpModel mlp_train_raw(const Eigen::MatrixXd& x, const std::vector<double>& y,
                       const TrainConfig& cfg);

double mlp_predict(const MlpModel& m, const Eigen::VectorXd& u_row);

struct NarxConfig {
  TrainConfig train;
  int input_memory = 4;   // n_u: lags of u beyond the current sample
  int output_memory = 4;  // n_y: lags of fed-back output
};

/// Recurrent NARX regressor realized as an MLP over the lagged vector
/// [u(k) .. u(k-n_u), y(k-1) .. y(k-n_y)].
struct NarxModel {
  MlpModel inner;
  int input_memory = 0;
  int output_memory = 0;
  int base_inputs = 0;  // feature count i before lag expansion
};

/// Series-parallel training: the lagged outputs in the regressor are the
/// measured ones (teacher forcing).
NarxModel narx_train(const FeatureMatrix& fm, const NarxConfig& cfg);

/// Parallel (closed-loop) prediction: past outputs in the regressor are the
/// model's own previous predictions, seeded with `y_init` (n_y values).
/// Output positions before the first full regressor echo the seed.
std::vector<double> narx_predict(const NarxModel& m, const Eigen::MatrixXd& u,
                                 const std::vector<double>& y_init);

/// LDA projection to one dimension followed by a quadratic polynomial map
/// onto the continuous force.
struct LdaQpfModel {
  Eigen::VectorXd W;                  // unit-norm projection, sign-aligned with force
  std::array<double, 3> poly = {0, 0, 0};  // c0 + c1 z + c2 z^2
  int levels = 3;
  double fit_sse = 0.0;
  std::vector<std::string> warnings;
};

/// Fisher discriminant direction for classes formed by quantizing the force
/// into `levels` equal-width bins over [0, 1]. Classes with fewer than two
/// members are merged into their nearest neighbor. The returned vector has
/// unit norm and projects with positive force correlation.
Eigen::VectorXd lda_fit(const FeatureMatrix& fm, int levels,
                        std::vector<std::string>* warnings = nullptr);

struct QpfFit {
  std::array<double, 3> coeffs = {0, 0, 0};
  double sse = 0.0;
};

/// Least-squares quadratic y ~= c0 + c1 z + c2 z^2; a rank-deficient design
/// (constant z) degenerates to the mean with a warning.
QpfFit qpf_fit(const std::vector<double>& z, const std::vector<double>& y,
               std::vector<std::string>* warnings = nullptr);

LdaQpfModel ldaqpf_train(const FeatureMatrix& fm, int levels = 3);

/// poly(W^T u), clamped to [0, 1] for reporting.
double ldaqpf_predict(const LdaQpfModel& m, const Eigen::VectorXd& u_row);

}  // namespace gfe::baselines
