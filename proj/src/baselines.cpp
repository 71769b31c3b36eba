#include "gfe/baselines.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gfe/errors.hpp"

namespace gfe::baselines {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::VectorXd with_bias(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(v.size() + 1);
  out(0) = 1.0;
  out.tail(v.size()) = v;
  return out;
}

}  // namespace

MlpModel mlp_train_raw(const Eigen::MatrixXd& x, const std::vector<double>& y,
                       const TrainConfig& cfg) {
  if (x.rows() != static_cast<long>(y.size())) {
    throw std::invalid_argument("mlp_train: sample and target counts differ");
  }
  if (x.rows() == 0) throw std::invalid_argument("mlp_train: empty training set");
  if (cfg.hidden < 1) throw std::invalid_argument("mlp_train: need at least one hidden neuron");
  if (cfg.epochs < 0) throw std::invalid_argument("mlp_train: negative epoch count");

  const int inputs = static_cast<int>(x.cols());
  MlpModel m;
  m.inputs = inputs;
  m.hidden = cfg.hidden;
  m.cfg = cfg;

  std::mt19937_64 rng(cfg.seed);
  const double limit1 = std::sqrt(6.0 / (inputs + cfg.hidden));
  const double limit2 = std::sqrt(6.0 / (cfg.hidden + 1));
  std::uniform_real_distribution<double> init1(-limit1, limit1);
  std::uniform_real_distribution<double> init2(-limit2, limit2);

  m.w1.resize(cfg.hidden, inputs + 1);
  for (int r = 0; r < cfg.hidden; ++r) {
    for (int c = 0; c <= inputs; ++c) m.w1(r, c) = init1(rng);
  }
  m.w2.resize(cfg.hidden + 1);
  for (int r = 0; r <= cfg.hidden; ++r) m.w2(r) = init2(rng);

  Eigen::MatrixXd cache_w1 = Eigen::MatrixXd::Zero(cfg.hidden, inputs + 1);
  Eigen::VectorXd cache_w2 = Eigen::VectorXd::Zero(cfg.hidden + 1);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    double sse = 0.0;
    for (long k = 0; k < x.rows(); ++k) {
      const Eigen::VectorXd in = with_bias(x.row(k).transpose());
      const Eigen::VectorXd pre = m.w1 * in;
      Eigen::VectorXd hidden_out(cfg.hidden);
      for (int h = 0; h < cfg.hidden; ++h) hidden_out(h) = sigmoid(pre(h));
      const Eigen::VectorXd hidden_b = with_bias(hidden_out);
      const double out = m.w2.dot(hidden_b);

      const double err = out - y[k];
      sse += err * err;

      // Squared-error gradients through the linear output and sigmoid hidden.
      const Eigen::VectorXd grad_w2 = 2.0 * err * hidden_b;
      Eigen::VectorXd grad_hidden = 2.0 * err * m.w2.tail(cfg.hidden);
      for (int h = 0; h < cfg.hidden; ++h) {
        grad_hidden(h) *= hidden_out(h) * (1.0 - hidden_out(h));
      }
      const Eigen::MatrixXd grad_w1 = grad_hidden * in.transpose();

      cache_w2 = cfg.rmsprop_decay * cache_w2 +
                 (1.0 - cfg.rmsprop_decay) * grad_w2.array().square().matrix();
      m.w2 -= (cfg.learning_rate * grad_w2.array() /
               (cache_w2.array().sqrt() + cfg.rmsprop_epsilon))
                  .matrix();

      cache_w1 = cfg.rmsprop_decay * cache_w1 +
                 (1.0 - cfg.rmsprop_decay) * grad_w1.array().square().matrix();
      m.w1 -= (cfg.learning_rate * grad_w1.array() /
               (cache_w1.array().sqrt() + cfg.rmsprop_epsilon))
                  .matrix();
    }
    m.final_mse = sse / static_cast<double>(x.rows());
    if (!std::isfinite(m.final_mse)) {
      throw NumericalFailure("mlp_train: loss diverged", epoch + 1);
    }
  }
  return m;
}

MlpModel mlp_train(const FeatureMatrix& fm, const TrainConfig& cfg) {
  return mlp_train_raw(fm.u, fm.y, cfg);
}

double mlp_predict(const MlpModel& m, const Eigen::VectorXd& u_row) {
  if (u_row.size() != m.inputs) {
    throw std::invalid_argument("mlp_predict: input width " + std::to_string(u_row.size()) +
                                " does not match model width " + std::to_string(m.inputs));
  }
  const Eigen::VectorXd pre = m.w1 * with_bias(u_row);
  Eigen::VectorXd hidden(m.hidden);
  for (int h = 0; h < m.hidden; ++h) hidden(h) = sigmoid(pre(h));
  return m.w2.dot(with_bias(hidden));
}

namespace {

/// Lagged NARX regressor [u(k) .. u(k-n_u), y(k-1) .. y(k-n_y)] where the
/// past outputs come through `past_output` (measured or fed back).
template <typename PastOutput>
Eigen::VectorXd narx_regressor(const Eigen::MatrixXd& u, long k, int n_u, int n_y,
                               PastOutput&& past_output) {
  const int i = static_cast<int>(u.cols());
  Eigen::VectorXd row(static_cast<long>(i) * (n_u + 1) + n_y);
  long pos = 0;
  for (int lag = 0; lag <= n_u; ++lag) {
    row.segment(pos, i) = u.row(k - lag).transpose();
    pos += i;
  }
  for (int lag = 1; lag <= n_y; ++lag) row(pos++) = past_output(k - lag);
  return row;
}

}  // namespace

NarxModel narx_train(const FeatureMatrix& fm, const NarxConfig& cfg) {
  if (cfg.input_memory < 0 || cfg.output_memory < 0) {
    throw std::invalid_argument("narx_train: memory lengths must be non-negative");
  }
  const long rows = fm.rows();
  const long k0 = std::max(cfg.input_memory, cfg.output_memory);
  if (rows <= k0) {
    throw std::invalid_argument("narx_train: need more rows than the longest memory");
  }

  const int i = static_cast<int>(fm.cols());
  const long width = static_cast<long>(i) * (cfg.input_memory + 1) + cfg.output_memory;
  Eigen::MatrixXd x(rows - k0, width);
  std::vector<double> targets(rows - k0);
  for (long k = k0; k < rows; ++k) {
    x.row(k - k0) = narx_regressor(fm.u, k, cfg.input_memory, cfg.output_memory,
                                   [&](long idx) { return fm.y[idx]; });
    targets[k - k0] = fm.y[k];
  }

  NarxModel m;
  m.inner = mlp_train_raw(x, targets, cfg.train);
  m.input_memory = cfg.input_memory;
  m.output_memory = cfg.output_memory;
  m.base_inputs = i;
  return m;
}

std::vector<double> narx_predict(const NarxModel& m, const Eigen::MatrixXd& u,
                                 const std::vector<double>& y_init) {
  if (u.cols() != m.base_inputs) {
    throw std::invalid_argument("narx_predict: input width does not match the trained model");
  }
  if (static_cast<int>(y_init.size()) < m.output_memory) {
    throw std::invalid_argument("narx_predict: need " + std::to_string(m.output_memory) +
                                " seed values, got " + std::to_string(y_init.size()));
  }

  const long rows = u.rows();
  const long k0 = std::max(m.input_memory, m.output_memory);
  std::vector<double> out(rows);
  for (long k = 0; k < std::min(k0, rows); ++k) {
    out[k] = m.output_memory > 0
                 ? y_init[std::min<std::size_t>(k, m.output_memory - 1)]
                 : 0.0;
  }
  for (long k = k0; k < rows; ++k) {
    const Eigen::VectorXd row = narx_regressor(u, k, m.input_memory, m.output_memory,
                                               [&](long idx) { return out[idx]; });
    out[k] = mlp_predict(m.inner, row);
  }
  return out;
}

Eigen::VectorXd lda_fit(const FeatureMatrix& fm, int levels, std::vector<std::string>* warnings) {
  if (levels < 2) throw std::invalid_argument("lda_fit: need at least two class levels");
  const long rows = fm.rows();
  const long dims = fm.cols();
  if (rows < 2) throw std::invalid_argument("lda_fit: need at least two samples");

  auto warn = [&](const std::string& msg) {
    if (warnings != nullptr) warnings->push_back(msg);
  };

  // Equal-width force quantization over [0, 1].
  std::vector<int> assignment(rows);
  for (long k = 0; k < rows; ++k) {
    const int bin = static_cast<int>(fm.y[k] * levels);
    assignment[k] = std::clamp(bin, 0, levels - 1);
  }
  std::vector<long> counts(levels, 0);
  for (int a : assignment) ++counts[a];

  // Merge classes with fewer than two members into the nearest populated bin.
  for (int c = 0; c < levels; ++c) {
    if (counts[c] == 0 || counts[c] >= 2) continue;
    int best = -1;
    for (int other = 0; other < levels; ++other) {
      if (other == c || counts[other] < 2) continue;
      if (best < 0 || std::abs(other - c) < std::abs(best - c)) best = other;
    }
    if (best < 0) continue;  // nothing to merge into; rejected below if fatal
    warn("lda_fit: class " + std::to_string(c) + " has fewer than two members; merged into class " +
         std::to_string(best));
    for (long k = 0; k < rows; ++k) {
      if (assignment[k] == c) assignment[k] = best;
    }
    counts[best] += counts[c];
    counts[c] = 0;
  }

  std::vector<int> active;
  for (int c = 0; c < levels; ++c) {
    if (counts[c] >= 2) active.push_back(c);
  }
  if (active.size() < 2) {
    throw std::invalid_argument("lda_fit: fewer than two usable classes after force quantization");
  }

  const Eigen::VectorXd total_mean = fm.u.colwise().mean().transpose();
  Eigen::MatrixXd s_within = Eigen::MatrixXd::Zero(dims, dims);
  Eigen::MatrixXd s_between = Eigen::MatrixXd::Zero(dims, dims);
  for (int c : active) {
    Eigen::VectorXd class_mean = Eigen::VectorXd::Zero(dims);
    for (long k = 0; k < rows; ++k) {
      if (assignment[k] == c) class_mean += fm.u.row(k).transpose();
    }
    class_mean /= static_cast<double>(counts[c]);
    for (long k = 0; k < rows; ++k) {
      if (assignment[k] != c) continue;
      const Eigen::VectorXd d = fm.u.row(k).transpose() - class_mean;
      s_within += d * d.transpose();
    }
    const Eigen::VectorXd d = class_mean - total_mean;
    s_between += static_cast<double>(counts[c]) * d * d.transpose();
  }

  Eigen::LLT<Eigen::MatrixXd> llt(s_within);
  if (llt.info() != Eigen::Success) {
    warn("lda_fit: singular within-class scatter; regularized with 1e-6 I");
    s_within += 1e-6 * Eigen::MatrixXd::Identity(dims, dims);
  }

  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(s_between, s_within);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("lda_fit: generalized eigensolver failed");
  }
  Eigen::VectorXd w = solver.eigenvectors().col(dims - 1);  // largest eigenvalue
  w.normalize();

  // Align the projection with increasing force.
  double cov = 0.0;
  const double y_mean = std::accumulate(fm.y.begin(), fm.y.end(), 0.0) / rows;
  for (long k = 0; k < rows; ++k) {
    cov += (fm.u.row(k) * w - total_mean.dot(w)) * (fm.y[k] - y_mean);
  }
  if (cov < 0.0) w = -w;
  return w;
}

QpfFit qpf_fit(const std::vector<double>& z, const std::vector<double>& y,
               std::vector<std::string>* warnings) {
  if (z.size() != y.size()) throw std::invalid_argument("qpf_fit: sequence lengths differ");
  if (z.size() < 3) throw std::invalid_argument("qpf_fit: need at least three samples");

  const long rows = static_cast<long>(z.size());
  Eigen::MatrixXd design(rows, 3);
  Eigen::VectorXd target(rows);
  for (long k = 0; k < rows; ++k) {
    design(k, 0) = 1.0;
    design(k, 1) = z[k];
    design(k, 2) = z[k] * z[k];
    target(k) = y[k];
  }

  QpfFit fit;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < 3) {
    if (warnings != nullptr) {
      warnings->push_back("qpf_fit: rank-deficient design (constant projection); using mean fit");
    }
    fit.coeffs = {target.mean(), 0.0, 0.0};
  } else {
    const Eigen::VectorXd c = qr.solve(target);
    fit.coeffs = {c(0), c(1), c(2)};
  }
  const Eigen::VectorXd residual =
      target - design * Eigen::Vector3d(fit.coeffs[0], fit.coeffs[1], fit.coeffs[2]);
  fit.sse = residual.squaredNorm();
  return fit;
}

LdaQpfModel ldaqpf_train(const FeatureMatrix& fm, int levels) {
  LdaQpfModel m;
  m.levels = levels;
  m.W = lda_fit(fm, levels, &m.warnings);
  std::vector<double> z(fm.rows());
  for (long k = 0; k < fm.rows(); ++k) z[k] = fm.u.row(k) * m.W;
  const QpfFit fit = qpf_fit(z, fm.y, &m.warnings);
  m.poly = fit.coeffs;
  m.fit_sse = fit.sse;
  return m;
}

double ldaqpf_predict(const LdaQpfModel& m, const Eigen::VectorXd& u_row) {
  if (u_row.size() != m.W.size()) {
    throw std::invalid_argument("ldaqpf_predict: input width does not match projection");
  }
  const double z = m.W.dot(u_row);
  const double raw = m.poly[0] + m.poly[1] * z + m.poly[2] * z * z;
  return std::clamp(raw, 0.0, 1.0);
}

}  // namespace gfe::baselines
