#include "gfe/synth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace gfe::synth {

namespace {

/// Monic polynomial coefficients from complex roots (real result expected):
/// prod (q - r_k) = q^n + c[0] q^(n-1) + ... + c[n-1].
std::vector<double> poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> coeff = {1.0};
  for (const auto& r : roots) {
    coeff.push_back(0.0);
    for (std::size_t k = coeff.size() - 1; k > 0; --k) {
      coeff[k] -= r * coeff[k - 1];
    }
  }
  std::vector<double> real_coeff(coeff.size() - 1);
  for (std::size_t k = 1; k < coeff.size(); ++k) real_coeff[k - 1] = coeff[k].real();
  return real_coeff;
}

/// Similarity transform from the shifted-output basis [y(k) .. y(k-n+1)] to
/// the backward-difference basis [y, dy/ts, ...]; row m holds the binomial
/// divided-difference weights over ts^m.
Eigen::MatrixXd difference_basis(int order, double ts) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(order, order);
  for (int m = 0; m < order; ++m) {
    double binom = 1.0;
    const double scale = std::pow(ts, -m);
    for (int r = 0; r <= m; ++r) {
      t(m, r) = scale * (r % 2 == 0 ? binom : -binom);
      binom = binom * (m - r) / (r + 1);
    }
  }
  return t;
}

}  // namespace

ssid::StateSpaceModel gen_lti(int order, int inputs, double spectral_radius_max,
                              std::uint64_t seed, const GenLtiOptions& opt) {
  if (order < 1 || inputs < 1) throw std::invalid_argument("gen_lti: order and inputs must be >= 1");
  if (!(spectral_radius_max > 0.0 && spectral_radius_max < 1.0)) {
    throw std::invalid_argument("gen_lti: spectral radius bound must lie in (0, 1)");
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> modulus(0.0, spectral_radius_max);
  std::uniform_real_distribution<double> angle(0.05, std::numbers::pi - 0.05);
  std::bernoulli_distribution pick_pair(0.5);

  std::vector<std::complex<double>> poles;
  while (static_cast<int>(poles.size()) < order) {
    const int remaining = order - static_cast<int>(poles.size());
    if (remaining >= 2 && pick_pair(rng)) {
      const double r = modulus(rng);
      const double a = angle(rng);
      poles.emplace_back(r * std::cos(a), r * std::sin(a));
      poles.emplace_back(r * std::cos(a), -r * std::sin(a));
    } else {
      poles.emplace_back(modulus(rng) * (pick_pair(rng) ? 1.0 : -1.0), 0.0);
    }
  }

  // Companion realization of y(k) = sum a_r y(k-r) + b^T u(k-1), then a
  // similarity into the backward-difference basis.
  const std::vector<double> char_poly = poly_from_roots(poles);
  Eigen::MatrixXd a_comp = Eigen::MatrixXd::Zero(order, order);
  for (int r = 0; r < order; ++r) a_comp(0, r) = -char_poly[r];
  for (int r = 1; r < order; ++r) a_comp(r, r - 1) = 1.0;

  Eigen::MatrixXd b_comp = Eigen::MatrixXd::Zero(order, inputs);
  for (int c = 0; c < inputs; ++c) b_comp(0, c) = unit(rng);

  const Eigen::MatrixXd t = difference_basis(order, opt.ts_s);
  const Eigen::MatrixXd t_inv = t.inverse();

  ssid::StateSpaceModel model;
  model.n = order;
  model.i = inputs;
  model.j = 1;
  model.ts_s = opt.ts_s;
  model.A = t * a_comp * t_inv;
  model.B = t * b_comp;
  model.Gamma = Eigen::MatrixXd::Zero(order, order);
  if (opt.random_gamma) {
    for (int r = 0; r < order; ++r) {
      for (int c = 0; c < order; ++c) model.Gamma(r, c) = opt.gamma_scale * unit(rng);
    }
  }
  model.C = ssid::StateSpaceModel::output_matrix(order);
  return model;
}

void SynthSessionSpec::validate() const {
  if (!(duration_s > 0.0) || !(sample_rate_hz > 0.0)) {
    throw std::invalid_argument("gen_session: duration and sample rate must be positive");
  }
  for (double level : plateau_mvc) {
    if (!(level >= 0.0 && level <= 1.0)) {
      throw std::invalid_argument("gen_session: plateau levels must lie in [0, 1]");
    }
  }
  if (repetitions < 1) throw std::invalid_argument("gen_session: repetitions must be >= 1");
  if (channels < 1) throw std::invalid_argument("gen_session: need at least one channel");
  if (!(plateau_s > 0.0) || !(rest_s >= 0.0) || !(ramp_s >= 0.0)) {
    throw std::invalid_argument("gen_session: segment durations must be non-negative");
  }
  if (crosstalk.size() != 0 &&
      (crosstalk.rows() != channels || crosstalk.cols() != channels || crosstalk.minCoeff() < 0.0)) {
    throw std::invalid_argument("gen_session: crosstalk must be channels x channels, non-negative");
  }
  if (channel_gain.size() != 0 && channel_gain.size() != channels) {
    throw std::invalid_argument("gen_session: channel gain length must match channel count");
  }
  if (emg_noise_floor < 0.0 || force_noise_sd < 0.0) {
    throw std::invalid_argument("gen_session: noise levels must be non-negative");
  }
}

std::vector<double> force_profile(const SynthSessionSpec& spec) {
  spec.validate();
  const long n = std::lround(spec.duration_s * spec.sample_rate_hz);

  // Segment plan: rest | ramp hold ramp | rest | ... scaled to the duration.
  struct Segment {
    double len;
    double from, to;  // level at segment start/end; ramps interpolate
  };
  std::vector<Segment> plan;
  plan.push_back({spec.rest_s, 0.0, 0.0});
  for (int rep = 0; rep < spec.repetitions; ++rep) {
    for (double level : spec.plateau_mvc) {
      plan.push_back({spec.ramp_s, 0.0, level});
      plan.push_back({spec.plateau_s, level, level});
      plan.push_back({spec.ramp_s, level, 0.0});
      plan.push_back({spec.rest_s, 0.0, 0.0});
    }
  }
  double total = 0.0;
  for (const auto& s : plan) total += s.len;
  const double scale = spec.duration_s / total;

  std::vector<double> profile(n);
  double seg_start = 0.0;
  std::size_t seg = 0;
  for (long k = 0; k < n; ++k) {
    const double t = k / spec.sample_rate_hz;
    while (seg + 1 < plan.size() && t >= seg_start + plan[seg].len * scale) {
      seg_start += plan[seg].len * scale;
      ++seg;
    }
    const Segment& s = plan[seg];
    const double seg_len = s.len * scale;
    const double local = seg_len > 0.0 ? std::clamp((t - seg_start) / seg_len, 0.0, 1.0) : 1.0;
    // Cosine ramp keeps the profile C1-smooth at the plateau joints.
    const double blend = 0.5 * (1.0 - std::cos(std::numbers::pi * local));
    profile[k] = s.from + (s.to - s.from) * blend;
  }
  return profile;
}

SessionRecording gen_session(const SynthSessionSpec& spec) {
  spec.validate();
  const std::vector<double> profile = force_profile(spec);
  const long n = static_cast<long>(profile.size());

  Eigen::VectorXd gain = spec.channel_gain;
  if (gain.size() == 0) {
    gain = Eigen::VectorXd::Constant(spec.channels, 0.2);
    // The flexor channels (6..8) respond strongly to grip force.
    if (spec.channels >= 6) gain(5) = 1.0;
    if (spec.channels >= 7) gain(6) = 0.85;
    if (spec.channels >= 8) gain(7) = 0.9;
  }
  Eigen::MatrixXd mix = spec.crosstalk;
  if (mix.size() == 0) {
    mix = Eigen::MatrixXd::Identity(spec.channels, spec.channels);
    for (int c = 0; c + 1 < spec.channels; ++c) {
      mix(c, c + 1) = 0.15;
      mix(c + 1, c) = 0.15;
    }
    for (int c = 0; c < spec.channels; ++c) mix.row(c) /= mix.row(c).sum();
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SessionRecording rec;
  rec.sample_rate_hz = spec.sample_rate_hz;
  rec.channel_labels = SessionRecording::default_channel_labels(spec.channels);
  rec.emg.assign(spec.channels, std::vector<double>(n));
  rec.force.resize(n);

  Eigen::VectorXd raw(spec.channels);
  for (long k = 0; k < n; ++k) {
    for (int c = 0; c < spec.channels; ++c) {
      const double amplitude = gain(c) * profile[k] + spec.emg_noise_floor;
      raw(c) = amplitude * gauss(rng);
    }
    const Eigen::VectorXd mixed = mix * raw;
    for (int c = 0; c < spec.channels; ++c) rec.emg[c][k] = mixed(c);
    const double noise = spec.force_noise_sd > 0.0 ? spec.force_noise_sd * gauss(rng) : 0.0;
    rec.force[k] = std::clamp(profile[k] + noise, 0.0, 1.0);
  }
  return rec;
}

Eigen::MatrixXd batch_ls(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& targets) {
  if (regressors.rows() != targets.rows()) {
    throw std::invalid_argument("batch_ls: row counts differ");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(regressors);
  if (qr.rank() < regressors.cols()) {
    std::string cols;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < regressors.cols(); ++k) {
      if (!cols.empty()) cols += ", ";
      cols += std::to_string(perm(k));
    }
    throw std::invalid_argument("batch_ls: regressor matrix is rank deficient (columns " + cols +
                                ")");
  }
  return qr.solve(targets);
}

Eigen::MatrixXd batch_ls(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& targets,
                         const Eigen::MatrixXd& theta0, double p0_scale) {
  if (regressors.rows() != targets.rows()) {
    throw std::invalid_argument("batch_ls: row counts differ");
  }
  if (theta0.rows() != regressors.cols() || theta0.cols() != targets.cols()) {
    throw std::invalid_argument("batch_ls: prior shape must match the parameter matrix");
  }
  if (!(p0_scale > 0.0)) throw std::invalid_argument("batch_ls: p0_scale must be positive");

  const double prior_weight = 1.0 / std::sqrt(p0_scale);
  Eigen::MatrixXd augmented(regressors.rows() + regressors.cols(), regressors.cols());
  augmented.topRows(regressors.rows()) = regressors;
  augmented.bottomRows(regressors.cols()) =
      prior_weight * Eigen::MatrixXd::Identity(regressors.cols(), regressors.cols());

  Eigen::MatrixXd rhs(targets.rows() + theta0.rows(), targets.cols());
  rhs.topRows(targets.rows()) = targets;
  rhs.bottomRows(theta0.rows()) = prior_weight * theta0;

  return augmented.householderQr().solve(rhs);
}

}  // namespace gfe::synth
