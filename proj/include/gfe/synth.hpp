#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <vector>

#include "gfe/ssid.hpp"
#include "gfe/types.hpp"

namespace gfe::synth {

struct GenLtiOptions {
  double ts_s = 0.125;
  bool random_gamma = false;   // Gamma = 0 unless set
  double gamma_scale = 0.1;
};

/// Random stable LTI system with poles drawn inside the disk of radius
/// `spectral_radius_max` and C = [1 0 ... 0]. The realization is built in the
/// backward-difference state basis (states y, dy/ts, d2y/ts^2, ...), so the
/// state trajectory reconstructed from the simulated output matches the
/// generator's internal states exactly when the simulation starts from rest.
/// That makes these systems exact oracles for the identification recursion.
ssid::StateSpaceModel gen_lti(int order, int inputs, double spectral_radius_max,
                              std::uint64_t seed, const GenLtiOptions& opt = {});

/// Synthetic grasp session: a smooth force profile holding three plateau
/// levels (repeated `repetitions` times) drives amplitude-modulated wideband
/// noise per sEMG channel, mixed through a crosstalk matrix.
struct SynthSessionSpec {
  double duration_s = 60.0;
  double sample_rate_hz = 200.0;
  std::array<double, 3> plateau_mvc = {0.3, 0.6, 0.9};
  int repetitions = 2;        // three-squeeze pattern repeats, so both data
                              // halves of a 50/50 split see every force level
  double plateau_s = 5.0;     // per-squeeze hold (scaled to fit duration)
  double rest_s = 2.5;        // rest between squeezes (scaled)
  double ramp_s = 1.0;        // rise/fall time (scaled)
  int channels = 8;
  Eigen::VectorXd channel_gain;   // force-to-amplitude gain; default favors
                                  // the flexor channels 6..8
  Eigen::MatrixXd crosstalk;      // channels x channels mixing, rows >= 0
  double emg_noise_floor = 0.02;  // amplitude at zero force
  double force_noise_sd = 0.01;   // measurement noise on the force channel
  std::uint64_t seed = 1;

  void validate() const;
};

SessionRecording gen_session(const SynthSessionSpec& spec);

/// The noise-free force profile used by gen_session (exposed for tests).
std::vector<double> force_profile(const SynthSessionSpec& spec);

/// Least-squares solve of regressors * theta ~= targets through a
/// column-pivoting QR factorization. Throws when the regressor matrix is
/// column-rank deficient, naming the deficient columns.
Eigen::MatrixXd batch_ls(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& targets);

/// Prior-regularized form: minimizes
///   sum ||x(k) - phi(k)^T theta||^2 + (1/p0_scale) ||theta - theta0||^2
/// via rows appended to the QR system. This is the batch problem the
/// recursive estimator solves exactly when started from (theta0, p0_scale I),
/// which makes the two implementations directly comparable on any data.
Eigen::MatrixXd batch_ls(const Eigen::MatrixXd& regressors, const Eigen::MatrixXd& targets,
                         const Eigen::MatrixXd& theta0, double p0_scale);

}  // namespace gfe::synth
