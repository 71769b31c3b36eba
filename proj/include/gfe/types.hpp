#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace gfe {

/// Time-aligned multichannel sEMG plus the measured grasping force.
/// Force is stored as a fraction of the maximum voluntary contraction (MVC),
/// so every force sample lies in [0, 1].
struct SessionRecording {
  double sample_rate_hz = 200.0;
  std::vector<std::vector<double>> emg;  // one sample sequence per channel
  std::vector<double> force;             // MVC fraction per sample
  std::vector<std::string> channel_labels;

  std::size_t samples() const { return force.size(); }
  std::size_t channels() const { return emg.size(); }

  /// Checks equal channel/force lengths, positive sample rate and force range.
  /// Throws std::invalid_argument on violation.
  void validate() const;

  /// Forearm muscle names in electrode order (channels 1..8).
  static std::vector<std::string> default_channel_labels(std::size_t channels);
};

/// Sliding analysis window: 400 ms length with a 125 ms increment by default.
struct WindowSpec {
  double length_ms = 400.0;
  double increment_ms = 125.0;

  int length_samples(double sample_rate_hz) const;
  int increment_samples(double sample_rate_hz) const;

  /// Throws std::invalid_argument unless 0 < increment <= length and the
  /// window holds at least two samples at the given rate.
  void validate(double sample_rate_hz) const;
};

enum class Feature { Mav, Rms, Wl };

const char* feature_name(Feature f);
Feature feature_from_name(const std::string& name);  // throws std::invalid_argument

/// Column identity inside a FeatureMatrix. `channel` is 1-based and matches
/// the emgN columns of the session CSV format.
struct FeatureColumn {
  int channel = 0;
  Feature feature = Feature::Mav;

  std::string label() const;  // e.g. "emg6_mav"
};

/// Per-column min/max used for affine [0,1] normalization.
struct NormRange {
  double min = 0.0;
  double max = 0.0;

  bool degenerate() const { return !(max > min); }
};

/// Windowed feature rows (the model input u) aligned with the windowed force
/// target (the model output y). Columns are ordered channel-major with
/// features in (MAV, RMS, WL) order inside each channel.
struct FeatureMatrix {
  Eigen::MatrixXd u;                 // windows x (channels * features)
  std::vector<double> y;             // mean force per window
  std::vector<FeatureColumn> layout; // column labels, size == u.cols()
  std::vector<NormRange> norm_ranges;     // empty until normalized
  std::vector<std::string> norm_warnings; // degenerate-column notes
  double ts_s = 0.125;               // seconds between consecutive rows

  Eigen::Index rows() const { return u.rows(); }
  Eigen::Index cols() const { return u.cols(); }
  bool normalized() const { return !norm_ranges.empty(); }
};

}  // namespace gfe
