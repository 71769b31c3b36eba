#include "gfe/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gfe/errors.hpp"

namespace gfe {

void SessionRecording::validate() const {
  if (sample_rate_hz <= 0.0) {
    throw std::invalid_argument("sample rate must be positive");
  }
  if (emg.empty()) {
    throw std::invalid_argument("recording has no sEMG channels");
  }
  for (std::size_t c = 0; c < emg.size(); ++c) {
    if (emg[c].size() != force.size()) {
      throw std::invalid_argument("channel " + std::to_string(c + 1) +
                                  " length differs from force length");
    }
  }
  for (double f : force) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw std::invalid_argument("force sample outside [0,1]; normalize by MVC first");
    }
  }
}

std::vector<std::string> SessionRecording::default_channel_labels(std::size_t channels) {
  static const std::vector<std::string> kMuscles = {
      "pronator_teres",        "brachioradialis",  "extensor_carpi_radialis",
      "extensor_digitorum",    "extensor_carpi_ulnaris",
      "flexor_carpi_ulnaris",  "palmaris_longus",  "flexor_carpi_radialis"};
  std::vector<std::string> labels;
  labels.reserve(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    labels.push_back(c < kMuscles.size() ? kMuscles[c] : "emg" + std::to_string(c + 1));
  }
  return labels;
}

int WindowSpec::length_samples(double sample_rate_hz) const {
  return static_cast<int>(std::llround(length_ms * sample_rate_hz / 1000.0));
}

int WindowSpec::increment_samples(double sample_rate_hz) const {
  return static_cast<int>(std::llround(increment_ms * sample_rate_hz / 1000.0));
}

void WindowSpec::validate(double sample_rate_hz) const {
  if (!(increment_ms > 0.0) || increment_ms > length_ms) {
    throw std::invalid_argument("window increment must satisfy 0 < increment <= length");
  }
  if (length_samples(sample_rate_hz) < 2) {
    throw std::invalid_argument("window must span at least two samples");
  }
  if (increment_samples(sample_rate_hz) < 1) {
    throw std::invalid_argument("window increment is below one sample");
  }
}

const char* feature_name(Feature f) {
  switch (f) {
    case Feature::Mav: return "mav";
    case Feature::Rms: return "rms";
    case Feature::Wl: return "wl";
  }
  return "?";
}

Feature feature_from_name(const std::string& name) {
  if (name == "mav") return Feature::Mav;
  if (name == "rms") return Feature::Rms;
  if (name == "wl") return Feature::Wl;
  throw std::invalid_argument("unknown feature '" + name + "' (expected mav, rms or wl)");
}

std::string FeatureColumn::label() const {
  return "emg" + std::to_string(channel) + "_" + feature_name(feature);
}

namespace features {

double mav(std::span<const double> window) {
  if (window.empty()) throw std::invalid_argument("mav: empty window");
  double acc = 0.0;
  for (double x : window) acc += std::abs(x);
  return acc / static_cast<double>(window.size());
}

double rms(std::span<const double> window) {
  if (window.empty()) throw std::invalid_argument("rms: empty window");
  double acc = 0.0;
  for (double x : window) acc += x * x;
  return std::sqrt(acc / static_cast<double>(window.size()));
}

double wl(std::span<const double> window) {
  if (window.size() < 2) throw std::invalid_argument("wl: window needs at least two samples");
  double acc = 0.0;
  for (std::size_t k = 1; k < window.size(); ++k) {
    acc += std::abs(window[k] - window[k - 1]);
  }
  return acc;
}

double compute_feature(Feature f, std::span<const double> window) {
  switch (f) {
    case Feature::Mav: return mav(window);
    case Feature::Rms: return rms(window);
    case Feature::Wl: return wl(window);
  }
  throw std::invalid_argument("unknown feature");
}

FeatureMatrix extract_features(const SessionRecording& rec, const WindowSpec& spec,
                               std::vector<int> channels, std::vector<Feature> features) {
  rec.validate();
  spec.validate(rec.sample_rate_hz);
  if (channels.empty()) channels = {6, 7, 8};
  if (features.empty()) throw std::invalid_argument("feature set must not be empty");
  for (int ch : channels) {
    if (ch < 1 || static_cast<std::size_t>(ch) > rec.channels()) {
      throw std::invalid_argument("channel " + std::to_string(ch) + " out of range (recording has " +
                                  std::to_string(rec.channels()) + " channels)");
    }
  }

  const int len = spec.length_samples(rec.sample_rate_hz);
  const int inc = spec.increment_samples(rec.sample_rate_hz);
  const long n_samples = static_cast<long>(rec.samples());
  if (n_samples < len) {
    throw std::invalid_argument("recording shorter than one window (" +
                                std::to_string(n_samples) + " < " + std::to_string(len) +
                                " samples)");
  }
  const long n_windows = (n_samples - len) / inc + 1;

  FeatureMatrix fm;
  fm.ts_s = spec.increment_ms / 1000.0;
  fm.u.resize(n_windows, static_cast<long>(channels.size() * features.size()));
  fm.y.resize(n_windows);
  for (int ch : channels) {
    for (Feature f : features) fm.layout.push_back({ch, f});
  }

  for (long w = 0; w < n_windows; ++w) {
    const long start = w * inc;
    long col = 0;
    for (int ch : channels) {
      std::span<const double> window(rec.emg[ch - 1].data() + start, static_cast<std::size_t>(len));
      for (Feature f : features) {
        fm.u(w, col++) = compute_feature(f, window);
      }
    }
    double force_acc = 0.0;
    for (long k = start; k < start + len; ++k) force_acc += rec.force[k];
    fm.y[w] = force_acc / len;
  }
  return fm;
}

std::vector<NormRange> fit_norm_ranges(const Eigen::MatrixXd& u) {
  std::vector<NormRange> ranges(u.cols());
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    ranges[c] = {u.col(c).minCoeff(), u.col(c).maxCoeff()};
  }
  return ranges;
}

FeatureMatrix apply_norm_ranges(const FeatureMatrix& m, const std::vector<NormRange>& ranges) {
  if (static_cast<Eigen::Index>(ranges.size()) != m.cols()) {
    throw std::invalid_argument("norm range count does not match column count");
  }
  FeatureMatrix out = m;
  out.norm_ranges = ranges;
  out.norm_warnings.clear();
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const NormRange& r = ranges[c];
    if (r.degenerate()) {
      out.u.col(c).setZero();
      std::string label = c < static_cast<Eigen::Index>(m.layout.size())
                              ? m.layout[c].label()
                              : "column " + std::to_string(c);
      out.norm_warnings.push_back("degenerate channel: " + label +
                                  " is constant and was mapped to 0");
    } else {
      out.u.col(c) = (m.u.col(c).array() - r.min) / (r.max - r.min);
    }
  }
  return out;
}

FeatureMatrix normalize(const FeatureMatrix& m) {
  return apply_norm_ranges(m, fit_norm_ranges(m.u));
}

}  // namespace features
}  // namespace gfe
