#pragma once

#include <optional>
#include <string>

#include "gfe/kalman.hpp"
#include "gfe/ssid.hpp"
#include "gfe/types.hpp"

namespace gfe::model_io {

/// Everything needed to reload a trained estimator and reproduce its outputs
/// bit-identically: the identified matrices, the feature configuration that
/// produced its inputs and the tuned filter.
struct ModelDocument {
  ssid::StateSpaceModel model;
  double theta0 = 0.3;
  double p0_scale = 1e3;

  WindowSpec window;
  std::vector<int> channels;          // 1-based
  std::vector<Feature> features;
  std::vector<NormRange> norm_ranges;

  bool kf_enabled = true;
  std::optional<kalman::KalmanEstimator> kf;

  std::optional<ssid::OrderSelection> order_selection;
  std::string config_hash;
};

std::string to_json(const ModelDocument& doc);
ModelDocument from_json(const std::string& json_text);

void save(const std::string& path, const ModelDocument& doc);
ModelDocument load(const std::string& path);

}  // namespace gfe::model_io
