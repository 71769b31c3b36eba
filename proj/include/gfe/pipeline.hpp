#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gfe/baselines.hpp"
#include "gfe/kalman.hpp"
#include "gfe/metrics.hpp"
#include "gfe/model_io.hpp"
#include "gfe/ssid.hpp"
#include "gfe/synth.hpp"
#include "gfe/types.hpp"

namespace gfe::pipeline {

/// Full pipeline configuration. The defaults are the reference operating
/// point: 400/125 ms windows at 200 Hz, flexor channels 6-8 with MAV/RMS/WL,
/// a fourth-order model identified with theta0 = 0.3 and P0 = 1e3 I, a
/// minimum-variance Kalman filter and a temporal 50/50 data split.
struct PipelineConfig {
  WindowSpec window;
  std::vector<int> channels = {6, 7, 8};
  std::vector<Feature> features = {Feature::Mav, Feature::Rms, Feature::Wl};

  int order = 4;
  bool order_auto = false;
  int order_min = 1;
  int order_max = 12;
  double aic_threshold = 0.05;

  double theta0 = 0.3;
  double p0_scale = 1e3;

  bool kf = true;
  double variance_floor = 1e-9;
  double riccati_p0 = 1e3;
  double riccati_tol = 1e-10;
  long riccati_max_iter = 100000;

  double split_ratio = 0.5;
  std::uint64_t seed = 1;

  int epochs = 1000;
  double learning_rate = 0.001;
  double rmsprop_decay = 0.9;
  double rmsprop_epsilon = 1e-8;
  int hidden = 0;             // 0: use the state-space order
  int narx_input_memory = 0;  // 0: use the state-space order
  int narx_output_memory = 0; // 0: use the state-space order
  int lda_levels = 3;

  void validate() const;

  baselines::TrainConfig mlp_config(std::uint64_t train_seed) const;
  baselines::NarxConfig narx_config(std::uint64_t train_seed) const;
};

std::string config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const std::string& json_text);

/// FNV-1a hash of the canonical config JSON; embedded into every artifact.
std::string config_hash(const PipelineConfig& cfg);

/// Temporal split: the leading `ratio` share of rows identifies, the rest
/// validates. Normalization ranges are fit on the identification half only
/// and applied unclamped to both halves.
struct SplitFeatures {
  FeatureMatrix ident;
  FeatureMatrix valid;
};

SplitFeatures split_and_normalize(const FeatureMatrix& fm, double ratio);

/// State-space branch artifacts for one subject.
struct SsArtifacts {
  ssid::StateSpaceModel model;
  ssid::RlsEstimator estimator;
  std::optional<ssid::OrderSelection> order_selection;
  std::optional<kalman::KalmanEstimator> kf;
};

FeatureMatrix extract(const SessionRecording& rec, const PipelineConfig& cfg);

/// Order selection (when configured), identification and filter tuning on
/// the identification half.
SsArtifacts build_ss(const FeatureMatrix& ident, const PipelineConfig& cfg);

model_io::ModelDocument to_document(const SsArtifacts& art, const PipelineConfig& cfg,
                                    const std::vector<NormRange>& norm_ranges);

/// Clamps a force sequence to the physical [0, 1] range (final reports only).
std::vector<double> clamp_force(std::vector<double> y);

/// Everything `compare` needs from one subject: validation predictions of
/// the state-space estimator (with and without the filter) and of the three
/// reference regressors. Prediction vectors are clamped force reports.
struct SubjectOutcome {
  std::string subject;
  std::vector<double> y_valid;  // measured force over the validation half
  std::vector<std::pair<std::string, std::vector<double>>> predictions;
  std::vector<std::string> errors;  // per-model failures, "model: message"
  std::optional<SsArtifacts> ss;    // absent when the state-space branch failed
};

/// Trains the state-space estimator plus the MLP, NARX and LDA+QPF reference
/// models on the identification half and predicts the validation half.
/// Per-model failures are recorded and leave the remaining models intact.
SubjectOutcome run_subject(const SessionRecording& rec, const PipelineConfig& cfg,
                           const std::string& subject_name, std::uint64_t subject_seed);

/// Runs `run_subject` over all recordings (a small worker pool; output order
/// follows input order) and scores every (subject, model) pair.
struct CompareResult {
  metrics::EvalReport report;
  std::vector<std::string> model_order;
  std::vector<SubjectOutcome> subjects;
};

CompareResult compare_subjects(const std::vector<SessionRecording>& recordings,
                               const PipelineConfig& cfg);

/// Model display names used in reports.
inline constexpr const char* kSsKfName = "ss_kf";
inline constexpr const char* kSsName = "ss";
inline constexpr const char* kMlpName = "mlp";
inline constexpr const char* kNarxName = "narx";
inline constexpr const char* kLdaQpfName = "lda_qpf";

}  // namespace gfe::pipeline
