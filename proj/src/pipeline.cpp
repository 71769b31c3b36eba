#include "gfe/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include <json.hpp>

#include "gfe/errors.hpp"
#include "gfe/features.hpp"

namespace gfe::pipeline {

namespace {

using nlohmann::json;

}  // namespace

void PipelineConfig::validate() const {
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw std::invalid_argument("split_ratio must lie in (0, 1)");
  }
  if (order < 1 && !order_auto) throw std::invalid_argument("order must be >= 1");
  if (order_min < 1 || order_max < order_min) {
    throw std::invalid_argument("order range must satisfy 1 <= order_min <= order_max");
  }
  if (!(aic_threshold >= 0.0)) throw std::invalid_argument("aic_threshold must be >= 0");
  if (!(p0_scale > 0.0)) throw std::invalid_argument("p0_scale must be positive");
  if (!(variance_floor > 0.0)) throw std::invalid_argument("variance_floor must be positive");
  if (channels.empty()) throw std::invalid_argument("channel set must not be empty");
  if (features.empty()) throw std::invalid_argument("feature set must not be empty");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  if (lda_levels < 2) throw std::invalid_argument("lda_levels must be >= 2");
}

baselines::TrainConfig PipelineConfig::mlp_config(std::uint64_t train_seed) const {
  baselines::TrainConfig t;
  t.epochs = epochs;
  t.learning_rate = learning_rate;
  t.rmsprop_decay = rmsprop_decay;
  t.rmsprop_epsilon = rmsprop_epsilon;
  t.hidden = hidden > 0 ? hidden : order;
  t.seed = train_seed;
  return t;
}

baselines::NarxConfig PipelineConfig::narx_config(std::uint64_t train_seed) const {
  baselines::NarxConfig n;
  n.train = mlp_config(train_seed);
  n.input_memory = narx_input_memory > 0 ? narx_input_memory : order;
  n.output_memory = narx_output_memory > 0 ? narx_output_memory : order;
  return n;
}

std::string config_to_json(const PipelineConfig& cfg) {
  json j;
  j["window_ms"] = cfg.window.length_ms;
  j["increment_ms"] = cfg.window.increment_ms;
  j["channels"] = cfg.channels;
  json names = json::array();
  for (Feature f : cfg.features) names.push_back(feature_name(f));
  j["features"] = names;
  if (cfg.order_auto) {
    j["order"] = "auto";
  } else {
    j["order"] = cfg.order;
  }
  j["order_min"] = cfg.order_min;
  j["order_max"] = cfg.order_max;
  j["aic_threshold"] = cfg.aic_threshold;
  j["theta0"] = cfg.theta0;
  j["p0_scale"] = cfg.p0_scale;
  j["kf"] = cfg.kf;
  j["variance_floor"] = cfg.variance_floor;
  j["riccati_p0"] = cfg.riccati_p0;
  j["riccati_tol"] = cfg.riccati_tol;
  j["riccati_max_iter"] = cfg.riccati_max_iter;
  j["split_ratio"] = cfg.split_ratio;
  j["seed"] = cfg.seed;
  j["epochs"] = cfg.epochs;
  j["learning_rate"] = cfg.learning_rate;
  j["rmsprop_decay"] = cfg.rmsprop_decay;
  j["rmsprop_epsilon"] = cfg.rmsprop_epsilon;
  j["hidden"] = cfg.hidden;
  j["narx_input_memory"] = cfg.narx_input_memory;
  j["narx_output_memory"] = cfg.narx_output_memory;
  j["lda_levels"] = cfg.lda_levels;
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config JSON: ") + e.what());
  }
  PipelineConfig cfg;
  cfg.window.length_ms = j.value("window_ms", cfg.window.length_ms);
  cfg.window.increment_ms = j.value("increment_ms", cfg.window.increment_ms);
  if (j.contains("channels")) cfg.channels = j["channels"].get<std::vector<int>>();
  if (j.contains("features")) {
    cfg.features.clear();
    for (const auto& name : j["features"]) {
      cfg.features.push_back(feature_from_name(name.get<std::string>()));
    }
  }
  if (j.contains("order")) {
    if (j["order"].is_string()) {
      if (j["order"].get<std::string>() != "auto") {
        throw std::invalid_argument("config JSON: order must be a number or \"auto\"");
      }
      cfg.order_auto = true;
    } else {
      cfg.order = j["order"].get<int>();
      cfg.order_auto = false;
    }
  }
  cfg.order_min = j.value("order_min", cfg.order_min);
  cfg.order_max = j.value("order_max", cfg.order_max);
  cfg.aic_threshold = j.value("aic_threshold", cfg.aic_threshold);
  cfg.theta0 = j.value("theta0", cfg.theta0);
  cfg.p0_scale = j.value("p0_scale", cfg.p0_scale);
  cfg.kf = j.value("kf", cfg.kf);
  cfg.variance_floor = j.value("variance_floor", cfg.variance_floor);
  cfg.riccati_p0 = j.value("riccati_p0", cfg.riccati_p0);
  cfg.riccati_tol = j.value("riccati_tol", cfg.riccati_tol);
  cfg.riccati_max_iter = j.value("riccati_max_iter", cfg.riccati_max_iter);
  cfg.split_ratio = j.value("split_ratio", cfg.split_ratio);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.rmsprop_decay = j.value("rmsprop_decay", cfg.rmsprop_decay);
  cfg.rmsprop_epsilon = j.value("rmsprop_epsilon", cfg.rmsprop_epsilon);
  cfg.hidden = j.value("hidden", cfg.hidden);
  cfg.narx_input_memory = j.value("narx_input_memory", cfg.narx_input_memory);
  cfg.narx_output_memory = j.value("narx_output_memory", cfg.narx_output_memory);
  cfg.lda_levels = j.value("lda_levels", cfg.lda_levels);
  cfg.validate();
  return cfg;
}

std::string config_hash(const PipelineConfig& cfg) {
  const std::string canonical = config_to_json(cfg);
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

SplitFeatures split_and_normalize(const FeatureMatrix& fm, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must lie in (0, 1)");
  const long rows = fm.rows();
  const long ident_rows = std::lround(rows * ratio);
  if (ident_rows < 2 || rows - ident_rows < 2) {
    throw std::invalid_argument("too few feature rows for a " + std::to_string(ratio) + " split");
  }

  FeatureMatrix ident;
  ident.u = fm.u.topRows(ident_rows);
  ident.y.assign(fm.y.begin(), fm.y.begin() + ident_rows);
  ident.layout = fm.layout;
  ident.ts_s = fm.ts_s;

  FeatureMatrix valid;
  valid.u = fm.u.bottomRows(rows - ident_rows);
  valid.y.assign(fm.y.begin() + ident_rows, fm.y.end());
  valid.layout = fm.layout;
  valid.ts_s = fm.ts_s;

  const std::vector<NormRange> ranges = features::fit_norm_ranges(ident.u);
  SplitFeatures split;
  split.ident = features::apply_norm_ranges(ident, ranges);
  split.valid = features::apply_norm_ranges(valid, ranges);
  return split;
}

FeatureMatrix extract(const SessionRecording& rec, const PipelineConfig& cfg) {
  return features::extract_features(rec, cfg.window, cfg.channels, cfg.features);
}

SsArtifacts build_ss(const FeatureMatrix& ident, const PipelineConfig& cfg) {
  int order = cfg.order;
  std::optional<ssid::OrderSelection> selection;
  if (cfg.order_auto) {
    selection = ssid::select_order(ident, cfg.order_min, cfg.order_max, cfg.aic_threshold,
                                   cfg.theta0, cfg.p0_scale);
    order = selection->selected_order;
  }

  ssid::Identification id = ssid::identify(ident, order, cfg.theta0, cfg.p0_scale);
  SsArtifacts art{std::move(id.model), std::move(id.estimator), std::move(selection), std::nullopt};
  if (cfg.kf) {
    art.kf = kalman::tune(art.model, art.estimator, cfg.variance_floor, cfg.riccati_p0,
                          cfg.riccati_tol, cfg.riccati_max_iter);
  }
  return art;
}

model_io::ModelDocument to_document(const SsArtifacts& art, const PipelineConfig& cfg,
                                    const std::vector<NormRange>& norm_ranges) {
  model_io::ModelDocument doc;
  doc.model = art.model;
  doc.theta0 = cfg.theta0;
  doc.p0_scale = cfg.p0_scale;
  doc.window = cfg.window;
  doc.channels = cfg.channels;
  doc.features = cfg.features;
  doc.norm_ranges = norm_ranges;
  doc.kf_enabled = cfg.kf;
  doc.kf = art.kf;
  doc.order_selection = art.order_selection;
  doc.config_hash = config_hash(cfg);
  return doc;
}

std::vector<double> clamp_force(std::vector<double> y) {
  for (double& v : y) v = std::clamp(v, 0.0, 1.0);
  return y;
}

SubjectOutcome run_subject(const SessionRecording& rec, const PipelineConfig& cfg,
                           const std::string& subject_name, std::uint64_t subject_seed) {
  cfg.validate();
  SubjectOutcome outcome;
  outcome.subject = subject_name;

  const FeatureMatrix fm = extract(rec, cfg);
  const SplitFeatures split = split_and_normalize(fm, cfg.split_ratio);
  outcome.y_valid = split.valid.y;

  try {
    outcome.ss = build_ss(split.ident, cfg);
    const Eigen::VectorXd zero_state = Eigen::VectorXd::Zero(outcome.ss->model.n);
    std::vector<double> y_ss = ssid::simulate(outcome.ss->model, split.valid.u, zero_state);
    if (cfg.kf) {
      if (!outcome.ss->kf->stable) {
        throw NumericalFailure("estimator matrix A - LC is not strictly stable (radius " +
                               std::to_string(outcome.ss->kf->spectral_radius) + ")");
      }
      std::vector<double> y_kf =
          kalman::kf_run(*outcome.ss->kf, split.valid.u, split.valid.y, zero_state);
      outcome.predictions.emplace_back(kSsKfName, clamp_force(std::move(y_kf)));
    }
    outcome.predictions.emplace_back(kSsName, clamp_force(std::move(y_ss)));
  } catch (const std::exception& e) {
    outcome.errors.push_back(std::string(cfg.kf ? kSsKfName : kSsName) + ": " + e.what());
  }

  try {
    const baselines::MlpModel mlp = baselines::mlp_train(split.ident, cfg.mlp_config(subject_seed));
    std::vector<double> pred(split.valid.rows());
    for (long k = 0; k < split.valid.rows(); ++k) {
      pred[k] = baselines::mlp_predict(mlp, split.valid.u.row(k).transpose());
    }
    outcome.predictions.emplace_back(kMlpName, clamp_force(std::move(pred)));
  } catch (const std::exception& e) {
    outcome.errors.push_back(std::string(kMlpName) + ": " + e.what());
  }

  try {
    const baselines::NarxConfig narx_cfg = cfg.narx_config(subject_seed + 1);
    const baselines::NarxModel narx = baselines::narx_train(split.ident, narx_cfg);
    std::vector<double> seed_values(split.valid.y.begin(),
                                    split.valid.y.begin() +
                                        std::min<std::size_t>(narx_cfg.output_memory,
                                                              split.valid.y.size()));
    std::vector<double> pred = baselines::narx_predict(narx, split.valid.u, seed_values);
    outcome.predictions.emplace_back(kNarxName, clamp_force(std::move(pred)));
  } catch (const std::exception& e) {
    outcome.errors.push_back(std::string(kNarxName) + ": " + e.what());
  }

  try {
    const baselines::LdaQpfModel lda = baselines::ldaqpf_train(split.ident, cfg.lda_levels);
    std::vector<double> pred(split.valid.rows());
    for (long k = 0; k < split.valid.rows(); ++k) {
      pred[k] = baselines::ldaqpf_predict(lda, split.valid.u.row(k).transpose());
    }
    outcome.predictions.emplace_back(kLdaQpfName, std::move(pred));
  } catch (const std::exception& e) {
    outcome.errors.push_back(std::string(kLdaQpfName) + ": " + e.what());
  }

  return outcome;
}

CompareResult compare_subjects(const std::vector<SessionRecording>& recordings,
                               const PipelineConfig& cfg) {
  cfg.validate();
  CompareResult result;
  result.model_order = {cfg.kf ? kSsKfName : kSsName, kMlpName, kNarxName, kLdaQpfName};

  // One task per subject; results land in index order regardless of
  // completion order. Training seeds are derived from the subject index, so
  // the schedule cannot change any numbers.
  std::vector<std::future<SubjectOutcome>> tasks;
  tasks.reserve(recordings.size());
  for (std::size_t s = 0; s < recordings.size(); ++s) {
    tasks.push_back(std::async(std::launch::async, [&recordings, &cfg, s] {
      return run_subject(recordings[s], cfg, "V" + std::to_string(s + 1),
                         cfg.seed + 9973 * (s + 1));
    }));
  }

  std::vector<metrics::PredictionSet> predictions;
  for (auto& task : tasks) {
    SubjectOutcome outcome = task.get();
    for (const auto& [model, pred] : outcome.predictions) {
      // The raw-ss column accompanies ss_kf for filter-effect reports but
      // stays out of the four-model table.
      if (cfg.kf && model == kSsName) continue;
      predictions.push_back({outcome.subject, model, outcome.y_valid, pred});
    }
    for (const auto& err : outcome.errors) {
      const auto colon = err.find(':');
      metrics::PredictionSet failed;
      failed.subject = outcome.subject;
      failed.model = err.substr(0, colon);
      predictions.push_back(std::move(failed));
    }
    result.subjects.push_back(std::move(outcome));
  }

  result.report = metrics::evaluate(predictions);
  // Attach the error text to cells that had no data to score.
  for (auto& cell : result.report.per_subject) {
    if (!cell.error.empty() || cell.r2) continue;
    for (const auto& outcome : result.subjects) {
      if (outcome.subject != cell.subject) continue;
      for (const auto& err : outcome.errors) {
        if (err.rfind(cell.model + ":", 0) == 0) cell.error = err.substr(cell.model.size() + 2);
      }
    }
  }
  return result;
}

}  // namespace gfe::pipeline
