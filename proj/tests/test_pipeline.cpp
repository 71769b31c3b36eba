#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "gfe/metrics.hpp"
#include "gfe/pipeline.hpp"
#include "gfe/synth.hpp"

using namespace gfe;
using namespace gfe::pipeline;

namespace {

SessionRecording quick_session(std::uint64_t seed, double duration_s = 40.0) {
  synth::SynthSessionSpec spec;
  spec.duration_s = duration_s;
  spec.seed = seed;
  return synth::gen_session(spec);
}

double metric_of(const SubjectOutcome& outcome, const std::string& model,
                 double (*metric)(std::span<const double>, std::span<const double>)) {
  for (const auto& [name, pred] : outcome.predictions) {
    if (name == model) return metric(outcome.y_valid, pred);
  }
  throw std::runtime_error("model not found: " + model);
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("split keeps halves disjoint and normalizes on the first half") {
  const SessionRecording rec = quick_session(2);
  PipelineConfig cfg;
  const FeatureMatrix fm = extract(rec, cfg);
  const SplitFeatures split = split_and_normalize(fm, 0.5);

  CHECK(split.ident.rows() + split.valid.rows() == fm.rows());
  CHECK(split.ident.rows() == fm.rows() / 2 + (fm.rows() % 2));

  // Identification entries stay inside [0,1] after fitting on themselves.
  CHECK(split.ident.u.minCoeff() >= 0.0);
  CHECK(split.ident.u.maxCoeff() <= 1.0);
  // Validation entries may extrapolate; ranges come from the first half.
  CHECK(split.valid.norm_ranges.size() == split.ident.norm_ranges.size());
  for (std::size_t k = 0; k < split.ident.norm_ranges.size(); ++k) {
    CHECK(split.valid.norm_ranges[k].min == split.ident.norm_ranges[k].min);
    CHECK(split.valid.norm_ranges[k].max == split.ident.norm_ranges[k].max);
  }
}

TEST_CASE("filtered estimate beats the open-loop model on a synthetic session") {
  const SessionRecording rec = quick_session(3);
  PipelineConfig cfg;
  SubjectOutcome outcome = run_subject(rec, cfg, "V1", 10);
  REQUIRE(outcome.errors.empty());

  const double r2_kf = metric_of(outcome, kSsKfName, metrics::r2);
  const double r2_ss = metric_of(outcome, kSsName, metrics::r2);
  CHECK(r2_kf >= r2_ss);
  CHECK(r2_kf > 0.85);
}

TEST_CASE("all four regressors clear the quality bar on one session") {
  const SessionRecording rec = quick_session(4);
  PipelineConfig cfg;
  SubjectOutcome outcome = run_subject(rec, cfg, "V1", 20);
  REQUIRE(outcome.errors.empty());
  for (const char* model : {kSsKfName, kMlpName, kNarxName, kLdaQpfName}) {
    CHECK(metric_of(outcome, model, metrics::r2) > 0.8);
  }
}

TEST_CASE("identified model passes the structural checks") {
  const SessionRecording rec = quick_session(5);
  PipelineConfig cfg;
  const FeatureMatrix fm = extract(rec, cfg);
  const SplitFeatures split = split_and_normalize(fm, cfg.split_ratio);
  const SsArtifacts art = build_ss(split.ident, cfg);
  const ssid::ModelAnalysis report = ssid::analyze(art.model);
  CHECK(report.stable);
  CHECK(report.controllable);
  CHECK(report.observable);
  for (double modulus : report.pole_moduli) CHECK(modulus < 1.0);
}

TEST_CASE("compare over several subjects yields a full table") {
  std::vector<SessionRecording> recordings;
  for (int s = 0; s < 3; ++s) recordings.push_back(quick_session(100 + s, 30.0));
  PipelineConfig cfg;
  cfg.epochs = 150;  // keep this integration test quick
  const CompareResult result = compare_subjects(recordings, cfg);

  CHECK(result.model_order ==
        std::vector<std::string>{kSsKfName, kMlpName, kNarxName, kLdaQpfName});
  CHECK(result.report.per_subject.size() == 3 * 4);
  CHECK(result.report.aggregate.size() == 4);
  for (const auto& cell : result.report.per_subject) {
    CHECK(cell.r2.has_value());
  }
  // Deterministic across runs: same config, same subjects, same numbers.
  const CompareResult again = compare_subjects(recordings, cfg);
  for (std::size_t k = 0; k < result.report.per_subject.size(); ++k) {
    CHECK(result.report.per_subject[k].r2 == again.report.per_subject[k].r2);
    CHECK(result.report.per_subject[k].nrmse == again.report.per_subject[k].nrmse);
  }
}

TEST_CASE("kf off produces the raw state-space column only") {
  const SessionRecording rec = quick_session(6);
  PipelineConfig cfg;
  cfg.kf = false;
  SubjectOutcome outcome = run_subject(rec, cfg, "V1", 30);
  REQUIRE(outcome.errors.empty());
  for (const auto& [name, pred] : outcome.predictions) {
    CHECK(name != kSsKfName);
  }
}

}  // TEST_SUITE
