#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gfe::metrics {

/// 1 - ||y - y_hat|| / ||y - mean(y)||. Perfect fit scores 1; the constant
/// mean predictor scores 0. Throws on constant y (zero deviation norm).
double nrmse(std::span<const double> y, std::span<const double> y_hat);

/// Coefficient of determination 1 - SSE/SST. Related to nrmse by
/// r2 = 1 - (1 - nrmse)^2; can be negative for fits worse than the mean.
double r2(std::span<const double> y, std::span<const double> y_hat);

double mean(std::span<const double> values);
double sd_unbiased(std::span<const double> values);  // 0 for a single value

/// One (subject, model) prediction pair to be scored.
struct PredictionSet {
  std::string subject;
  std::string model;
  std::vector<double> y_true;
  std::vector<double> y_pred;
};

struct EvalCell {
  std::string subject;
  std::string model;
  std::optional<double> r2;
  std::optional<double> nrmse;
  std::string error;  // non-empty when the cell could not be scored
};

struct EvalAggregate {
  std::string model;
  double r2_mean = 0.0, r2_sd = 0.0;
  double nrmse_mean = 0.0, nrmse_sd = 0.0;
  int count = 0;
};

struct TimingStats {
  double mean_ms = 0.0;
  double sd_ms = 0.0;
  int repeats = 0;
};

struct EvalReport {
  std::vector<EvalCell> per_subject;
  std::vector<EvalAggregate> aggregate;  // one row per model, insertion order
  std::vector<std::pair<std::string, TimingStats>> training_ms;     // per model
  std::vector<std::pair<std::string, TimingStats>> loop_runtime_ms; // per model
};

/// Scores every prediction set with both metrics. Per-cell failures are
/// recorded as absent values and excluded from the aggregates; the report is
/// always produced.
EvalReport evaluate(const std::vector<PredictionSet>& predictions);

/// Wall-clock statistics of `action` over `repeats` invocations on the
/// calling thread (monotonic clock), after `warmup` discarded runs.
TimingStats time_block(const std::function<void()>& action, int repeats = 100, int warmup = 10);

}  // namespace gfe::metrics
