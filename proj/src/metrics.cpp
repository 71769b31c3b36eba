#include "gfe/metrics.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

namespace gfe::metrics {

namespace {

struct Norms {
  double residual;   // ||y - y_hat||
  double deviation;  // ||y - mean(y)||
};

Norms fit_norms(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size()) throw std::invalid_argument("metric: sequence lengths differ");
  if (y.empty()) throw std::invalid_argument("metric: empty sequences");
  const double y_mean = mean(y);
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    sse += (y[k] - y_hat[k]) * (y[k] - y_hat[k]);
    sst += (y[k] - y_mean) * (y[k] - y_mean);
  }
  if (!(sst > 0.0)) {
    throw std::invalid_argument("metric: target sequence is constant");
  }
  return {std::sqrt(sse), std::sqrt(sst)};
}

}  // namespace

double nrmse(std::span<const double> y, std::span<const double> y_hat) {
  const Norms n = fit_norms(y, y_hat);
  return 1.0 - n.residual / n.deviation;
}

double r2(std::span<const double> y, std::span<const double> y_hat) {
  const Norms n = fit_norms(y, y_hat);
  return 1.0 - (n.residual * n.residual) / (n.deviation * n.deviation);
}

double mean(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("mean: empty input");
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc / static_cast<double>(values.size());
}

double sd_unbiased(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("sd: empty input");
  if (values.size() == 1) return 0.0;
  const double m = mean(values);
  double acc = 0.0;
  for (double v : values) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(values.size() - 1));
}

EvalReport evaluate(const std::vector<PredictionSet>& predictions) {
  EvalReport report;
  std::vector<std::string> model_order;
  std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_model;

  for (const auto& p : predictions) {
    EvalCell cell;
    cell.subject = p.subject;
    cell.model = p.model;
    try {
      cell.r2 = r2(p.y_true, p.y_pred);
      cell.nrmse = nrmse(p.y_true, p.y_pred);
      if (by_model.find(p.model) == by_model.end()) model_order.push_back(p.model);
      by_model[p.model].first.push_back(*cell.r2);
      by_model[p.model].second.push_back(*cell.nrmse);
    } catch (const std::exception& e) {
      cell.error = e.what();
    }
    report.per_subject.push_back(std::move(cell));
  }

  for (const auto& model : model_order) {
    const auto& [r2s, nrmses] = by_model[model];
    EvalAggregate agg;
    agg.model = model;
    agg.count = static_cast<int>(r2s.size());
    agg.r2_mean = mean(r2s);
    agg.r2_sd = sd_unbiased(r2s);
    agg.nrmse_mean = mean(nrmses);
    agg.nrmse_sd = sd_unbiased(nrmses);
    report.aggregate.push_back(agg);
  }
  return report;
}

TimingStats time_block(const std::function<void()>& action, int repeats, int warmup) {
  using clock = std::chrono::steady_clock;
  if (repeats < 1) throw std::invalid_argument("time_block: repeats must be >= 1");

  for (int k = 0; k < warmup; ++k) action();

  std::vector<double> durations_ms(repeats);
  for (int k = 0; k < repeats; ++k) {
    const auto start = clock::now();
    action();
    const auto stop = clock::now();
    durations_ms[k] = std::chrono::duration<double, std::milli>(stop - start).count();
  }
  return {mean(durations_ms), sd_unbiased(durations_ms), repeats};
}

}  // namespace gfe::metrics
