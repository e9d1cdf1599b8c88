#include "dvl/evaluation.hpp"

#include "dvl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace dvl::evaluation {

namespace {

// Pairwise (cascade) summation over f(pairs[i]) for numeric stability.
double pairwise_sum(std::span<const PredictionPair> pairs,
                    const std::function<double(const PredictionPair&)>& f) {
  if (pairs.size() <= 32) {
    double sum = 0.0;
    for (const auto& p : pairs) sum += f(p);
    return sum;
  }
  const std::size_t half = pairs.size() / 2;
  return pairwise_sum(pairs.first(half), f) + pairwise_sum(pairs.subspan(half), f);
}

void validate(std::span<const PredictionPair> pairs, const char* op) {
  if (pairs.empty()) throw EmptyInputError(std::string(op) + ": empty input");
  for (const auto& p : pairs) {
    if (!(p.prediction >= 0.0 && p.prediction <= 1.0)) {
      throw OutOfRangeError("prediction", p.prediction);
    }
    if (!(p.actual >= 0.0 && p.actual <= 1.0)) {
      throw OutOfRangeError("actual", p.actual);
    }
  }
}

}  // namespace

double mean_absolute_error(std::span<const PredictionPair> pairs) {
  validate(pairs, "mean_absolute_error");
  const double sum =
      pairwise_sum(pairs, [](const PredictionPair& p) { return std::abs(p.prediction - p.actual); });
  return sum / static_cast<double>(pairs.size());
}

double mean_squared_error(std::span<const PredictionPair> pairs) {
  validate(pairs, "mean_squared_error");
  const double sum = pairwise_sum(pairs, [](const PredictionPair& p) {
    const double d = p.prediction - p.actual;
    return d * d;
  });
  return sum / static_cast<double>(pairs.size());
}

double sem_of_absolute_errors(std::span<const PredictionPair> pairs) {
  validate(pairs, "sem_of_absolute_errors");
  const auto n = static_cast<double>(pairs.size());
  if (pairs.size() == 1) return 0.0;

  const double mean = mean_absolute_error(pairs);
  const double ss = pairwise_sum(pairs, [mean](const PredictionPair& p) {
    const double d = std::abs(p.prediction - p.actual) - mean;
    return d * d;
  });
  const double sample_sd = std::sqrt(ss / (n - 1.0));
  return sample_sd / std::sqrt(n);
}

std::vector<HistogramBin> prediction_histogram(std::span<const double> predictions,
                                               std::size_t n_bins) {
  if (predictions.empty()) throw EmptyInputError("prediction_histogram: empty input");
  if (n_bins == 0) throw Error("prediction_histogram: n_bins must be >= 1");

  std::vector<HistogramBin> bins(n_bins);
  const auto nb = static_cast<double>(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    bins[i].lo = static_cast<double>(i) / nb;
    bins[i].hi = static_cast<double>(i + 1) / nb;
  }
  for (double v : predictions) {
    if (!(v >= 0.0 && v <= 1.0)) throw OutOfRangeError("prediction", v);
    // Right-closed bins: v lands in the bin with lo < v <= hi; 0 in the first.
    const auto idx = static_cast<std::size_t>(std::max(0.0, std::ceil(v * nb) - 1.0));
    bins[std::min(idx, n_bins - 1)].count += 1;
  }
  return bins;
}

EvaluationReport evaluate(schemas::PredictorKind kind, std::span<const PredictionPair> pairs,
                          std::size_t n_bins) {
  EvaluationReport report;
  report.kind = kind;
  report.n_items = pairs.size();
  report.mae = mean_absolute_error(pairs);
  report.mse = mean_squared_error(pairs);
  report.sem_abs_error = sem_of_absolute_errors(pairs);

  std::vector<double> predictions;
  predictions.reserve(pairs.size());
  for (const auto& p : pairs) predictions.push_back(p.prediction);
  report.histogram = prediction_histogram(predictions, n_bins);
  return report;
}

PipelineRanking compare_pipelines(std::vector<EvaluationReport> reports) {
  if (reports.empty()) throw EmptyInputError("compare_pipelines: no reports");
  std::stable_sort(reports.begin(), reports.end(),
                   [](const EvaluationReport& a, const EvaluationReport& b) {
                     if (a.mae != b.mae) return a.mae < b.mae;
                     if (a.mse != b.mse) return a.mse < b.mse;
                     return schemas::to_string(a.kind) < schemas::to_string(b.kind);
                   });
  return PipelineRanking{std::move(reports)};
}

nlohmann::json report_to_json(const EvaluationReport& report) {
  nlohmann::json hist = nlohmann::json::array();
  for (const auto& bin : report.histogram) {
    hist.push_back({{"lo", bin.lo}, {"hi", bin.hi}, {"count", bin.count}});
  }
  return {{"kind", schemas::to_string(report.kind)},
          {"n_items", report.n_items},
          {"mae", report.mae},
          {"mse", report.mse},
          {"sem_abs_error", report.sem_abs_error},
          {"histogram", hist}};
}

}  // namespace dvl::evaluation
