#pragma once

#include "dvl/schemas.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace dvl::evaluation {

struct PredictionPair {
  double prediction = 0.0;  // predicted easiness
  double actual = 0.0;      // observed easiness
};

// All metrics require a non-empty pair list with every value in [0,1]
// (EmptyInputError / OutOfRangeError otherwise) and accumulate with pairwise
// summation.
double mean_absolute_error(std::span<const PredictionPair> pairs);
double mean_squared_error(std::span<const PredictionPair> pairs);

// Standard error of the mean of the per-pair absolute errors: sample standard
// deviation (n-1 denominator) divided by sqrt(n). By convention n == 1 gives 0.
double sem_of_absolute_errors(std::span<const PredictionPair> pairs);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;

  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

// Equal-width bins over [0,1]. Bins are right-closed, (lo, hi], with the
// first bin additionally closed at 0, so 0.0 lands in the first bin and 1.0
// in the last. Sum of counts equals the number of predictions.
std::vector<HistogramBin> prediction_histogram(std::span<const double> predictions,
                                               std::size_t n_bins);

struct EvaluationReport {
  schemas::PredictorKind kind = schemas::PredictorKind::TextOnly;
  std::size_t n_items = 0;
  double mae = 0.0;
  double mse = 0.0;
  double sem_abs_error = 0.0;
  std::vector<HistogramBin> histogram;
};

EvaluationReport evaluate(schemas::PredictorKind kind, std::span<const PredictionPair> pairs,
                          std::size_t n_bins = 10);

// Ascending by MAE, ties broken by MSE, then by kind name. ordered.front()
// is the best pipeline.
struct PipelineRanking {
  std::vector<EvaluationReport> ordered;
  const EvaluationReport& best() const { return ordered.front(); }
};

PipelineRanking compare_pipelines(std::vector<EvaluationReport> reports);

// {kind, n_items, mae, mse, sem_abs_error, histogram:[{lo,hi,count}]}
nlohmann::json report_to_json(const EvaluationReport& report);

}  // namespace dvl::evaluation
