#include "support/oracles.hpp"

#include <cmath>

namespace oracle {

std::map<std::string, Tally> tally_responses(
    const std::vector<dvl::ingestion::ResponseRecord>& records) {
  std::map<std::string, Tally> tallies;
  for (const auto& rec : records) {
    Tally& t = tallies[rec.item_id];
    t.total += 1;
    if (rec.incorrect_response) t.incorrect += 1;
  }
  return tallies;
}

double naive_mae(const std::vector<dvl::evaluation::PredictionPair>& pairs) {
  double sum = 0.0;
  for (const auto& p : pairs) sum += std::fabs(p.prediction - p.actual);
  return sum / static_cast<double>(pairs.size());
}

double naive_mse(const std::vector<dvl::evaluation::PredictionPair>& pairs) {
  double sum = 0.0;
  for (const auto& p : pairs) sum += (p.prediction - p.actual) * (p.prediction - p.actual);
  return sum / static_cast<double>(pairs.size());
}

double naive_sem_abs(const std::vector<dvl::evaluation::PredictionPair>& pairs) {
  const auto n = static_cast<double>(pairs.size());
  if (pairs.size() < 2) return 0.0;
  double mean = 0.0;
  for (const auto& p : pairs) mean += std::fabs(p.prediction - p.actual);
  mean /= n;
  double ss = 0.0;
  for (const auto& p : pairs) {
    const double d = std::fabs(p.prediction - p.actual) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

std::vector<std::size_t> naive_histogram(const std::vector<double>& values, std::size_t n_bins) {
  std::vector<std::size_t> counts(n_bins, 0);
  for (double v : values) {
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double lo = static_cast<double>(b) / static_cast<double>(n_bins);
      const double hi = static_cast<double>(b + 1) / static_cast<double>(n_bins);
      const bool inside = (b == 0) ? (v >= 0.0 && v <= hi) : (v > lo && v <= hi);
      if (inside) {
        counts[b] += 1;
        break;
      }
    }
  }
  return counts;
}

}  // namespace oracle
