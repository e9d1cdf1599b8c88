#pragma once

// Independent oracles: deliberately naive implementations used to check the
// library's results. They share no code with dvl_core's computation paths.

#include "dvl/evaluation.hpp"
#include "dvl/ingestion.hpp"

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace oracle {

struct Tally {
  std::size_t incorrect = 0;
  std::size_t total = 0;
};

// Brute-force per-item tally by linear scan.
std::map<std::string, Tally> tally_responses(const std::vector<dvl::ingestion::ResponseRecord>& records);

// Plain accumulation in input order (no pairwise summation).
double naive_mae(const std::vector<dvl::evaluation::PredictionPair>& pairs);
double naive_mse(const std::vector<dvl::evaluation::PredictionPair>& pairs);
double naive_sem_abs(const std::vector<dvl::evaluation::PredictionPair>& pairs);

// Per-bin membership test by direct comparison: first bin [0, hi], others
// (lo, hi].
std::vector<std::size_t> naive_histogram(const std::vector<double>& values, std::size_t n_bins);

}  // namespace oracle
