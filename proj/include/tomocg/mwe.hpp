#pragma once

#include <vector>

#include "tomocg/sampler.hpp"

namespace tomocg::mwe {

/// Result of maximizing the weighted entropy under the sum-to-one constraint.
struct MweSolution {
    std::vector<double> nu;     // re-estimated frequencies, zeros where the input count was 0
    double lambda = 0.0;        // Lagrange multiplier of the constraint
    std::vector<double> n_mwe;  // N_ill * nu
    double t = 1.0;             // weight exponent used
};

/// -sum_k w_k nu'_k log nu'_k over the positive-weight support, 0 log 0 := 0.
double weighted_entropy(const std::vector<double>& weights,
                        const std::vector<double>& nu_prime);

/// Maximizes the weighted entropy with weights (n_k / N_ill)^t over the
/// strictly positive counts; zero-count entries stay at zero. The stationary
/// point solves nu_k = exp(-1 - lambda / w_k) with lambda the unique root of
/// g(lambda) = sum_k exp(-1 - lambda / w_k) - 1.
MweSolution mwe_frequencies(const std::vector<double>& ill_counts, double t = 1.0);

/// Coarse-grained data set: well counts untouched, ill counts re-estimated.
struct CoarseGrainedCounts {
    std::vector<std::int64_t> well;
    std::vector<double> ill;
};

CoarseGrainedCounts mwe_counts(const sampler::Counts& counts, double t = 1.0);

}  // namespace tomocg::mwe
