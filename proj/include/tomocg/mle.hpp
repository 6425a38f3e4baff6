#pragma once

#include <optional>
#include <vector>

#include "tomocg/mwe.hpp"
#include "tomocg/sampler.hpp"

namespace tomocg::mle {

using qops::DensityMatrix;
using qops::Matrix;
using qops::PovmElement;
using randgen::MeasurementSetup;
using sampler::Counts;

/// A likelihood instance: outcomes with sum <= 1 and (possibly real-valued)
/// counts per outcome.
struct LikelihoodSpec {
    std::vector<PovmElement> outcomes;
    std::vector<double> counts;

    double total_counts() const;
};

struct SolverOptions {
    double tol = 1e-8;            // fixed-point residual in trace norm
    long max_iters = 100000;
    double gain_tol = 1e-10;      // log-likelihood gain threshold
};

struct EstimationResult {
    DensityMatrix rho_hat;
    double log_likelihood = 0.0;
    long iterations = 0;
    double residual = 0.0;  // fixed-point defect at exit
    bool converged = false;
    double min_step_gain = 0.0;       // smallest accepted log-likelihood gain
    bool possibly_non_unique = false;  // set by strategy2 on incomplete data
};

/// p_l = tr(rho Pi_l) clamped at >= 0, and eta = sum p_l.
std::pair<std::vector<double>, double> probabilities(
    const DensityMatrix& rho, const std::vector<PovmElement>& outcomes);

/// sum_l n_l log(p_l / eta) with zero counts contributing zero. Returns
/// nullopt when some n_l > 0 sits on p_l = 0 (likelihood is zero).
std::optional<double> log_likelihood(const LikelihoodSpec& spec, const DensityMatrix& rho);

/// Maximizes the eta-normalized likelihood over density matrices via the
/// G^(-1/2) reduction to a complete POM followed by the (diluted when needed)
/// R-sigma-R fixed-point iteration from the maximally mixed start.
EstimationResult ml_estimate(const LikelihoodSpec& spec, const SolverOptions& options = {});

// Strategy wrappers.
EstimationResult strategy1(const Counts& counts, const MeasurementSetup& setup,
                           const SolverOptions& options = {});
EstimationResult strategy2(const Counts& counts, const MeasurementSetup& setup,
                           const SolverOptions& options = {});
EstimationResult strategy3(const Counts& counts, const MeasurementSetup& setup,
                           double t = 1.0, const SolverOptions& options = {});
/// ML on the actually measured outcomes; available in simulation only.
EstimationResult reference_estimate(const Counts& counts, const MeasurementSetup& setup,
                                    const SolverOptions& options = {});

}  // namespace tomocg::mle
