#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "tomocg/qops.hpp"

namespace tomocg::randgen {

using qops::DensityMatrix;
using qops::Matrix;
using qops::PovmElement;

/// Deterministic per-task seeding: a master seed plus a tuple of stream
/// indices is folded through an avalanche mixer into one generator seed, so
/// tasks can be scheduled in any order and still reproduce.
struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint32_t state_index = 0;
    std::uint32_t mu_index = 0;
    std::uint32_t experiment_index = 0;
    std::uint32_t purpose = 0;

    std::uint64_t derive() const;
    std::mt19937_64 engine() const { return std::mt19937_64(derive()); }
};

/// splitmix64 finalizer; used to fold stream indices into the master seed.
std::uint64_t mix64(std::uint64_t x);

/// Complete measurement description: well-calibrated outcomes, intended
/// outcomes for the ill part, and the actually-measured ill outcomes.
struct MeasurementSetup {
    int dim = 0;
    int m_total = 0;
    int m_well = 0;
    std::vector<PovmElement> well;        // size m_well
    std::vector<PovmElement> intended;    // size m_total - m_well
    std::vector<PovmElement> actual_ill;  // size m_total - m_well
    double scale = 1.0;                   // uniform rescaling applied to every outcome
    double mu = 0.0;

    int m_ill() const { return m_total - m_well; }
};

/// |psi><psi| for a normalized vector of iid standard complex Gaussians.
DensityMatrix haar_pure_state(int dim, const SeedSpec& seed);

/// G G^dag / tr(G G^dag) for a square Ginibre matrix G (Hilbert-Schmidt measure).
DensityMatrix hs_random_state(int dim, const SeedSpec& seed);

/// M Haar-random rank-one outcomes conjugated by S^(-1/2) so they sum to the
/// identity. Requires M >= dim^2 for informational completeness.
std::vector<PovmElement> random_rank1_pom(int dim, int m, const SeedSpec& seed);

/// Mixes Hilbert-Schmidt noise states into the last M - m_well outcomes of a
/// complete POM and rescales everything so the largest eigenvalue of the
/// total outcome sum is exactly 1.
MeasurementSetup perturb_pom(const std::vector<PovmElement>& clean, int m_well,
                             double mu, const SeedSpec& seed);

/// Rank of the M x dim^2 Gram matrix of vectorized outcomes (singular values
/// above tol relative to the largest).
int gram_rank(const std::vector<PovmElement>& outcomes, double tol = 1e-8);

}  // namespace tomocg::randgen
