#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "tomocg/randgen.hpp"

namespace tomocg::sampler {

using randgen::MeasurementSetup;
using randgen::SeedSpec;

/// Detection record for one simulated experiment.
struct Counts {
    std::vector<std::int64_t> well;  // n^(w)_j
    std::vector<std::int64_t> ill;   // n^(i)_k

    std::int64_t total() const;
    std::int64_t total_ill() const;
};

/// Draws n clicks from the outcome distribution p_l / eta of the actual
/// outcomes (well then ill), conditional on detection.
Counts simulate_counts(const qops::DensityMatrix& rho_true, const MeasurementSetup& setup,
                       std::int64_t n, const SeedSpec& seed);

// CSV form: header "index,role,count", one row per outcome, well rows first.
void write_counts_csv(std::ostream& os, const Counts& counts);
Counts read_counts_csv(std::istream& is);
void save_counts_csv(const std::string& path, const Counts& counts);
Counts load_counts_csv(const std::string& path);

}  // namespace tomocg::sampler
