#include "tomocg/sampler.hpp"

#include <fstream>
#include <numeric>
#include <sstream>

namespace tomocg::sampler {

std::int64_t Counts::total() const {
    return std::accumulate(well.begin(), well.end(), std::int64_t{0})
         + std::accumulate(ill.begin(), ill.end(), std::int64_t{0});
}

std::int64_t Counts::total_ill() const {
    return std::accumulate(ill.begin(), ill.end(), std::int64_t{0});
}

Counts simulate_counts(const qops::DensityMatrix& rho_true, const MeasurementSetup& setup,
                       std::int64_t n, const SeedSpec& seed) {
    if (n < 1) throw qops::ValidationError("need at least one copy to sample");
    if (rho_true.dim() != setup.dim) {
        throw qops::ValidationError("state and measurement dimensions differ");
    }

    const int m_well = setup.m_well;
    const int m_total = setup.m_total;
    std::vector<double> p(m_total);
    for (int j = 0; j < m_well; ++j) {
        p[j] = (rho_true.matrix() * setup.well[j].matrix()).trace().real();
    }
    for (int k = 0; k < setup.m_ill(); ++k) {
        p[m_well + k] = (rho_true.matrix() * setup.actual_ill[k].matrix()).trace().real();
    }
    double eta = 0.0;
    for (double& pl : p) {
        if (pl < -1e-12) throw qops::ValidationError("negative outcome probability");
        if (pl < 0.0) pl = 0.0;
        eta += pl;
    }
    if (eta <= 0.0) throw qops::ValidationError("total detection probability is zero");

    std::vector<double> cdf(m_total);
    double acc = 0.0;
    for (int l = 0; l < m_total; ++l) {
        acc += p[l] / eta;
        cdf[l] = acc;
    }
    cdf[m_total - 1] = 1.0;

    auto rng = seed.engine();
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::vector<std::int64_t> tally(m_total, 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = uniform(rng);
        const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
        ++tally[it - cdf.begin()];
    }

    Counts counts;
    counts.well.assign(tally.begin(), tally.begin() + m_well);
    counts.ill.assign(tally.begin() + m_well, tally.end());
    return counts;
}

void write_counts_csv(std::ostream& os, const Counts& counts) {
    os << "index,role,count\n";
    int index = 0;
    for (const auto c : counts.well) os << index++ << ",well," << c << "\n";
    for (const auto c : counts.ill) os << index++ << ",ill," << c << "\n";
}

Counts read_counts_csv(std::istream& is) {
    Counts counts;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("index,", 0) == 0) continue;
        }
        std::istringstream row(line);
        std::string index, role, count;
        if (!std::getline(row, index, ',') || !std::getline(row, role, ',') ||
            !std::getline(row, count, ',')) {
            throw std::runtime_error("counts CSV: malformed row: " + line);
        }
        const double value = std::stod(count);
        if (role == "well") {
            counts.well.push_back(static_cast<std::int64_t>(std::llround(value)));
        } else if (role == "ill") {
            counts.ill.push_back(static_cast<std::int64_t>(std::llround(value)));
        } else {
            throw std::runtime_error("counts CSV: unknown role: " + role);
        }
    }
    return counts;
}

void save_counts_csv(const std::string& path, const Counts& counts) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_counts_csv(os, counts);
}

Counts load_counts_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_counts_csv(is);
}

}  // namespace tomocg::sampler
