#include "tomocg/mwe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tomocg::mwe {

double weighted_entropy(const std::vector<double>& weights,
                        const std::vector<double>& nu_prime) {
    if (weights.size() != nu_prime.size()) {
        throw std::invalid_argument("weighted_entropy: length mismatch");
    }
    double h = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double nu = nu_prime[k];
        if (nu < 0.0) throw std::invalid_argument("weighted_entropy: negative frequency");
        if (weights[k] > 0.0 && nu > 0.0) {
            h -= weights[k] * nu * std::log(nu);
        }
    }
    return h;
}

namespace {

struct Stationarity {
    std::vector<double> weights;  // positive-support weights, packed

    double g(double lambda) const {
        double s = -1.0;
        for (const double w : weights) s += std::exp(-1.0 - lambda / w);
        return s;
    }
    double dg(double lambda) const {
        double s = 0.0;
        for (const double w : weights) s -= std::exp(-1.0 - lambda / w) / w;
        return s;
    }
};

double solve_lambda(const Stationarity& st) {
    const double w_max = *std::max_element(st.weights.begin(), st.weights.end());
    const double limit = 1e6 * w_max;

    // g is strictly decreasing; pick the bracket side from g(0) = M/e - 1.
    double lo = 0.0, hi = 0.0;
    if (st.g(0.0) > 0.0) {
        hi = 1.0;
        while (st.g(hi) > 0.0) {
            hi *= 2.0;
            if (hi > limit) throw std::runtime_error("mwe: bracket expansion failed");
        }
    } else {
        lo = -1.0;
        while (st.g(lo) < 0.0) {
            lo *= 2.0;
            if (-lo > limit) throw std::runtime_error("mwe: bracket expansion failed");
        }
    }

    double lambda = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lambda)); ++iter) {
        lambda = 0.5 * (lo + hi);
        const double value = st.g(lambda);
        if (std::abs(value) < 1e-12) break;
        if (value > 0.0) {
            lo = lambda;
        } else {
            hi = lambda;
        }
    }
    for (int polish = 0; polish < 5; ++polish) {
        const double value = st.g(lambda);
        const double slope = st.dg(lambda);
        if (slope == 0.0 || !std::isfinite(value)) break;
        lambda -= value / slope;
    }
    if (std::abs(st.g(lambda)) > 1e-10) {
        throw std::runtime_error("mwe: Lagrange multiplier did not converge");
    }
    return lambda;
}

}  // namespace

MweSolution mwe_frequencies(const std::vector<double>& ill_counts, double t) {
    double n_ill = 0.0;
    for (const double c : ill_counts) {
        if (c < 0.0) throw std::invalid_argument("mwe: negative count");
        n_ill += c;
    }
    if (n_ill <= 0.0) throw std::invalid_argument("mwe: all counts are zero");

    const std::size_t m = ill_counts.size();
    std::vector<double> weights(m, 0.0);
    std::vector<std::size_t> support;
    for (std::size_t k = 0; k < m; ++k) {
        if (ill_counts[k] > 0.0) {
            weights[k] = std::pow(ill_counts[k] / n_ill, t);
            support.push_back(k);
        }
    }

    MweSolution sol;
    sol.t = t;
    sol.nu.assign(m, 0.0);
    if (support.size() == 1) {
        sol.nu[support.front()] = 1.0;
        sol.lambda = -weights[support.front()];
    } else {
        Stationarity st;
        st.weights.reserve(support.size());
        for (const auto k : support) st.weights.push_back(weights[k]);
        sol.lambda = solve_lambda(st);
        double total = 0.0;
        for (const auto k : support) {
            sol.nu[k] = std::exp(-1.0 - sol.lambda / weights[k]);
            total += sol.nu[k];
        }
        for (const auto k : support) sol.nu[k] /= total;  // absorb residual root error
    }
    sol.n_mwe.resize(m);
    for (std::size_t k = 0; k < m; ++k) sol.n_mwe[k] = n_ill * sol.nu[k];
    return sol;
}

CoarseGrainedCounts mwe_counts(const sampler::Counts& counts, double t) {
    CoarseGrainedCounts cg;
    cg.well = counts.well;
    if (counts.total_ill() == 0) {
        cg.ill.assign(counts.ill.size(), 0.0);
        return cg;
    }
    std::vector<double> ill(counts.ill.begin(), counts.ill.end());
    cg.ill = mwe_frequencies(ill, t).n_mwe;
    return cg;
}

}  // namespace tomocg::mwe
