#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "tomocg/mle.hpp"

using namespace tomocg;
using qops::Matrix;
using randgen::SeedSpec;

namespace {

mle::LikelihoodSpec complete_spec(std::uint64_t seed, const qops::DensityMatrix& rho,
                                  double n_copies) {
    mle::LikelihoodSpec spec;
    spec.outcomes = randgen::random_rank1_pom(4, 16, SeedSpec{seed});
    spec.counts.resize(spec.outcomes.size());
    for (std::size_t l = 0; l < spec.outcomes.size(); ++l) {
        spec.counts[l] = n_copies * (rho.matrix() * spec.outcomes[l].matrix()).trace().real();
    }
    return spec;
}

randgen::MeasurementSetup make_setup(std::uint64_t seed, double mu, int m_well = 0) {
    const auto clean = randgen::random_rank1_pom(4, 16, SeedSpec{seed});
    return randgen::perturb_pom(clean, m_well, mu, SeedSpec{seed, 0, 0, 0, 1});
}

}  // namespace

TEST_CASE("probabilities and eta") {
    const auto pom = randgen::random_rank1_pom(4, 16, SeedSpec{71});
    const auto mixed = qops::DensityMatrix{Matrix(0.25 * Matrix::Identity(4, 4))};
    auto [p, eta] = mle::probabilities(mixed, pom);
    CHECK(eta == doctest::Approx(1.0).epsilon(1e-10));  // complete POM
    for (std::size_t l = 0; l < pom.size(); ++l) {
        CHECK(p[l] == doctest::Approx(pom[l].matrix().trace().real() / 4.0).epsilon(1e-10));
    }

    const auto setup = make_setup(72, 0.3);
    const auto rho = randgen::hs_random_state(4, SeedSpec{72, 1});
    auto [p2, eta2] = mle::probabilities(rho, setup.actual_ill);
    Matrix sum = Matrix::Zero(4, 4);
    for (const auto& pi : setup.actual_ill) sum += pi.matrix();
    CHECK(eta2 == doctest::Approx((rho.matrix() * sum).trace().real()).epsilon(1e-10));
}

TEST_CASE("log likelihood conventions") {
    Matrix p0 = Matrix::Zero(2, 2), p1 = Matrix::Zero(2, 2);
    p0(0, 0) = 1.0;
    p1(1, 1) = 1.0;
    mle::LikelihoodSpec spec;
    spec.outcomes = {qops::PovmElement(p0), qops::PovmElement(p1)};
    spec.counts = {100.0, 0.0};
    const qops::DensityMatrix ground(p0);
    // all counts on an outcome with p/eta = 1
    CHECK(mle::log_likelihood(spec, ground).value() == doctest::Approx(0.0));

    // support violation is flagged, not thrown
    spec.counts = {0.0, 100.0};
    CHECK_FALSE(mle::log_likelihood(spec, ground).has_value());

    // doubling counts doubles the value
    const auto rho = randgen::hs_random_state(4, SeedSpec{73});
    auto full = complete_spec(73, rho, 1000.0);
    const auto probe = randgen::hs_random_state(4, SeedSpec{73, 1});
    const double once = mle::log_likelihood(full, probe).value();
    for (double& n : full.counts) n *= 2.0;
    CHECK(mle::log_likelihood(full, probe).value() == doctest::Approx(2.0 * once));
}

TEST_CASE("log likelihood agrees with direct product evaluation") {
    std::mt19937_64 rng(74);
    const auto setup = make_setup(74, 0.2, 3);
    mle::LikelihoodSpec spec;
    for (const auto& pi : setup.well) spec.outcomes.push_back(pi);
    for (const auto& pi : setup.actual_ill) spec.outcomes.push_back(pi);
    std::uniform_int_distribution<int> count_dist(0, 50);
    for (std::size_t l = 0; l < spec.outcomes.size(); ++l) {
        spec.counts.push_back(count_dist(rng));
    }
    const auto rho = randgen::hs_random_state(4, SeedSpec{74, 2});
    double direct = 0.0;
    double eta = 0.0;
    std::vector<double> p;
    for (const auto& pi : spec.outcomes) {
        p.push_back((rho.matrix() * pi.matrix()).trace().real());
        eta += p.back();
    }
    for (std::size_t l = 0; l < p.size(); ++l) {
        if (spec.counts[l] > 0) direct += spec.counts[l] * std::log(p[l] / eta);
    }
    CHECK(mle::log_likelihood(spec, rho).value() == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("exact frequencies recover the true state") {
    mle::SolverOptions tight;
    tight.tol = 1e-10;
    for (std::uint64_t seed = 80; seed < 90; ++seed) {
        const auto rho_true = randgen::hs_random_state(4, SeedSpec{seed});
        const auto spec = complete_spec(seed, rho_true, 8000.0);
        const auto result = mle::ml_estimate(spec, tight);
        CHECK(result.converged);
        CHECK(qops::trace_distance(result.rho_hat, rho_true) < 1e-6);
        CHECK(result.residual < 1e-8);
    }
}

TEST_CASE("single identity outcome leaves the maximally mixed start") {
    mle::LikelihoodSpec spec;
    spec.outcomes = {qops::PovmElement{Matrix(Matrix::Identity(4, 4))}};
    spec.counts = {500.0};
    const auto result = mle::ml_estimate(spec);
    CHECK(result.converged);
    CHECK((result.rho_hat.matrix() - 0.25 * Matrix::Identity(4, 4)).cwiseAbs().maxCoeff()
          < 1e-12);
}

TEST_CASE("likelihood optimum matches the gradient-ascent oracle") {
    const auto setup = make_setup(91, 0.3);
    const auto rho_true = randgen::haar_pure_state(4, SeedSpec{91, 1});
    const auto counts =
        sampler::simulate_counts(rho_true, setup, 8000, SeedSpec{91, 0, 0, 0, 2});
    const auto result = mle::reference_estimate(counts, setup);
    CHECK(result.converged);
    CHECK(result.residual < 1e-8);

    std::vector<Matrix> outcome_mats;
    std::vector<double> count_vals;
    for (const auto& pi : setup.actual_ill) outcome_mats.push_back(pi.matrix());
    for (const auto c : counts.ill) count_vals.push_back(static_cast<double>(c));
    const double oracle =
        oracles::mle_gradient_ascent_loglik(outcome_mats, count_vals, 12345);
    CHECK(std::abs(result.log_likelihood - oracle) < 1e-6);
}

TEST_CASE("monotone ascent on noisy instances") {
    std::mt19937_64 rng(92);
    for (int trial = 0; trial < 50; ++trial) {
        const auto setup = make_setup(920 + trial, 0.4);
        const auto rho_true = randgen::hs_random_state(4, SeedSpec{92, 1u + trial});
        const auto counts =
            sampler::simulate_counts(rho_true, setup, 2000, SeedSpec{92, 2u + trial});
        const auto result = mle::reference_estimate(counts, setup);
        // accepted steps may lose at most likelihood rounding noise
        CHECK(result.min_step_gain >= -1e-12);
        CHECK(result.converged);
    }
}

TEST_CASE("reduction keeps the likelihood value coherent") {
    // eta-normalized likelihood of rho equals, up to a constant, the plain
    // likelihood in sigma = G^(1/2) rho G^(1/2) / tr; checked through the
    // invariance of likelihood differences.
    const auto setup = make_setup(93, 0.25);
    mle::LikelihoodSpec spec;
    for (const auto& pi : setup.actual_ill) spec.outcomes.push_back(pi);
    const auto rho_true = randgen::hs_random_state(4, SeedSpec{93, 1});
    for (const auto& pi : spec.outcomes) {
        spec.counts.push_back(1000.0 * (rho_true.matrix() * pi.matrix()).trace().real());
    }
    Matrix g_sum = Matrix::Zero(4, 4);
    for (const auto& pi : spec.outcomes) g_sum += pi.matrix();
    const auto g_ed = qops::eigh(g_sum);
    const Matrix g_half = g_ed.eigenvectors * g_ed.eigenvalues.cwiseSqrt().asDiagonal()
        * g_ed.eigenvectors.adjoint();
    const Matrix g_inv_half = g_ed.eigenvectors
        * g_ed.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal()
        * g_ed.eigenvectors.adjoint();

    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto rho = randgen::hs_random_state(4, SeedSpec{93, 2, static_cast<std::uint32_t>(s)});
        Matrix sigma = g_half * rho.matrix() * g_half;
        sigma /= sigma.trace().real();
        double plain = 0.0;
        for (std::size_t l = 0; l < spec.outcomes.size(); ++l) {
            const Matrix reduced = g_inv_half * spec.outcomes[l].matrix() * g_inv_half;
            plain += spec.counts[l] * std::log((sigma * reduced).trace().real());
        }
        const double normalized = mle::log_likelihood(spec, rho).value();
        // constant offset must not depend on rho
        static double offset = 0.0;
        if (s == 0) {
            offset = normalized - plain;
        } else {
            CHECK(normalized - plain == doctest::Approx(offset).epsilon(1e-10));
        }
    }
}

TEST_CASE("frequency matching at the optimum") {
    const auto rho_true = randgen::hs_random_state(4, SeedSpec{94});
    const auto spec = complete_spec(94, rho_true, 8000.0);
    mle::SolverOptions tight;
    tight.tol = 1e-10;
    const auto result = mle::ml_estimate(spec, tight);
    const auto [p, eta] = mle::probabilities(result.rho_hat, spec.outcomes);
    const double total = spec.total_counts();
    for (std::size_t l = 0; l < p.size(); ++l) {
        if (spec.counts[l] > 0.0) {
            CHECK(std::abs(p[l] / eta - spec.counts[l] / total) < 1e-8);
        }
    }
}

TEST_CASE("strategies at mu = 0 coincide with the reference") {
    const auto setup = make_setup(95, 0.0);
    const auto rho_true = randgen::haar_pure_state(4, SeedSpec{95, 1});
    const auto counts = sampler::simulate_counts(rho_true, setup, 8000, SeedSpec{95, 2});
    const auto raw = mle::strategy1(counts, setup);
    const auto reference = mle::reference_estimate(counts, setup);
    CHECK(qops::trace_distance(raw.rho_hat, reference.rho_hat) < 1e-6);
}

TEST_CASE("uniform ill counts make strategy 3 equal strategy 1") {
    const auto setup = make_setup(96, 0.3, 4);
    sampler::Counts counts;
    counts.well = {120, 340, 90, 210};
    counts.ill.assign(12, 250);
    const auto raw = mle::strategy1(counts, setup);
    const auto cg = mle::strategy3(counts, setup);
    CHECK(qops::trace_distance(raw.rho_hat, cg.rho_hat) < 1e-6);
}

TEST_CASE("all three wrappers converge on a noisy instance") {
    const auto setup = make_setup(97, 0.3, 4);
    const auto rho_true = randgen::haar_pure_state(4, SeedSpec{97, 1});
    const auto counts = sampler::simulate_counts(rho_true, setup, 8000, SeedSpec{97, 2});
    for (const auto& result : {mle::strategy1(counts, setup), mle::strategy3(counts, setup),
                               mle::reference_estimate(counts, setup)}) {
        CHECK(result.converged);
        CHECK(result.residual < 1e-8);
    }
    const auto partial = mle::strategy2(counts, setup);
    CHECK(partial.possibly_non_unique);  // 4 outcomes cannot span 16 dimensions
}

TEST_CASE("strategy 2 needs well-calibrated outcomes") {
    const auto setup = make_setup(98, 0.3, 0);
    sampler::Counts counts;
    counts.ill.assign(16, 500);
    CHECK_THROWS(mle::strategy2(counts, setup));
}
