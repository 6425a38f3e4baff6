#include "tomocg/randgen.hpp"

#include <cmath>
#include <sstream>

namespace tomocg::randgen {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t SeedSpec::derive() const {
    std::uint64_t s = mix64(master_seed);
    s = mix64(s ^ state_index);
    s = mix64(s ^ mu_index);
    s = mix64(s ^ experiment_index);
    s = mix64(s ^ purpose);
    return s;
}

namespace {

Matrix ginibre(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix g(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const double re = normal(rng);
            const double im = normal(rng);
            g(r, c) = qops::Complex(re, im);
        }
    }
    return g;
}

void require_dim(int dim) {
    if (dim < 2) throw qops::ValidationError("dimension must be at least 2");
}

}  // namespace

DensityMatrix haar_pure_state(int dim, const SeedSpec& seed) {
    require_dim(dim);
    auto rng = seed.engine();
    Eigen::VectorXcd psi = ginibre(dim, 1, rng);
    psi.normalize();
    return DensityMatrix(psi * psi.adjoint());
}

DensityMatrix hs_random_state(int dim, const SeedSpec& seed) {
    require_dim(dim);
    auto rng = seed.engine();
    const Matrix g = ginibre(dim, dim, rng);
    Matrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    return DensityMatrix(std::move(rho));
}

std::vector<PovmElement> random_rank1_pom(int dim, int m, const SeedSpec& seed) {
    require_dim(dim);
    if (m < dim * dim) {
        throw qops::ValidationError("need at least dim^2 outcomes for completeness");
    }
    auto rng = seed.engine();
    constexpr int kMaxRedraws = 100;
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        std::vector<Eigen::VectorXcd> vecs(m);
        Matrix sum = Matrix::Zero(dim, dim);
        for (int l = 0; l < m; ++l) {
            Eigen::VectorXcd v = ginibre(dim, 1, rng);
            v.normalize();
            sum += v * v.adjoint();
            vecs[l] = std::move(v);
        }
        const qops::EighResult ed = qops::eigh(sum);
        if (ed.eigenvalues.minCoeff() <= 0.0 ||
            ed.eigenvalues.maxCoeff() / ed.eigenvalues.minCoeff() > 1e12) {
            continue;  // numerically singular frame, redraw
        }
        const Matrix inv_sqrt = ed.eigenvectors
            * ed.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal()
            * ed.eigenvectors.adjoint();
        std::vector<PovmElement> pom;
        pom.reserve(m);
        for (int l = 0; l < m; ++l) {
            const Eigen::VectorXcd w = inv_sqrt * vecs[l];
            pom.emplace_back(Matrix(w * w.adjoint()));
        }
        return pom;
    }
    throw std::runtime_error("random_rank1_pom: frame stayed singular after 100 redraws");
}

MeasurementSetup perturb_pom(const std::vector<PovmElement>& clean, int m_well,
                             double mu, const SeedSpec& seed) {
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw qops::ValidationError("noise level mu must lie in [0, 1]");
    }
    const int m_total = static_cast<int>(clean.size());
    if (m_well < 0 || m_well > m_total || m_total == 0) {
        throw qops::ValidationError("invalid well-calibrated outcome count");
    }
    const int dim = static_cast<int>(clean.front().dim());
    const int m_ill = m_total - m_well;

    std::vector<Matrix> perturbed(m_ill);
    Matrix total = Matrix::Zero(dim, dim);
    for (int j = 0; j < m_well; ++j) total += clean[j].matrix();
    for (int k = 0; k < m_ill; ++k) {
        SeedSpec noise_seed = seed;
        noise_seed.purpose = mix64(seed.purpose ^ (0x6e6f6973ULL + k)) & 0xffffffffu;
        const DensityMatrix rho_noise = hs_random_state(dim, noise_seed);
        perturbed[k] = (1.0 - mu) * clean[m_well + k].matrix() + mu * rho_noise.matrix();
        total += perturbed[k];
    }

    Eigen::SelfAdjointEigenSolver<Matrix> es(total, Eigen::EigenvaluesOnly);
    const double scale = 1.0 / es.eigenvalues().maxCoeff();

    MeasurementSetup setup;
    setup.dim = dim;
    setup.m_total = m_total;
    setup.m_well = m_well;
    setup.scale = scale;
    setup.mu = mu;
    setup.well.reserve(m_well);
    setup.intended.reserve(m_ill);
    setup.actual_ill.reserve(m_ill);
    for (int j = 0; j < m_well; ++j) {
        setup.well.emplace_back(Matrix(scale * clean[j].matrix()));
    }
    for (int k = 0; k < m_ill; ++k) {
        setup.intended.emplace_back(Matrix(scale * clean[m_well + k].matrix()));
        setup.actual_ill.emplace_back(Matrix(scale * perturbed[k]));
    }
    return setup;
}

int gram_rank(const std::vector<PovmElement>& outcomes, double tol) {
    if (outcomes.empty()) return 0;
    const int dim = static_cast<int>(outcomes.front().dim());
    Matrix gram(static_cast<int>(outcomes.size()), dim * dim);
    for (std::size_t l = 0; l < outcomes.size(); ++l) {
        const Matrix& p = outcomes[l].matrix();
        for (int i = 0; i < dim * dim; ++i) {
            gram(static_cast<int>(l), i) = p(i / dim, i % dim);
        }
    }
    Eigen::JacobiSVD<Matrix> svd(gram);
    const auto& sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i) {
        if (sv(i) > tol * sv(0)) ++rank;
    }
    return rank;
}

}  // namespace tomocg::randgen
