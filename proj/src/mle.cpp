#include "tomocg/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tomocg::mle {

double LikelihoodSpec::total_counts() const {
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

std::pair<std::vector<double>, double> probabilities(
    const DensityMatrix& rho, const std::vector<PovmElement>& outcomes) {
    std::vector<double> p(outcomes.size());
    double eta = 0.0;
    for (std::size_t l = 0; l < outcomes.size(); ++l) {
        if (outcomes[l].dim() != rho.dim()) {
            throw qops::ValidationError("probabilities: dimension mismatch");
        }
        p[l] = std::max(0.0, (rho.matrix() * outcomes[l].matrix()).trace().real());
        eta += p[l];
    }
    return {std::move(p), eta};
}

std::optional<double> log_likelihood(const LikelihoodSpec& spec, const DensityMatrix& rho) {
    const auto [p, eta] = probabilities(rho, spec.outcomes);
    if (eta <= 0.0) return std::nullopt;
    double ll = 0.0;
    for (std::size_t l = 0; l < p.size(); ++l) {
        if (spec.counts[l] > 0.0) {
            if (p[l] <= 0.0) return std::nullopt;
            ll += spec.counts[l] * std::log(p[l] / eta);
        }
    }
    return ll;
}

namespace {

constexpr double kProbFloor = 1e-300;

double trace_norm(const Matrix& m) {
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues().sum();
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.adjoint().eval()); }

// Plain log-likelihood of the reduced (complete-POM) problem, accumulated in
// extended precision: step acceptance compares values whose difference can sit
// far below the double rounding noise of a ~1e4-magnitude sum.
long double reduced_loglik(const Matrix& sigma, const std::vector<Matrix>& outcomes,
                           const std::vector<double>& counts) {
    const Eigen::Index dim = sigma.rows();
    long double ll = 0.0L;
    // Normalize by tr(sigma): states carry a trace of 1 +- machine epsilon
    // after double renormalization, and with sum(Pi) = 1 that alone shifts the
    // raw sum by ~total * eps, swamping step-acceptance comparisons.
    long double total = 0.0L;
    long double trace = 0.0L;
    for (Eigen::Index i = 0; i < dim; ++i) {
        trace += static_cast<long double>(sigma(i, i).real());
    }
    for (std::size_t l = 0; l < outcomes.size(); ++l) {
        if (counts[l] > 0.0) {
            long double q = 0.0L;  // Re tr(sigma * Pi), both Hermitian
            for (Eigen::Index i = 0; i < dim; ++i) {
                for (Eigen::Index j = 0; j < dim; ++j) {
                    const auto& a = sigma(i, j);
                    const auto& b = outcomes[l](j, i);
                    q += static_cast<long double>(a.real()) * b.real()
                        - static_cast<long double>(a.imag()) * b.imag();
                }
            }
            q = std::max(q, static_cast<long double>(kProbFloor));
            ll += static_cast<long double>(counts[l]) * std::log(q);
            total += static_cast<long double>(counts[l]);
        }
    }
    if (trace > 0.0L) ll -= total * std::log(trace);
    return ll;
}

}  // namespace

EstimationResult ml_estimate(const LikelihoodSpec& spec, const SolverOptions& options) {
    if (spec.outcomes.empty() || spec.outcomes.size() != spec.counts.size()) {
        throw qops::ValidationError("ml_estimate: outcomes and counts must match and be non-empty");
    }
    for (const double n : spec.counts) {
        if (n < 0.0) throw qops::ValidationError("ml_estimate: negative count");
    }
    const double total = spec.total_counts();
    if (total <= 0.0) throw qops::ValidationError("ml_estimate: all counts are zero");

    const Eigen::Index dim = spec.outcomes.front().dim();
    Matrix g_sum = Matrix::Zero(dim, dim);
    for (const auto& pi : spec.outcomes) g_sum += pi.matrix();
    const qops::EighResult g_ed = qops::eigh(g_sum);
    if (g_ed.eigenvalues.minCoeff() <= 0.0 ||
        g_ed.eigenvalues.maxCoeff() / g_ed.eigenvalues.minCoeff() > 1e12) {
        throw std::runtime_error(
            "ml_estimate: outcome sum G is numerically singular; "
            "restrict the state support to the range of G first");
    }
    const Matrix g_inv_sqrt = g_ed.eigenvectors
        * g_ed.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal()
        * g_ed.eigenvectors.adjoint();

    // Reduced outcomes sum to the identity, so the eta-normalized likelihood
    // in rho becomes a plain likelihood in sigma = G^(1/2) rho G^(1/2) / tr.
    std::vector<Matrix> reduced(spec.outcomes.size());
    for (std::size_t l = 0; l < spec.outcomes.size(); ++l) {
        reduced[l] = symmetrized(g_inv_sqrt * spec.outcomes[l].matrix() * g_inv_sqrt);
    }

    Matrix sigma = Matrix::Identity(dim, dim) / static_cast<double>(dim);
    long double ll = reduced_loglik(sigma, reduced, spec.counts);
    double last_gain = std::numeric_limits<double>::infinity();
    double min_gain = std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    long iters = 0;

    // With the extended-precision likelihood, differences are trustworthy down
    // to ~1e-14; this slack absorbs its rounding while keeping every accepted
    // step non-decreasing far inside the 1e-12 monotonicity contract.
    constexpr long double kLlSlack = 1e-13L;

    const auto compute_r = [&](const Matrix& s) {
        Matrix r_op = Matrix::Zero(dim, dim);
        for (std::size_t l = 0; l < reduced.size(); ++l) {
            if (spec.counts[l] > 0.0) {
                const double q = std::max(kProbFloor, (s * reduced[l]).trace().real());
                r_op += (spec.counts[l] / q) * reduced[l];
            }
        }
        return Matrix(r_op / total);
    };

    const auto residual_of = [&](const Matrix& s) {
        return trace_norm(compute_r(s) * s - s);
    };

    // One monotone fixed-point step: the full R sigma R update when it
    // ascends, otherwise the diluted (I + eps (R - 1)) sigma (...) form with
    // eps halved until ascent; eps = 1 reproduces the full step exactly.
    const auto advance = [&](const Matrix& s, long double ll_s) {
        const Matrix r_op = compute_r(s);
        ++iters;
        Matrix candidate = symmetrized(r_op * s * r_op);
        candidate /= candidate.trace().real();
        long double ll_new = reduced_loglik(candidate, reduced, spec.counts);
        if (ll_new < ll_s - kLlSlack) {
            const Matrix r_bar = r_op - Matrix::Identity(dim, dim);
            double eps = 0.5;
            for (; eps > 1e-12; eps *= 0.5) {
                const Matrix step = Matrix::Identity(dim, dim) + eps * r_bar;
                Matrix diluted = symmetrized(step * s * step.adjoint());
                diluted /= diluted.trace().real();
                const long double ll_diluted = reduced_loglik(diluted, reduced, spec.counts);
                if (ll_diluted >= ll_s - kLlSlack) {
                    candidate = std::move(diluted);
                    ll_new = ll_diluted;
                    break;
                }
            }
            if (eps <= 1e-12) return std::make_pair(Matrix(s), ll_s);  // stationary
        }
        return std::make_pair(std::move(candidate), ll_new);
    };

    const auto as_state = [&](const Matrix& m) {
        const qops::EighResult ed = qops::eigh(qops::HermitianOperator(symmetrized(m)));
        Matrix psd = ed.eigenvectors * ed.eigenvalues.cwiseMax(0.0).asDiagonal()
            * ed.eigenvectors.adjoint();
        const double tr = psd.trace().real();
        if (tr <= 0.0) return Matrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
        return Matrix(psd / tr);
    };

    // Trust-region Newton step on the trace-constrained likelihood; quadratic
    // local convergence takes over where the fixed-point map contracts too
    // slowly. Two structural traps are handled explicitly:
    //  - The maximum often sits on the boundary of the state set. A model
    //    built on the full Hermitian space keeps pushing the (near-)zero
    //    eigenvalues negative; the PSD clip then eats most of the predicted
    //    gain and the iteration micro-creeps. The model is therefore
    //    restricted to the face spanned by the eigenvectors of sigma with
    //    non-negligible eigenvalues.
    //  - The Hessian can have a near-null direction (a long flat valley) where
    //    the full Newton step overshoots the region where the quadratic model
    //    holds; the step is shortened to an adaptive radius by a
    //    Levenberg-Marquardt shift.
    // Returns 0 when no acceptable step exists, 1 on an accepted step whose
    // gain tracks the model, and 2 on an accepted step with a poor model
    // ratio (progress, but the fixed-point map should keep working too).
    double trust_radius = 0.25;
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    const auto try_newton = [&]() -> int {
        ++iters;
        const qops::EighResult sd = qops::eigh(qops::HermitianOperator(sigma));
        const double face_tol =
            1e-12 * std::max(sd.eigenvalues.maxCoeff(), 1e-300);
        std::vector<Eigen::Index> keep;
        std::vector<Eigen::Index> null_space;
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (sd.eigenvalues(i) > face_tol) keep.push_back(i);
            else null_space.push_back(i);
        }
        const Eigen::Index rank = static_cast<Eigen::Index>(keep.size());
        if (rank < 1) return 0;

        // Orthonormal Hermitian basis of the feasible directions at sigma:
        // the face block itself, plus the support <-> null rotations (which
        // move the support subspace; they leave the PSD cone only at second
        // order, unlike growth of the null diagonal block, which is excluded
        // because the model invariably pushes it negative).
        std::vector<Matrix> basis;
        basis.reserve(rank * rank + 2 * rank * (dim - rank));
        for (Eigen::Index i = 0; i < rank; ++i) {
            const auto vi = sd.eigenvectors.col(keep[i]);
            basis.push_back(vi * vi.adjoint());
        }
        const auto push_pair = [&](Eigen::Index a, Eigen::Index b) {
            const Matrix outer =
                sd.eigenvectors.col(a) * sd.eigenvectors.col(b).adjoint();
            basis.push_back(inv_sqrt2 * (outer + outer.adjoint()));
            basis.push_back(std::complex<double>(0.0, inv_sqrt2)
                            * (outer - outer.adjoint()));
        };
        for (Eigen::Index i = 0; i < rank; ++i) {
            for (Eigen::Index j = i + 1; j < rank; ++j) {
                push_pair(keep[i], keep[j]);
            }
        }
        for (Eigen::Index i = 0; i < rank; ++i) {
            for (const Eigen::Index n : null_space) push_pair(keep[i], n);
        }
        const Eigen::Index n_basis = static_cast<Eigen::Index>(basis.size());
        if (n_basis < 2) return 0;  // nothing to optimize beyond the trace

        Eigen::VectorXd grad = Eigen::VectorXd::Zero(n_basis);
        for (Eigen::Index a = 0; a < rank; ++a) grad(a) = -total;
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n_basis, n_basis);
        Eigen::VectorXd col(n_basis);
        for (std::size_t l = 0; l < reduced.size(); ++l) {
            if (spec.counts[l] <= 0.0) continue;
            const double q =
                std::max(kProbFloor, (sigma * reduced[l]).trace().real());
            for (Eigen::Index a = 0; a < n_basis; ++a) {
                col(a) = (basis[a] * reduced[l]).trace().real();
            }
            grad += (spec.counts[l] / q) * col;
            hess -= (spec.counts[l] / (q * q)) * col * col.transpose();
        }

        // Orthonormal basis of the traceless subspace of the face: complete
        // the trace vector to a frame and drop its first column.
        Eigen::VectorXd trace_vec = Eigen::VectorXd::Zero(n_basis);
        trace_vec.head(rank).setOnes();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(trace_vec);
        const Eigen::MatrixXd traceless =
            Eigen::MatrixXd(qr.householderQ()).rightCols(n_basis - 1);

        const Eigen::VectorXd g_red = traceless.transpose() * grad;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
            traceless.transpose() * hess * traceless);
        if (es.info() != Eigen::Success) return 0;
        const Eigen::VectorXd& lam = es.eigenvalues();
        const Eigen::VectorXd g_eig = es.eigenvectors().transpose() * g_red;
        // Shifted step in the Hessian eigenbasis; the shift tau >= 0 both
        // regularizes indefinite/near-singular curvature and shrinks the step.
        const auto step_for = [&](double tau) {
            Eigen::VectorXd y(lam.size());
            for (Eigen::Index i = 0; i < lam.size(); ++i) {
                const double denom = lam(i) - tau;
                y(i) = (denom < -1e-300) ? -g_eig(i) / denom : 0.0;
            }
            return y;
        };
        trust_radius = std::clamp(trust_radius, 1e-4, 1e3);
        for (int attempt = 0; attempt < 8; ++attempt) {
            Eigen::VectorXd y = step_for(0.0);
            if (!y.allFinite() || y.norm() > trust_radius) {
                double lo = 0.0, hi = 1.0;
                while (hi < 1e300 && step_for(hi).norm() > trust_radius) hi *= 4.0;
                for (int b = 0; b < 80; ++b) {
                    const double mid = 0.5 * (lo + hi);
                    (step_for(mid).norm() > trust_radius ? lo : hi) = mid;
                }
                y = step_for(hi);
            }
            const Eigen::VectorXd delta =
                traceless * (es.eigenvectors() * y);
            Matrix direction = Matrix::Zero(dim, dim);
            for (Eigen::Index a = 0; a < n_basis; ++a) {
                direction += delta(a) * basis[a];
            }
            const Matrix candidate = as_state(sigma + direction);
            const long double ll_candidate =
                reduced_loglik(candidate, reduced, spec.counts);
            const double actual = static_cast<double>(ll_candidate - ll);
            // Accept on a gain that clears the likelihood rounding noise, or
            // on a noise-level step that still shrinks the stationarity
            // residual substantially (the terminal polish, where the
            // likelihood is flat to working precision). Noise-level "ascents"
            // without residual progress would otherwise spin forever.
            const bool meaningful_gain = actual > static_cast<double>(kLlSlack);
            const bool terminal_polish = !meaningful_gain &&
                ll_candidate >= ll - kLlSlack &&
                residual_of(candidate) < 0.7 * residual;
            if (meaningful_gain || terminal_polish) {
                double predicted = 0.0;
                for (Eigen::Index i = 0; i < lam.size(); ++i) {
                    predicted += g_eig(i) * y(i) + 0.5 * lam(i) * y(i) * y(i);
                }
                const bool model_good =
                    predicted > 0.0 && actual > 0.5 * predicted;
                if (model_good) trust_radius = std::min(1e3, 2.0 * trust_radius);
                last_gain = actual;
                min_gain = std::min(min_gain, last_gain);
                sigma = candidate;
                ll = ll_candidate;
                return model_good ? 1 : 2;
            }
            trust_radius *= 0.25;
            if (trust_radius < 1e-4) return 0;
        }
        return 0;
    };

    // A zeroed eigenvalue is invisible to both the multiplicative fixed-point
    // map and the face-restricted Newton model, and R sigma = sigma holds on
    // any collapsed face; global optimality additionally needs the null
    // directions to satisfy v' R v <= 1. When a direction was closed
    // prematurely, mix a small feasible amount of it back in (an ascent
    // direction to first order; backtracking keeps monotonicity) and resume.
    const auto reopen_closed_directions = [&]() {
        const qops::EighResult sd = qops::eigh(qops::HermitianOperator(sigma));
        const Matrix r_op = compute_r(sigma);
        for (Eigen::Index i = 0; i < dim; ++i) {
            if (sd.eigenvalues(i) >= 1e-10) continue;
            const auto v = sd.eigenvectors.col(i);
            const double rv = (v.adjoint() * r_op * v)(0, 0).real();
            if (rv <= 1.0 + 10.0 * options.tol) continue;
            for (double delta = 1e-4; delta > 1e-14; delta *= 0.5) {
                const Matrix candidate = as_state(
                    (1.0 - delta) * sigma + delta * (v * v.adjoint()));
                const long double ll_candidate =
                    reduced_loglik(candidate, reduced, spec.counts);
                if (ll_candidate >= ll - kLlSlack) {
                    last_gain = static_cast<double>(ll_candidate - ll);
                    min_gain = std::min(min_gain, last_gain);
                    sigma = candidate;
                    ll = ll_candidate;
                    return true;
                }
            }
        }
        return false;
    };

    int newton_cooldown = 0;
    int newton_backoff = 1;
    while (iters < options.max_iters) {
        residual = residual_of(sigma);
        if (residual < options.tol && last_gain < options.gain_tol) {
            if (reopen_closed_directions()) continue;
            converged = true;
            break;
        }

        // Exponential cooldown after failed attempts keeps the cost of the
        // Newton machinery negligible while the fixed-point map is doing the
        // global work.
        if (residual < 1e-3 && newton_cooldown == 0) {
            const int newton = try_newton();
            if (newton == 1) {
                newton_backoff = 1;
                continue;
            }
            if (newton == 0) {
                newton_cooldown = newton_backoff;
                newton_backoff = std::min(256, 2 * newton_backoff);
            }
            // newton == 2: the step helped but the model mistrusts the
            // region (e.g. boundary clipping); let the fixed-point map keep
            // contributing instead of spinning on short Newton steps.
        } else if (newton_cooldown > 0) {
            --newton_cooldown;
        }

        // Squared-extrapolation acceleration of the fixed point: two base
        // steps, then the Steffensen-type combination when it still ascends.
        const auto [sigma1, ll1] = advance(sigma, ll);
        const auto [sigma2, ll2] = advance(sigma1, ll1);
        Matrix best = sigma2;
        long double ll_best = ll2;

        const Matrix delta = sigma1 - sigma;
        const Matrix curvature = sigma2 - 2.0 * sigma1 + sigma;
        const double curvature_norm = curvature.norm();
        if (curvature_norm > 1e-300) {
            const double alpha = -delta.norm() / curvature_norm;
            const Matrix extrapolated =
                as_state(sigma - 2.0 * alpha * delta + alpha * alpha * curvature);
            const long double ll_extra = reduced_loglik(extrapolated, reduced, spec.counts);
            if (ll_extra > ll_best) {
                const auto [polished, ll_polished] = advance(extrapolated, ll_extra);
                if (ll_polished > ll_best) {
                    best = polished;
                    ll_best = ll_polished;
                }
            }
        }

        last_gain = static_cast<double>(ll_best - ll);
        min_gain = std::min(min_gain, last_gain);
        sigma = std::move(best);
        ll = ll_best;
    }

    Matrix rho = symmetrized(g_inv_sqrt * sigma * g_inv_sqrt);
    rho /= rho.trace().real();
    rho = qops::psd_project(qops::HermitianOperator(std::move(rho))).matrix();
    rho /= rho.trace().real();

    EstimationResult result{DensityMatrix(std::move(rho))};
    result.iterations = iters;
    result.residual = residual;
    result.converged = converged;
    result.min_step_gain = std::isfinite(min_gain) ? min_gain : 0.0;
    result.log_likelihood = log_likelihood(spec, result.rho_hat)
        .value_or(-std::numeric_limits<double>::infinity());
    return result;
}

namespace {

LikelihoodSpec intended_spec(const MeasurementSetup& setup, std::vector<double> counts) {
    LikelihoodSpec spec;
    spec.outcomes.reserve(setup.m_total);
    for (const auto& pi : setup.well) spec.outcomes.push_back(pi);
    for (const auto& pi : setup.intended) spec.outcomes.push_back(pi);
    spec.counts = std::move(counts);
    return spec;
}

std::vector<double> raw_counts(const Counts& counts) {
    std::vector<double> all(counts.well.begin(), counts.well.end());
    all.insert(all.end(), counts.ill.begin(), counts.ill.end());
    return all;
}

}  // namespace

EstimationResult strategy1(const Counts& counts, const MeasurementSetup& setup,
                           const SolverOptions& options) {
    return ml_estimate(intended_spec(setup, raw_counts(counts)), options);
}

EstimationResult strategy2(const Counts& counts, const MeasurementSetup& setup,
                           const SolverOptions& options) {
    if (setup.m_well < 1) {
        throw std::runtime_error(
            "strategy2: no well-calibrated outcomes, this strategy cannot be used");
    }
    LikelihoodSpec spec;
    spec.outcomes.assign(setup.well.begin(), setup.well.end());
    spec.counts.assign(counts.well.begin(), counts.well.end());
    EstimationResult result = ml_estimate(spec, options);
    result.possibly_non_unique = randgen::gram_rank(setup.well) < setup.dim * setup.dim;
    return result;
}

EstimationResult strategy3(const Counts& counts, const MeasurementSetup& setup,
                           double t, const SolverOptions& options) {
    const mwe::CoarseGrainedCounts cg = mwe::mwe_counts(counts, t);
    std::vector<double> all(cg.well.begin(), cg.well.end());
    all.insert(all.end(), cg.ill.begin(), cg.ill.end());
    return ml_estimate(intended_spec(setup, std::move(all)), options);
}

EstimationResult reference_estimate(const Counts& counts, const MeasurementSetup& setup,
                                    const SolverOptions& options) {
    LikelihoodSpec spec;
    spec.outcomes.reserve(setup.m_total);
    for (const auto& pi : setup.well) spec.outcomes.push_back(pi);
    for (const auto& pi : setup.actual_ill) spec.outcomes.push_back(pi);
    spec.counts = raw_counts(counts);
    return ml_estimate(spec, options);
}

}  // namespace tomocg::mle
