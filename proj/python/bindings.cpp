#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tomocg/experiment.hpp"
#include "tomocg/mle.hpp"
#include "tomocg/mwe.hpp"

namespace py = pybind11;
using namespace tomocg;

namespace {

std::vector<qops::PovmElement> to_elements(const std::vector<qops::Matrix>& mats) {
    std::vector<qops::PovmElement> elems;
    elems.reserve(mats.size());
    for (const auto& m : mats) elems.emplace_back(m);
    return elems;
}

std::vector<qops::Matrix> to_matrices(const std::vector<qops::PovmElement>& elems) {
    std::vector<qops::Matrix> mats;
    mats.reserve(elems.size());
    for (const auto& e : elems) mats.push_back(e.matrix());
    return mats;
}

randgen::SeedSpec seed_spec(std::uint64_t master, std::uint32_t state, std::uint32_t mu,
                            std::uint32_t experiment, std::uint32_t purpose) {
    return {master, state, mu, experiment, purpose};
}

}  // namespace

PYBIND11_MODULE(_tomocg, m) {
    m.doc() = "Coarse-grained quantum state tomography core";

    // qops
    m.def("eigh", [](const qops::Matrix& h) {
        const auto r = qops::eigh(h);
        return py::make_tuple(r.eigenvalues, r.eigenvectors);
    }, py::arg("hermitian"));
    m.def("trace_distance", [](const qops::Matrix& a, const qops::Matrix& b) {
        return qops::trace_distance(qops::DensityMatrix(a), qops::DensityMatrix(b));
    }, py::arg("a"), py::arg("b"));
    m.def("purity", [](const qops::Matrix& rho) {
        return qops::purity(qops::DensityMatrix(rho));
    }, py::arg("rho"));
    m.def("concurrence", [](const qops::Matrix& rho) {
        return qops::concurrence(qops::DensityMatrix(rho));
    }, py::arg("rho"));
    m.def("admix", [](const qops::Matrix& rho, double gamma) {
        return qops::admix(qops::DensityMatrix(rho), gamma).matrix();
    }, py::arg("rho"), py::arg("gamma"));
    m.def("psd_project", [](const qops::Matrix& h) {
        return qops::psd_project(qops::HermitianOperator(h)).matrix();
    }, py::arg("hermitian"));

    // randgen
    m.def("haar_pure_state", [](int dim, std::uint64_t seed) {
        return randgen::haar_pure_state(dim, seed_spec(seed, 0, 0, 0, 0)).matrix();
    }, py::arg("dim"), py::arg("seed") = 0);
    m.def("hs_random_state", [](int dim, std::uint64_t seed) {
        return randgen::hs_random_state(dim, seed_spec(seed, 0, 0, 0, 0)).matrix();
    }, py::arg("dim"), py::arg("seed") = 0);
    m.def("random_rank1_pom", [](int dim, int m, std::uint64_t seed) {
        return to_matrices(randgen::random_rank1_pom(dim, m, seed_spec(seed, 0, 0, 0, 0)));
    }, py::arg("dim"), py::arg("m"), py::arg("seed") = 0);

    py::class_<randgen::MeasurementSetup>(m, "MeasurementSetup")
        .def_readonly("dim", &randgen::MeasurementSetup::dim)
        .def_readonly("m_total", &randgen::MeasurementSetup::m_total)
        .def_readonly("m_well", &randgen::MeasurementSetup::m_well)
        .def_readonly("scale", &randgen::MeasurementSetup::scale)
        .def_readonly("mu", &randgen::MeasurementSetup::mu)
        .def_property_readonly("well", [](const randgen::MeasurementSetup& s) {
            return to_matrices(s.well);
        })
        .def_property_readonly("intended", [](const randgen::MeasurementSetup& s) {
            return to_matrices(s.intended);
        })
        .def_property_readonly("actual_ill", [](const randgen::MeasurementSetup& s) {
            return to_matrices(s.actual_ill);
        });
    m.def("perturb_pom",
          [](const std::vector<qops::Matrix>& clean, int m_well, double mu,
             std::uint64_t seed) {
              return randgen::perturb_pom(to_elements(clean), m_well, mu,
                                          seed_spec(seed, 0, 0, 0, 0));
          },
          py::arg("clean"), py::arg("m_well"), py::arg("mu"), py::arg("seed") = 0);

    // sampler
    py::class_<sampler::Counts>(m, "Counts")
        .def(py::init([](std::vector<std::int64_t> well, std::vector<std::int64_t> ill) {
            sampler::Counts c;
            c.well = std::move(well);
            c.ill = std::move(ill);
            return c;
        }), py::arg("well"), py::arg("ill"))
        .def_readonly("well", &sampler::Counts::well)
        .def_readonly("ill", &sampler::Counts::ill)
        .def_property_readonly("total", &sampler::Counts::total)
        .def_property_readonly("total_ill", &sampler::Counts::total_ill);
    m.def("simulate_counts",
          [](const qops::Matrix& rho, const randgen::MeasurementSetup& setup, std::int64_t n,
             std::uint64_t seed) {
              return sampler::simulate_counts(qops::DensityMatrix(rho), setup, n,
                                              seed_spec(seed, 0, 0, 0, 0));
          },
          py::arg("rho_true"), py::arg("setup"), py::arg("n"), py::arg("seed") = 0);

    // mwe
    m.def("weighted_entropy", &mwe::weighted_entropy, py::arg("weights"), py::arg("nu_prime"));
    py::class_<mwe::MweSolution>(m, "MweSolution")
        .def_readonly("nu", &mwe::MweSolution::nu)
        .def_readonly("lambda_", &mwe::MweSolution::lambda)
        .def_readonly("n_mwe", &mwe::MweSolution::n_mwe)
        .def_readonly("t", &mwe::MweSolution::t);
    m.def("mwe_frequencies", &mwe::mwe_frequencies, py::arg("ill_counts"), py::arg("t") = 1.0);
    m.def("mwe_counts", [](const sampler::Counts& counts, double t) {
        const auto cg = mwe::mwe_counts(counts, t);
        return py::make_tuple(cg.well, cg.ill);
    }, py::arg("counts"), py::arg("t") = 1.0);

    // mle
    py::class_<mle::SolverOptions>(m, "SolverOptions")
        .def(py::init<>())
        .def_readwrite("tol", &mle::SolverOptions::tol)
        .def_readwrite("max_iters", &mle::SolverOptions::max_iters)
        .def_readwrite("gain_tol", &mle::SolverOptions::gain_tol);
    py::class_<mle::EstimationResult>(m, "EstimationResult")
        .def_property_readonly("rho_hat", [](const mle::EstimationResult& r) {
            return r.rho_hat.matrix();
        })
        .def_readonly("log_likelihood", &mle::EstimationResult::log_likelihood)
        .def_readonly("iterations", &mle::EstimationResult::iterations)
        .def_readonly("residual", &mle::EstimationResult::residual)
        .def_readonly("converged", &mle::EstimationResult::converged)
        .def_readonly("possibly_non_unique", &mle::EstimationResult::possibly_non_unique);
    m.def("ml_estimate",
          [](const std::vector<qops::Matrix>& outcomes, const std::vector<double>& counts,
             const mle::SolverOptions& options) {
              mle::LikelihoodSpec spec{to_elements(outcomes), counts};
              return mle::ml_estimate(spec, options);
          },
          py::arg("outcomes"), py::arg("counts"), py::arg("options") = mle::SolverOptions{});
    m.def("strategy1", &mle::strategy1, py::arg("counts"), py::arg("setup"),
          py::arg("options") = mle::SolverOptions{});
    m.def("strategy2", &mle::strategy2, py::arg("counts"), py::arg("setup"),
          py::arg("options") = mle::SolverOptions{});
    m.def("strategy3", &mle::strategy3, py::arg("counts"), py::arg("setup"),
          py::arg("t") = 1.0, py::arg("options") = mle::SolverOptions{});
    m.def("reference_estimate", &mle::reference_estimate, py::arg("counts"), py::arg("setup"),
          py::arg("options") = mle::SolverOptions{});

    // experiment
    py::class_<experiment::CampaignConfig>(m, "CampaignConfig")
        .def(py::init<>())
        .def_readwrite("dim", &experiment::CampaignConfig::dim)
        .def_readwrite("m_total", &experiment::CampaignConfig::m_total)
        .def_readwrite("m_well", &experiment::CampaignConfig::m_well)
        .def_readwrite("n_copies", &experiment::CampaignConfig::n_copies)
        .def_readwrite("n_states", &experiment::CampaignConfig::n_states)
        .def_readwrite("n_experiments", &experiment::CampaignConfig::n_experiments)
        .def_readwrite("mu_list", &experiment::CampaignConfig::mu_list)
        .def_readwrite("gamma_list", &experiment::CampaignConfig::gamma_list)
        .def_readwrite("t_exponent", &experiment::CampaignConfig::t_exponent)
        .def_readwrite("master_seed", &experiment::CampaignConfig::master_seed)
        .def_readwrite("solver", &experiment::CampaignConfig::solver);
    py::class_<experiment::TrialRecord>(m, "TrialRecord")
        .def_readonly("state_id", &experiment::TrialRecord::state_id)
        .def_readonly("gamma", &experiment::TrialRecord::gamma)
        .def_readonly("mu", &experiment::TrialRecord::mu)
        .def_readonly("experiment_id", &experiment::TrialRecord::experiment_id)
        .def_readonly("concurrence", &experiment::TrialRecord::concurrence)
        .def_readonly("td_raw", &experiment::TrialRecord::td_raw)
        .def_readonly("td_cg", &experiment::TrialRecord::td_cg)
        .def_readonly("converged_raw", &experiment::TrialRecord::converged_raw)
        .def_readonly("converged_cg", &experiment::TrialRecord::converged_cg);
    py::class_<experiment::SummaryRow>(m, "SummaryRow")
        .def_readonly("gamma", &experiment::SummaryRow::gamma)
        .def_readonly("mu", &experiment::SummaryRow::mu)
        .def_readonly("pct_states_cg_better", &experiment::SummaryRow::pct_states_cg_better)
        .def_readonly("mean_pct_improvement", &experiment::SummaryRow::mean_pct_improvement)
        .def_readonly("std_pct_improvement", &experiment::SummaryRow::std_pct_improvement)
        .def_readonly("mean_td_raw", &experiment::SummaryRow::mean_td_raw)
        .def_readonly("mean_td_cg", &experiment::SummaryRow::mean_td_cg);
    py::class_<experiment::CampaignResult>(m, "CampaignResult")
        .def_readonly("trials", &experiment::CampaignResult::trials)
        .def_readonly("summary", &experiment::CampaignResult::summary)
        .def_readonly("excluded", &experiment::CampaignResult::excluded);
    m.def("run_campaign", &experiment::run_campaign, py::arg("config"),
          py::call_guard<py::gil_scoped_release>());
    m.def("performance_range", [](const std::vector<experiment::SummaryRow>& rows) {
        const auto r = experiment::performance_range(rows);
        return py::make_tuple(r.lower, r.upper);
    }, py::arg("gamma_slice"));
}
