#include "tomocg/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>

#include "tomocg/experiment.hpp"
#include "tomocg/setup_io.hpp"

namespace tomocg::cli {

namespace fs = std::filesystem;

namespace {

void write_cg_counts(const std::string& path, const mwe::CoarseGrainedCounts& cg) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << "index,role,count\n";
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    int index = 0;
    for (const auto c : cg.well) os << index++ << ",well," << c << "\n";
    for (const auto c : cg.ill) os << index++ << ",ill," << c << "\n";
}

int run_gen_povm(int dim, int m_total, int m_well, std::uint64_t seed,
                 const std::string& out_dir) {
    const auto pom = randgen::random_rank1_pom(dim, m_total, {seed, 0, 0, 0, 0});
    randgen::MeasurementSetup setup;
    setup.dim = dim;
    setup.m_total = m_total;
    setup.m_well = m_well;
    setup.scale = 1.0;
    setup.mu = 0.0;
    setup.well.assign(pom.begin(), pom.begin() + m_well);
    setup.intended.assign(pom.begin() + m_well, pom.end());
    setup.actual_ill = setup.intended;
    setup_io::save_setup(out_dir, setup, /*write_actual=*/false);
    std::cout << "wrote " << m_total << " outcomes (" << m_well << " well) to "
              << out_dir << "\n";
    return 0;
}

int run_simulate(const std::string& state_path, const std::string& setup_dir, double mu,
                 std::int64_t n, std::uint64_t seed, const std::string& out_path,
                 const std::string& setup_out) {
    const qops::DensityMatrix rho{qops::load_operator(state_path)};
    randgen::MeasurementSetup setup = setup_io::load_setup(setup_dir);
    if (mu >= 0.0) {
        setup = randgen::perturb_pom(setup_io::clean_elements(setup), setup.m_well, mu,
                                     {seed, 0, 0, 0, 1});
    }
    const auto counts = sampler::simulate_counts(rho, setup, n, {seed, 0, 0, 0, 2});
    sampler::save_counts_csv(out_path, counts);
    if (!setup_out.empty()) setup_io::save_setup(setup_out, setup);
    std::cout << "sampled " << counts.total() << " clicks (" << counts.total_ill()
              << " on ill outcomes) -> " << out_path << "\n";
    return 0;
}

int run_mwe(const std::string& counts_path, double t, const std::string& out_path) {
    const auto counts = sampler::load_counts_csv(counts_path);
    const auto cg = mwe::mwe_counts(counts, t);
    write_cg_counts(out_path, cg);
    std::cout << "re-estimated " << cg.ill.size() << " ill counts -> " << out_path << "\n";
    return 0;
}

int run_estimate(const std::string& setup_dir, const std::string& counts_path,
                 const std::string& strategy, double t, const mle::SolverOptions& options,
                 const std::string& out_path) {
    const auto setup = setup_io::load_setup(setup_dir);
    const auto counts = sampler::load_counts_csv(counts_path);
    mle::EstimationResult result = [&] {
        if (strategy == "1") return mle::strategy1(counts, setup, options);
        if (strategy == "2") return mle::strategy2(counts, setup, options);
        if (strategy == "3") return mle::strategy3(counts, setup, t, options);
        if (strategy == "ref") return mle::reference_estimate(counts, setup, options);
        throw CLI::ValidationError("--strategy", "must be one of 1, 2, 3, ref");
    }();
    qops::save_operator(out_path, result.rho_hat.matrix());
    std::cout << "iterations=" << result.iterations << " residual=" << result.residual
              << " log_likelihood=" << result.log_likelihood
              << " converged=" << (result.converged ? 1 : 0);
    if (result.possibly_non_unique) std::cout << " possibly_non_unique=1";
    std::cout << "\n";
    return result.converged ? 0 : 2;
}

int run_campaign_cmd(const std::string& config_path, const std::string& out_dir) {
    const auto config = experiment::load_config(config_path);
    const auto result = experiment::run_campaign(config);
    fs::create_directories(out_dir);
    {
        std::ofstream os(fs::path(out_dir) / "trials.csv");
        experiment::write_trials_csv(os, result.trials);
    }
    {
        std::ofstream os(fs::path(out_dir) / "summary.csv");
        experiment::write_summary_csv(os, result.summary);
    }
    std::cout << result.trials.size() << " trials (" << result.excluded
              << " excluded from summary) -> " << out_dir << "\n";
    return 0;
}

int run_summarize(const std::string& trials_path, const std::string& out_path,
                  bool print_range) {
    std::ifstream is(trials_path);
    if (!is) throw std::runtime_error("cannot open: " + trials_path);
    const auto trials = experiment::read_trials_csv(is);
    auto [summary, excluded] = experiment::summarize(trials);
    if (!out_path.empty()) {
        std::ofstream os(out_path);
        experiment::write_summary_csv(os, summary);
    } else {
        experiment::write_summary_csv(std::cout, summary);
    }
    if (print_range) {
        std::map<double, std::vector<experiment::SummaryRow>> by_gamma;
        for (const auto& row : summary) by_gamma[row.gamma].push_back(row);
        for (const auto& [gamma, rows] : by_gamma) {
            try {
                const auto range = experiment::performance_range(rows);
                std::cout << "gamma=" << gamma << " performance range mu in ["
                          << range.lower << ", " << range.upper << "]\n";
            } catch (const std::exception& e) {
                std::cout << "gamma=" << gamma << " performance range: " << e.what() << "\n";
            }
        }
    }
    if (excluded > 0) std::cerr << excluded << " non-converged trials excluded\n";
    return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
    CLI::App app{"Coarse-grained quantum state tomography toolkit"};
    app.require_subcommand(1);

    int dim = 4, m_total = 16, m_well = 0;
    std::uint64_t seed = 0;
    std::string out_dir, state_path, setup_dir, counts_path, out_path, setup_out;
    double mu = -1.0, t_exponent = 1.0;
    std::int64_t n_copies = 8000;
    std::string strategy = "1", config_path, trials_path;
    bool print_range = false;
    mle::SolverOptions options;

    auto* gen = app.add_subcommand("gen-povm", "Generate a random rank-one complete POM");
    gen->add_option("--dim", dim, "Hilbert space dimension")->capture_default_str();
    gen->add_option("--m-total", m_total, "total number of outcomes")->capture_default_str();
    gen->add_option("--m-well", m_well, "number of well-calibrated outcomes")
        ->capture_default_str();
    gen->add_option("--seed", seed, "master seed")->capture_default_str();
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* sim = app.add_subcommand("simulate", "Sample detection counts from a state");
    sim->add_option("--state", state_path, "true state, operator text format")->required();
    sim->add_option("--setup", setup_dir, "POM / setup directory")->required();
    sim->add_option("--mu", mu, "noise level; when set, perturbs the clean POM first");
    sim->add_option("--n", n_copies, "number of detected copies")->capture_default_str();
    sim->add_option("--seed", seed, "master seed")->capture_default_str();
    sim->add_option("--out", out_path, "counts CSV output")->required();
    sim->add_option("--setup-out", setup_out, "write the realized setup here");

    auto* mwe_cmd = app.add_subcommand("mwe", "Re-estimate ill counts by weighted entropy");
    mwe_cmd->add_option("--counts", counts_path, "counts CSV input")->required();
    mwe_cmd->add_option("--t-exponent", t_exponent, "weight exponent")->capture_default_str();
    mwe_cmd->add_option("--out", out_path, "coarse-grained counts CSV output")->required();

    auto* est = app.add_subcommand("estimate", "Maximum-likelihood state reconstruction");
    est->add_option("--setup", setup_dir, "setup directory")->required();
    est->add_option("--counts", counts_path, "counts CSV input")->required();
    est->add_option("--strategy", strategy, "1, 2, 3 or ref")->capture_default_str();
    est->add_option("--t-exponent", t_exponent, "weight exponent for strategy 3")
        ->capture_default_str();
    est->add_option("--tol", options.tol, "fixed-point residual tolerance")
        ->capture_default_str();
    est->add_option("--max-iters", options.max_iters, "iteration cap")->capture_default_str();
    est->add_option("--out", out_path, "estimator output, operator text format")->required();

    auto* run = app.add_subcommand("run", "Run a Monte Carlo campaign from a config file");
    run->add_option("--config", config_path, "flat key = value config file")->required();
    run->add_option("--out-dir", out_dir, "directory for trials.csv and summary.csv")
        ->required();

    auto* summ = app.add_subcommand("summarize", "Aggregate a trials CSV into a summary");
    summ->add_option("--trials", trials_path, "trials CSV input")->required();
    summ->add_option("--out", out_path, "summary CSV output (stdout when omitted)");
    summ->add_flag("--performance-range", print_range,
                   "also print the mu performance range per gamma");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return run_gen_povm(dim, m_total, m_well, seed, out_dir);
        if (sim->parsed()) {
            return run_simulate(state_path, setup_dir, mu, n_copies, seed, out_path, setup_out);
        }
        if (mwe_cmd->parsed()) return run_mwe(counts_path, t_exponent, out_path);
        if (est->parsed()) {
            return run_estimate(setup_dir, counts_path, strategy, t_exponent, options, out_path);
        }
        if (run->parsed()) return run_campaign_cmd(config_path, out_dir);
        if (summ->parsed()) return run_summarize(trials_path, out_path, print_range);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

}  // namespace tomocg::cli
