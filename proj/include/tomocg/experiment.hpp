#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tomocg/mle.hpp"

namespace tomocg::experiment {

struct CampaignConfig {
    int dim = 4;
    int m_total = 16;
    int m_well = 0;  // all outcomes ill-calibrated by default
    std::int64_t n_copies = 8000;
    int n_states = 250;
    int n_experiments = 20;
    std::vector<double> mu_list = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3,
                                   0.35, 0.4, 0.45, 0.5, 0.55, 0.6};
    std::vector<double> gamma_list = {0.0, 0.1, 0.2};
    double t_exponent = 1.0;
    std::uint64_t master_seed = 0;
    mle::SolverOptions solver;

    void validate() const;
};

struct TrialRecord {
    int state_id = 0;
    double gamma = 0.0;
    double mu = 0.0;
    int experiment_id = 0;
    double concurrence = 0.0;  // of the pure part, before admixture
    double td_raw = 0.0;       // trace distance strategy-1 estimate to reference
    double td_cg = 0.0;        // trace distance strategy-3 estimate to reference
    bool converged_raw = false;
    bool converged_cg = false;
};

struct SummaryRow {
    double gamma = 0.0;
    double mu = 0.0;
    double pct_states_cg_better = 0.0;   // percentage of states, 0..100
    double mean_pct_improvement = 0.0;   // over states with nonzero raw distance
    double std_pct_improvement = 0.0;
    double mean_td_raw = 0.0;
    double mean_td_cg = 0.0;
};

struct CampaignResult {
    std::vector<TrialRecord> trials;   // sorted by (state, gamma, mu, experiment)
    std::vector<SummaryRow> summary;   // sorted by (gamma, mu)
    std::int64_t excluded = 0;         // trials dropped from the summary
};

/// Runs the full Monte Carlo campaign. Trials execute concurrently (capped by
/// the TOMOCG_THREADS environment variable when set); results are identical
/// to a serial run because every trial seeds from its own indices.
CampaignResult run_campaign(const CampaignConfig& config);

/// Summary fold, usable on trial records loaded from disk.
std::pair<std::vector<SummaryRow>, std::int64_t> summarize(
    const std::vector<TrialRecord>& trials);

/// The mu interval on which mean percentage improvement exceeds its standard
/// deviation, with linear interpolation between grid points. The rows must
/// all belong to one gamma and be sorted by mu.
struct MuInterval {
    double lower = 0.0;
    double upper = 0.0;
};
MuInterval performance_range(const std::vector<SummaryRow>& gamma_slice);

// CSV + config file round trips.
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials);
std::vector<TrialRecord> read_trials_csv(std::istream& is);
void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& summary);
std::vector<SummaryRow> read_summary_csv(std::istream& is);
CampaignConfig parse_config(std::istream& is);
CampaignConfig load_config(const std::string& path);

}  // namespace tomocg::experiment
