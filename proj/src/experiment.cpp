#include "tomocg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace tomocg::experiment {

namespace {

// Seed stream purpose tags; the counts stream also folds in the gamma index.
enum Purpose : std::uint32_t {
    kPom = 1,
    kState = 2,
    kNoise = 3,
    kCountsBase = 16,
};

int thread_budget(std::size_t n_tasks) {
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TOMOCG_THREADS")) {
        threads = std::atoi(env);
    }
    threads = std::max(1, threads);
    return static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(1, n_tasks)));
}

}  // namespace

void CampaignConfig::validate() const {
    if (dim < 2) throw std::invalid_argument("config: dim must be at least 2");
    if (m_total < dim * dim) throw std::invalid_argument("config: m_total below dim^2");
    if (m_well < 0 || m_well > m_total) throw std::invalid_argument("config: bad m_well");
    if (n_copies < 1 || n_states < 1 || n_experiments < 1) {
        throw std::invalid_argument("config: counts must be positive");
    }
    if (mu_list.empty() || gamma_list.empty()) {
        throw std::invalid_argument("config: mu_list and gamma_list must be non-empty");
    }
    for (const double mu : mu_list) {
        if (mu < 0.0 || mu > 1.0) throw std::invalid_argument("config: mu outside [0, 1]");
    }
    for (const double gamma : gamma_list) {
        if (gamma < 0.0 || gamma > 1.0) {
            throw std::invalid_argument("config: gamma outside [0, 1]");
        }
    }
}

CampaignResult run_campaign(const CampaignConfig& config) {
    config.validate();

    const randgen::SeedSpec pom_seed{config.master_seed, 0, 0, 0, kPom};
    const auto clean_pom = randgen::random_rank1_pom(config.dim, config.m_total, pom_seed);

    struct TrialIndex {
        int state, gamma_idx, mu_idx, experiment;
    };
    std::vector<TrialIndex> plan;
    plan.reserve(static_cast<std::size_t>(config.n_states) * config.gamma_list.size() *
                 config.mu_list.size() * config.n_experiments);
    for (int s = 0; s < config.n_states; ++s) {
        for (std::size_t g = 0; g < config.gamma_list.size(); ++g) {
            for (std::size_t m = 0; m < config.mu_list.size(); ++m) {
                for (int e = 0; e < config.n_experiments; ++e) {
                    plan.push_back({s, static_cast<int>(g), static_cast<int>(m), e});
                }
            }
        }
    }

    std::vector<TrialRecord> trials(plan.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.size()) return;
            try {
                const TrialIndex idx = plan[i];
                const double gamma = config.gamma_list[idx.gamma_idx];
                const double mu = config.mu_list[idx.mu_idx];
                const auto u32 = [](int v) { return static_cast<std::uint32_t>(v); };

                const auto pure = randgen::haar_pure_state(
                    config.dim, {config.master_seed, u32(idx.state), 0, 0, kState});
                const auto rho_true = qops::admix(pure, gamma);

                const auto setup = randgen::perturb_pom(
                    clean_pom, config.m_well, mu,
                    {config.master_seed, u32(idx.state), u32(idx.mu_idx),
                     u32(idx.experiment), kNoise});
                const auto counts = sampler::simulate_counts(
                    rho_true, setup, config.n_copies,
                    {config.master_seed, u32(idx.state), u32(idx.mu_idx),
                     u32(idx.experiment), kCountsBase + u32(idx.gamma_idx)});

                const auto reference = mle::reference_estimate(counts, setup, config.solver);
                const auto raw = mle::strategy1(counts, setup, config.solver);
                const auto cg = mle::strategy3(counts, setup, config.t_exponent, config.solver);

                TrialRecord& rec = trials[i];
                rec.state_id = idx.state;
                rec.gamma = gamma;
                rec.mu = mu;
                rec.experiment_id = idx.experiment;
                rec.concurrence = config.dim == 4 ? qops::concurrence(pure) : 0.0;
                rec.td_raw = qops::trace_distance(raw.rho_hat, reference.rho_hat);
                rec.td_cg = qops::trace_distance(cg.rho_hat, reference.rho_hat);
                rec.converged_raw = raw.converged && reference.converged;
                rec.converged_cg = cg.converged && reference.converged;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    const int n_threads = thread_budget(plan.size());
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    CampaignResult result;
    result.trials = std::move(trials);
    auto [summary, excluded] = summarize(result.trials);
    result.summary = std::move(summary);
    result.excluded = excluded;
    return result;
}

std::pair<std::vector<SummaryRow>, std::int64_t> summarize(
    const std::vector<TrialRecord>& trials) {
    struct StateAccum {
        double td_raw = 0.0, td_cg = 0.0;
        int n = 0;
    };
    std::map<std::pair<double, double>, std::map<int, StateAccum>> cells;
    std::int64_t excluded = 0;
    for (const auto& t : trials) {
        if (!(t.converged_raw && t.converged_cg)) {
            ++excluded;
            continue;
        }
        auto& acc = cells[{t.gamma, t.mu}][t.state_id];
        acc.td_raw += t.td_raw;
        acc.td_cg += t.td_cg;
        ++acc.n;
    }

    std::vector<SummaryRow> summary;
    summary.reserve(cells.size());
    for (const auto& [key, states] : cells) {
        SummaryRow row;
        row.gamma = key.first;
        row.mu = key.second;
        int better = 0;
        std::vector<double> improvements;
        double sum_raw = 0.0, sum_cg = 0.0;
        for (const auto& [state_id, acc] : states) {
            const double raw = acc.td_raw / acc.n;
            const double cg = acc.td_cg / acc.n;
            sum_raw += raw;
            sum_cg += cg;
            if (cg < raw) ++better;
            // Percentage improvement is undefined when the raw distance
            // already vanishes (the mu = 0 cell); such states are left out
            // of the improvement statistics.
            if (raw > 1e-12) improvements.push_back(100.0 * (raw - cg) / raw);
        }
        const double n_states = static_cast<double>(states.size());
        row.pct_states_cg_better = 100.0 * better / n_states;
        row.mean_td_raw = sum_raw / n_states;
        row.mean_td_cg = sum_cg / n_states;
        if (!improvements.empty()) {
            double mean = 0.0;
            for (const double v : improvements) mean += v;
            mean /= static_cast<double>(improvements.size());
            double var = 0.0;
            for (const double v : improvements) var += (v - mean) * (v - mean);
            row.mean_pct_improvement = mean;
            row.std_pct_improvement = improvements.size() > 1
                ? std::sqrt(var / static_cast<double>(improvements.size() - 1))
                : 0.0;
        }
        summary.push_back(row);
    }
    return {std::move(summary), excluded};
}

MuInterval performance_range(const std::vector<SummaryRow>& gamma_slice) {
    if (gamma_slice.size() < 2) {
        throw std::invalid_argument("performance_range: need at least two mu grid points");
    }
    const auto& rows = gamma_slice;
    std::vector<double> margin(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        margin[i] = rows[i].mean_pct_improvement - rows[i].std_pct_improvement;
        if (i > 0 && rows[i].mu <= rows[i - 1].mu) {
            throw std::invalid_argument("performance_range: rows must be sorted by mu");
        }
    }

    std::ptrdiff_t first = -1, last = -1;
    for (std::size_t i = 0; i < margin.size(); ++i) {
        if (margin[i] > 0.0) {
            if (first < 0) first = static_cast<std::ptrdiff_t>(i);
            last = static_cast<std::ptrdiff_t>(i);
        }
    }
    if (first < 0) {
        throw std::runtime_error("performance_range: improvement never exceeds its spread");
    }

    auto crossing = [&](std::size_t a, std::size_t b) {
        return rows[a].mu + (rows[b].mu - rows[a].mu) * (0.0 - margin[a]) / (margin[b] - margin[a]);
    };
    MuInterval interval;
    interval.lower = first == 0 ? rows.front().mu : crossing(first - 1, first);
    interval.upper = last == static_cast<std::ptrdiff_t>(rows.size()) - 1
        ? rows.back().mu
        : crossing(last, last + 1);
    return interval;
}

namespace {

std::ostream& full_precision(std::ostream& os) {
    os << std::setprecision(std::numeric_limits<double>::max_digits10);
    return os;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::istringstream is(line);
    std::string field;
    while (std::getline(is, field, sep)) fields.push_back(field);
    return fields;
}

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<double> parse_list(const std::string& value) {
    std::vector<double> out;
    for (const auto& tok : split(value, ',')) out.push_back(std::stod(trim(tok)));
    return out;
}

}  // namespace

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& trials) {
    os << "state_id,gamma,mu,experiment_id,concurrence,td_raw,td_cg,converged_raw,converged_cg\n";
    full_precision(os);
    for (const auto& t : trials) {
        os << t.state_id << ',' << t.gamma << ',' << t.mu << ',' << t.experiment_id << ','
           << t.concurrence << ',' << t.td_raw << ',' << t.td_cg << ','
           << (t.converged_raw ? 1 : 0) << ',' << (t.converged_cg ? 1 : 0) << "\n";
    }
}

std::vector<TrialRecord> read_trials_csv(std::istream& is) {
    std::vector<TrialRecord> trials;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("state_id,", 0) == 0) continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 9) throw std::runtime_error("trials CSV: malformed row: " + line);
        TrialRecord t;
        t.state_id = std::stoi(f[0]);
        t.gamma = std::stod(f[1]);
        t.mu = std::stod(f[2]);
        t.experiment_id = std::stoi(f[3]);
        t.concurrence = std::stod(f[4]);
        t.td_raw = std::stod(f[5]);
        t.td_cg = std::stod(f[6]);
        t.converged_raw = std::stoi(f[7]) != 0;
        t.converged_cg = std::stoi(f[8]) != 0;
        trials.push_back(t);
    }
    return trials;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& summary) {
    os << "gamma,mu,pct_states_cg_better,mean_pct_improvement,std_pct_improvement,"
          "mean_td_raw,mean_td_cg\n";
    full_precision(os);
    for (const auto& row : summary) {
        os << row.gamma << ',' << row.mu << ',' << row.pct_states_cg_better << ','
           << row.mean_pct_improvement << ',' << row.std_pct_improvement << ','
           << row.mean_td_raw << ',' << row.mean_td_cg << "\n";
    }
}

std::vector<SummaryRow> read_summary_csv(std::istream& is) {
    std::vector<SummaryRow> summary;
    std::string line;
    bool header = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            if (line.rfind("gamma,", 0) == 0) continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 7) throw std::runtime_error("summary CSV: malformed row: " + line);
        SummaryRow row;
        row.gamma = std::stod(f[0]);
        row.mu = std::stod(f[1]);
        row.pct_states_cg_better = std::stod(f[2]);
        row.mean_pct_improvement = std::stod(f[3]);
        row.std_pct_improvement = std::stod(f[4]);
        row.mean_td_raw = std::stod(f[5]);
        row.mean_td_cg = std::stod(f[6]);
        summary.push_back(row);
    }
    return summary;
}

CampaignConfig parse_config(std::istream& is) {
    CampaignConfig config;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) continue;
        if (key == "dim") config.dim = std::stoi(value);
        else if (key == "m_total") config.m_total = std::stoi(value);
        else if (key == "m_well") config.m_well = std::stoi(value);
        else if (key == "n_copies") config.n_copies = std::stoll(value);
        else if (key == "n_states") config.n_states = std::stoi(value);
        else if (key == "n_experiments") config.n_experiments = std::stoi(value);
        else if (key == "mu_list") config.mu_list = parse_list(value);
        else if (key == "gamma_list") config.gamma_list = parse_list(value);
        else if (key == "t_exponent") config.t_exponent = std::stod(value);
        else if (key == "master_seed") config.master_seed = std::stoull(value);
        else if (key == "tol") config.solver.tol = std::stod(value);
        else if (key == "max_iters") config.solver.max_iters = std::stol(value);
        else throw std::runtime_error("config: unknown key: " + key);
    }
    config.validate();
    return config;
}

CampaignConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return parse_config(is);
}

}  // namespace tomocg::experiment
