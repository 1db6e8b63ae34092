#include "smplmmse/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "smplmmse/baselines.hpp"
#include "smplmmse/bounds.hpp"
#include "smplmmse/errors.hpp"
#include "smplmmse/rng.hpp"

namespace smplmmse {

namespace {

const std::set<std::string>& known_estimators() {
    static const std::set<std::string> names{kEstimatorSmpLmmse, kEstimatorLmmse, kEstimatorGenie, kEstimatorAmp};
    return names;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "n", "m", "snr_grid", "trials", "estimators", "master_seed", "amp_iterations", "allow_m_greater_than_n",
        "record_timing", "output_path", "prior.lambda", "prior.distribution", "prior.mean", "prior.variance",
        "prior.dof", "turbo.max_outer_iterations", "turbo.stop_tol", "turbo.hard_combine", "turbo.hard_support",
        "turbo.value_rule", "detector.max_iterations", "detector.llr_clamp", "detector.convergence_tol", "detector.damping"};
    return keys;
}

int checked_int(std::int64_t v, const char* key) {
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError(std::string("config key '") + key + "' is out of range");
    }
    return static_cast<int>(v);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (n < 1 || m < 1) throw ConfigError("n and m must be >= 1");
    if (m > n && !allow_m_greater_than_n) {
        throw ConfigError("m > n requires allow_m_greater_than_n = true");
    }
    prior.validate();
    if (snr_grid.empty()) throw ConfigError("snr_grid must not be empty");
    for (double db : snr_grid) {
        if (!std::isfinite(db)) throw ConfigError("snr_grid entries must be finite");
    }
    if (trials < 1) throw ConfigError("trials must be >= 1");
    if (estimators.empty()) throw ConfigError("estimators must not be empty");
    std::set<std::string> seen;
    for (const auto& name : estimators) {
        if (!known_estimators().contains(name)) throw ConfigError("unknown estimator '" + name + "'");
        if (!seen.insert(name).second) throw ConfigError("estimator '" + name + "' listed twice");
    }
    if (amp_iterations < 1) throw ConfigError("amp_iterations must be >= 1");
    turbo.validate();
    if (prior.active.variance() <= 0.0) throw ConfigError("active distribution must have positive variance");
}

ExperimentConfig experiment_from_document(const ConfigDocument& doc) {
    for (const auto& key : doc.keys()) {
        if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    ExperimentConfig cfg;
    if (doc.has("n")) cfg.n = doc.integer("n");
    if (doc.has("m")) cfg.m = doc.integer("m");
    if (doc.has("snr_grid")) cfg.snr_grid = doc.number_list("snr_grid");
    if (doc.has("trials")) cfg.trials = checked_int(doc.integer("trials"), "trials");
    if (doc.has("estimators")) cfg.estimators = doc.string_list("estimators");
    if (doc.has("master_seed")) cfg.master_seed = doc.unsigned_integer("master_seed");
    if (doc.has("amp_iterations")) cfg.amp_iterations = checked_int(doc.integer("amp_iterations"), "amp_iterations");
    if (doc.has("allow_m_greater_than_n")) cfg.allow_m_greater_than_n = doc.boolean("allow_m_greater_than_n");
    if (doc.has("record_timing")) cfg.record_timing = doc.boolean("record_timing");
    if (doc.has("output_path")) cfg.output_path = doc.string("output_path");

    const double lambda = doc.has("prior.lambda") ? doc.number("prior.lambda") : cfg.prior.lambda;
    const std::string dist = doc.has("prior.distribution") ? doc.string("prior.distribution") : "gaussian";
    if (dist == "gaussian") {
        if (doc.has("prior.dof")) throw ConfigError("prior.dof only applies to distribution = \"chi_square\"");
        const double mean = doc.has("prior.mean") ? doc.number("prior.mean") : 0.0;
        const double variance = doc.has("prior.variance") ? doc.number("prior.variance") : 1.0;
        cfg.prior = {lambda, ActiveDistribution::gaussian(mean, variance)};
    } else if (dist == "chi_square") {
        if (doc.has("prior.mean") || doc.has("prior.variance")) {
            throw ConfigError("prior.mean/prior.variance only apply to distribution = \"gaussian\"");
        }
        const auto dof = doc.has("prior.dof") ? checked_int(doc.integer("prior.dof"), "prior.dof") : 4;
        cfg.prior = {lambda, ActiveDistribution::chi_square(dof)};
    } else {
        throw ConfigError("prior.distribution must be \"gaussian\" or \"chi_square\"");
    }

    auto& t = cfg.turbo;
    if (doc.has("turbo.max_outer_iterations")) {
        t.max_outer_iterations = checked_int(doc.integer("turbo.max_outer_iterations"), "turbo.max_outer_iterations");
    }
    if (doc.has("turbo.stop_tol")) t.stop_tol = doc.number("turbo.stop_tol");
    if (doc.has("turbo.hard_combine")) t.hard_combine = doc.boolean("turbo.hard_combine");
    if (doc.has("turbo.hard_support")) t.hard_support = doc.boolean("turbo.hard_support");
    if (doc.has("turbo.value_rule")) {
        const auto rule = doc.string("turbo.value_rule");
        if (rule == "conditional") {
            t.value_rule = ValueRule::Conditional;
        } else if (rule == "literal") {
            t.value_rule = ValueRule::Literal;
        } else {
            throw ConfigError("turbo.value_rule must be \"conditional\" or \"literal\"");
        }
    }
    auto& d = t.detector;
    if (doc.has("detector.max_iterations")) {
        d.max_iterations = checked_int(doc.integer("detector.max_iterations"), "detector.max_iterations");
    }
    if (doc.has("detector.llr_clamp")) d.llr_clamp = doc.number("detector.llr_clamp");
    if (doc.has("detector.convergence_tol")) d.convergence_tol = doc.number("detector.convergence_tol");
    if (doc.has("detector.damping")) d.damping = doc.number("detector.damping");

    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return experiment_from_document(ConfigDocument::load(path));
}

ExperimentConfig preset_sweep_iterations(bool full_size) {
    ExperimentConfig cfg;
    cfg.n = full_size ? 8192 : 512;
    cfg.m = full_size ? 4096 : 256;
    cfg.prior = {0.125, ActiveDistribution::gaussian(0.0, 1.0)};
    cfg.snr_grid = {50.0};
    cfg.trials = full_size ? 10000 : 100;
    cfg.estimators = {kEstimatorSmpLmmse, kEstimatorAmp, kEstimatorGenie};
    cfg.output_path = "sweep_iterations.csv";
    return cfg;
}

ExperimentConfig preset_sweep_snr(bool full_size) {
    ExperimentConfig cfg;
    cfg.n = full_size ? 8192 : 512;
    cfg.m = full_size ? 4096 : 256;
    cfg.prior = {0.04, ActiveDistribution::gaussian(0.0, 1.0)};
    cfg.snr_grid = {-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 50.0};
    cfg.trials = full_size ? 10000 : 100;
    cfg.estimators = {kEstimatorSmpLmmse, kEstimatorLmmse, kEstimatorGenie};
    cfg.output_path = "sweep_snr.csv";
    return cfg;
}

double mse(const VectorXd& x_hat, const VectorXd& x_true) {
    if (x_hat.size() != x_true.size() || x_hat.size() == 0) throw DomainError("mse: length mismatch");
    return (x_hat - x_true).squaredNorm() / static_cast<double>(x_hat.size());
}

double support_error_rate(const VectorXd& b_hat_hard, const VectorXd& b_true) {
    if (b_hat_hard.size() != b_true.size() || b_true.size() == 0) throw DomainError("support_error_rate: length mismatch");
    Eigen::Index flips = 0;
    for (Eigen::Index i = 0; i < b_true.size(); ++i) flips += (b_hat_hard[i] != b_true[i]) ? 1 : 0;
    return static_cast<double>(flips) / static_cast<double>(b_true.size());
}

double to_db(double value) { return 10.0 * std::log10(value); }

std::uint64_t trial_seed(std::uint64_t master_seed, int trial) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(trial));
}

std::vector<TrialRecord> run_trial(const ExperimentConfig& config, int trial, double snr_db) {
    using Clock = std::chrono::steady_clock;
    const std::uint64_t seed = trial_seed(config.master_seed, trial);
    const ProblemInstance inst = synthesize(config.prior, config.m, config.n, db_to_linear(snr_db), seed);
    const PriorMoments moments = PriorMoments::from_prior(config.prior, config.n);
    const Truth truth{inst.x, inst.b};
    const auto n = static_cast<double>(config.n);

    std::vector<TrialRecord> rows;
    auto emit = [&](const std::string& name, int iteration, double value, double ser, double ms) {
        rows.push_back({trial, name, snr_db, iteration, value, to_db(value), ser,
                        config.record_timing ? ms : 0.0, seed});
    };
    auto elapsed_ms = [](Clock::time_point start) {
        return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    };

    for (const auto& name : config.estimators) {
        const auto start = Clock::now();
        if (name == kEstimatorSmpLmmse) {
            const auto res = estimate(inst.H, inst.y, inst.prior, moments, inst.sigma_w_sq, config.turbo, truth);
            const double ms = elapsed_ms(start);
            // Stopped runs keep their final estimate for the remaining iterations.
            for (int it = 1; it <= config.turbo.max_outer_iterations; ++it) {
                const auto& rec = res.trajectory[std::min<std::size_t>(it, res.trajectory.size()) - 1];
                emit(name, it, rec.mse, rec.support_error_rate, ms);
            }
        } else if (name == kEstimatorAmp) {
            const auto res = amp_estimate(inst.H, inst.y, DenoiserSpec::for_prior(inst.prior), config.amp_iterations,
                                          truth);
            const double ms = elapsed_ms(start);
            for (int it = 1; it <= config.amp_iterations; ++it) {
                const auto& rec = res.trajectory[std::min<std::size_t>(it, res.trajectory.size()) - 1];
                emit(name, it, rec.mse, rec.support_error_rate, ms);
            }
        } else if (name == kEstimatorLmmse) {
            const auto res = plain_lmmse(inst.H, inst.y, inst.prior, moments, inst.sigma_w_sq);
            // Every entry is declared active.
            emit(name, 0, mse(res.x_hat, inst.x), support_error_rate(VectorXd::Ones(inst.n()), inst.b),
                 elapsed_ms(start));
        } else if (name == kEstimatorGenie) {
            const auto res = genie_mmse(inst.H, inst.y, inst.support, moments, inst.sigma_w_sq);
            emit(name, 0, mse(res.x_hat, inst.x), 0.0, elapsed_ms(start));
        }
    }

    const auto start = Clock::now();
    const BoundReport bounds = bound_report(inst);
    const double ms = elapsed_ms(start);
    emit(kBoundUpper, 0, bounds.upper_lmmse / n, 0.0, ms);
    emit(kBoundLower, 0, bounds.lower_genie / n, 0.0, ms);
    emit(kBoundProp1, 0, bounds.prop1_trace / n, 0.0, ms);
    emit(kBoundAsymptote, 0, bounds.asymptote / n, 0.0, ms);
    return rows;
}

std::vector<TrialRecord> run_experiment(const ExperimentConfig& config, int threads) {
    config.validate();
    struct Cell {
        int trial;
        double snr_db;
    };
    std::vector<Cell> cells;
    for (double snr_db : config.snr_grid) {
        for (int t = 0; t < config.trials; ++t) cells.push_back({t, snr_db});
    }
    std::vector<std::vector<TrialRecord>> results(cells.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            try {
                results[i] = run_trial(config, cells[i].trial, cells[i].snr_db);
            } catch (...) {
                const std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(cells.size());
            }
        }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(cells.size())));
    {
        std::vector<std::jthread> pool;
        for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
        worker();
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<TrialRecord> records;
    for (auto& chunk : results) {
        records.insert(records.end(), std::make_move_iterator(chunk.begin()), std::make_move_iterator(chunk.end()));
    }
    std::sort(records.begin(), records.end(), [](const TrialRecord& a, const TrialRecord& b) {
        return std::tie(a.snr_db, a.trial, a.estimator, a.iteration) <
               std::tie(b.snr_db, b.trial, b.estimator, b.iteration);
    });
    return records;
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << "# smplmmse trial records, schema " << kCsvSchemaVersion << '\n';
    out << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << r.trial << ',' << r.estimator << ',' << format_double(r.snr_db) << ',' << r.iteration << ','
            << format_double(r.mse) << ',' << format_double(r.mse_db) << ',' << format_double(r.support_error_rate)
            << ',' << format_double(r.wall_time_ms) << ',' << r.seed << '\n';
    }
}

void write_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    write_csv(out, records);
}

std::string to_csv(const std::vector<TrialRecord>& records) {
    std::ostringstream os;
    write_csv(os, records);
    return os.str();
}

std::vector<SummaryRow> aggregate(const std::vector<TrialRecord>& records) {
    std::map<std::tuple<std::string, double, int>, std::vector<double>> groups;
    for (const auto& r : records) groups[{r.estimator, r.snr_db, r.iteration}].push_back(r.mse);

    std::vector<SummaryRow> out;
    for (auto& [key, values] : groups) {
        // Fixed summation order keeps the result independent of record order.
        std::sort(values.begin(), values.end());
        const auto count = values.size();
        double sum = 0.0;
        for (double v : values) sum += v;
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (double v : values) sq += (v - mean) * (v - mean);
        const double stderr_mse =
            count > 1 ? std::sqrt(sq / static_cast<double>(count - 1)) / std::sqrt(static_cast<double>(count)) : 0.0;
        out.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count, mean, stderr_mse, to_db(mean)});
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
    out << "estimator,snr_db,iteration,count,mean_mse,stderr_mse,mean_mse_db\n";
    for (const auto& r : rows) {
        out << r.estimator << ',' << format_double(r.snr_db) << ',' << r.iteration << ',' << r.count << ','
            << format_double(r.mean_mse) << ',' << format_double(r.stderr_mse) << ','
            << format_double(r.mean_mse_db) << '\n';
    }
}

}  // namespace smplmmse
