#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "smplmmse/baselines.hpp"
#include "smplmmse/bounds.hpp"
#include "smplmmse/errors.hpp"
#include "smplmmse/harness.hpp"
#include "smplmmse/instance_io.hpp"
#include "smplmmse/turbo.hpp"

using namespace smplmmse;

namespace {

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::string out;
    std::string config;
};

int resolve_threads(const GlobalOptions& g) {
    if (g.threads) {
        if (*g.threads < 1) throw ConfigError("--threads must be >= 1");
        return *g.threads;
    }
    if (const char* env = std::getenv("THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096) throw ConfigError("THREADS must be a positive integer");
        return static_cast<int>(v);
    }
    return static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));
}

ExperimentConfig config_or_default(const GlobalOptions& g) {
    ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_experiment_config(g.config);
    if (g.seed) cfg.master_seed = *g.seed;
    if (!g.out.empty()) cfg.output_path = g.out;
    return cfg;
}

void write_results(const ExperimentConfig& cfg, const std::vector<TrialRecord>& records) {
    write_csv(cfg.output_path, records);
    write_summary_csv(std::cout, aggregate(records));
    std::cerr << "wrote " << records.size() << " rows to " << cfg.output_path.string() << '\n';
}

int cmd_generate(const GlobalOptions& g, Eigen::Index n, Eigen::Index m, double lambda, const std::string& dist,
                 int dof, double snr_db, int trial) {
    ExperimentConfig cfg = config_or_default(g);
    if (g.config.empty()) {
        cfg.n = n;
        cfg.m = m;
        if (dist == "gaussian") {
            cfg.prior = {lambda, ActiveDistribution::gaussian(0.0, 1.0)};
        } else if (dist == "chi_square") {
            cfg.prior = {lambda, ActiveDistribution::chi_square(dof)};
        } else {
            throw ConfigError("--distribution must be gaussian or chi_square");
        }
        cfg.snr_grid = {snr_db};
    }
    cfg.prior.validate();
    if (g.out.empty()) throw ConfigError("generate needs --out");
    const auto inst =
        synthesize(cfg.prior, cfg.m, cfg.n, db_to_linear(cfg.snr_grid.front()), trial_seed(cfg.master_seed, trial));
    save_instance(g.out, inst);
    std::cerr << "wrote " << cfg.m << "x" << cfg.n << " instance to " << g.out << '\n';
    return 0;
}

int cmd_estimate(const GlobalOptions& g, const std::string& path, const std::string& estimator) {
    if (estimator != kEstimatorSmpLmmse && estimator != kEstimatorLmmse && estimator != kEstimatorGenie &&
        estimator != kEstimatorAmp) {
        throw ConfigError("unknown estimator '" + estimator + "'");
    }
    const ProblemInstance inst = load_instance(path);
    const auto moments = PriorMoments::from_prior(inst.prior, inst.n());
    VectorXd x_hat;
    if (inst.prior.lambda == 0.0) {
        // the prior pins x to zero; every estimator agrees
        x_hat = VectorXd::Zero(inst.n());
    } else if (estimator == kEstimatorSmpLmmse) {
        TurboConfig turbo = g.config.empty() ? TurboConfig{} : load_experiment_config(g.config).turbo;
        x_hat = estimate(inst.H, inst.y, inst.prior, moments, inst.sigma_w_sq, turbo).x_hat;
    } else if (estimator == kEstimatorLmmse) {
        x_hat = plain_lmmse(inst.H, inst.y, inst.prior, moments, inst.sigma_w_sq).x_hat;
    } else if (estimator == kEstimatorGenie) {
        x_hat = genie_mmse(inst.H, inst.y, inst.support, moments, inst.sigma_w_sq).x_hat;
    } else {
        const int iterations = g.config.empty() ? ExperimentConfig{}.amp_iterations
                                                : load_experiment_config(g.config).amp_iterations;
        x_hat = amp_estimate(inst.H, inst.y, DenoiserSpec::for_prior(inst.prior), iterations).x_hat;
    }
    const double value = mse(x_hat, inst.x);
    std::cout << "estimator " << estimator << '\n'
              << "mse " << format_double(value) << '\n'
              << "mse_db " << format_double(to_db(value)) << '\n';
    return 0;
}

int cmd_bench(const GlobalOptions& g) {
    if (g.config.empty()) throw ConfigError("bench needs --config");
    const ExperimentConfig cfg = config_or_default(g);
    write_results(cfg, run_experiment(cfg, resolve_threads(g)));
    return 0;
}

int cmd_preset(const GlobalOptions& g, ExperimentConfig cfg, std::optional<int> trials) {
    if (!g.config.empty()) throw ConfigError("presets do not take --config; use bench");
    if (g.seed) cfg.master_seed = *g.seed;
    if (!g.out.empty()) cfg.output_path = g.out;
    if (trials) cfg.trials = *trials;
    write_results(cfg, run_experiment(cfg, resolve_threads(g)));
    return 0;
}

int cmd_bounds(const GlobalOptions& g) {
    const ExperimentConfig cfg = config_or_default(g);
    cfg.validate();
    std::cout << "snr_db,trial,upper_lmmse,lower_genie,prop1_trace,alpha,lemma4_asymptote\n";
    for (double db : cfg.snr_grid) {
        for (int t = 0; t < cfg.trials; ++t) {
            const auto inst = synthesize(cfg.prior, cfg.m, cfg.n, db_to_linear(db), trial_seed(cfg.master_seed, t));
            const auto r = bound_report(inst);
            std::cout << format_double(db) << ',' << t << ',' << format_double(r.upper_lmmse) << ','
                      << format_double(r.lower_genie) << ',' << format_double(r.prop1_trace) << ','
                      << format_double(r.alpha) << ',' << format_double(r.asymptote) << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sparse signal estimation by SMP-LMMSE turbo iteration"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "master seed (overrides the config)");
    app.add_option("--threads", g.threads, "worker threads (default: THREADS or all cores)");
    app.add_option("--out", g.out, "output file");
    app.add_option("--config", g.config, "experiment config file");

    auto* generate = app.add_subcommand("generate", "synthesize one instance and write it as JSON");
    Eigen::Index n = 512, m = 256;
    double lambda = 0.125, snr_db = 20.0;
    std::string dist = "gaussian";
    int dof = 4, trial = 0;
    generate->add_option("--n", n, "signal length");
    generate->add_option("--m", m, "measurements");
    generate->add_option("--lambda", lambda, "sparsity ratio");
    generate->add_option("--distribution", dist, "gaussian or chi_square");
    generate->add_option("--dof", dof, "chi-square degrees of freedom");
    generate->add_option("--snr-db", snr_db, "SNR in dB");
    generate->add_option("--trial", trial, "trial index used to derive the instance seed");

    auto* est = app.add_subcommand("estimate", "run one estimator on an instance file and print its MSE");
    std::string instance_path, estimator = kEstimatorSmpLmmse;
    est->add_option("instance", instance_path, "instance JSON file")->required();
    est->add_option("--estimator", estimator, "smp-lmmse, lmmse, genie or amp");

    auto* bench = app.add_subcommand("bench", "run the experiment described by --config");

    std::optional<int> trials;
    bool full = false;
    auto* sweep_snr = app.add_subcommand("sweep-snr", "MSE against SNR preset (lambda = 0.04)");
    auto* sweep_it = app.add_subcommand("sweep-iterations", "MSE against iteration preset (50 dB)");
    for (auto* sub : {sweep_snr, sweep_it}) {
        sub->add_option("--trials", trials, "override the number of trials");
        sub->add_flag("--full", full, "full-size problem (long running)");
    }

    auto* bounds = app.add_subcommand("bounds", "print bound reports for each (snr, trial) of a config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*generate) return cmd_generate(g, n, m, lambda, dist, dof, snr_db, trial);
        if (*est) return cmd_estimate(g, instance_path, estimator);
        if (*bench) return cmd_bench(g);
        if (*sweep_snr) return cmd_preset(g, preset_sweep_snr(full), trials);
        if (*sweep_it) return cmd_preset(g, preset_sweep_iterations(full), trials);
        if (*bounds) return cmd_bounds(g);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
