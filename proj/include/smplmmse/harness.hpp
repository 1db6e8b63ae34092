#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "smplmmse/config.hpp"
#include "smplmmse/signal_model.hpp"
#include "smplmmse/turbo.hpp"

namespace smplmmse {

inline constexpr const char* kCsvHeader =
    "trial,estimator,snr_db,iteration,mse,mse_db,support_error_rate,wall_time_ms,seed";
inline constexpr int kCsvSchemaVersion = 1;

inline constexpr const char* kEstimatorSmpLmmse = "smp-lmmse";
inline constexpr const char* kEstimatorLmmse = "lmmse";
inline constexpr const char* kEstimatorGenie = "genie";
inline constexpr const char* kEstimatorAmp = "amp";

inline constexpr const char* kBoundUpper = "bound:lemma1_upper";
inline constexpr const char* kBoundLower = "bound:lemma2_lower";
inline constexpr const char* kBoundProp1 = "bound:prop1_trace";
inline constexpr const char* kBoundAsymptote = "bound:lemma4_asymptote";

struct ExperimentConfig {
    Eigen::Index n = 512;
    Eigen::Index m = 256;
    SparsityPrior prior{0.125, ActiveDistribution::gaussian(0.0, 1.0)};
    std::vector<double> snr_grid{50.0};  // dB
    int trials = 100;
    std::vector<std::string> estimators{kEstimatorSmpLmmse, kEstimatorLmmse, kEstimatorGenie, kEstimatorAmp};
    std::uint64_t master_seed = 1;
    TurboConfig turbo;
    int amp_iterations = 20;
    /// Permits m > n, which is otherwise rejected.
    bool allow_m_greater_than_n = false;
    /// Off by default: measured wall times would make the CSV non-reproducible.
    bool record_timing = false;
    std::filesystem::path output_path = "results.csv";

    /// Throws ConfigError on any invalid field or unknown estimator name.
    void validate() const;
};

ExperimentConfig experiment_from_document(const ConfigDocument& doc);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// MSE-per-iteration run: one SNR, per-iteration rows for the iterative estimators.
ExperimentConfig preset_sweep_iterations(bool full_size);
/// MSE-against-SNR run: SNR grid {-20, ..., 50} dB at lambda = 0.04.
ExperimentConfig preset_sweep_snr(bool full_size);

struct TrialRecord {
    int trial = 0;
    std::string estimator;
    double snr_db = 0.0;
    int iteration = 0;  // 0 for one-shot estimators and bounds
    double mse = 0.0;
    double mse_db = 0.0;
    double support_error_rate = 0.0;
    double wall_time_ms = 0.0;
    std::uint64_t seed = 0;
};

/// ||x_hat - x||^2 / N.
double mse(const VectorXd& x_hat, const VectorXd& x_true);

/// Hamming distance / N between binary vectors.
double support_error_rate(const VectorXd& b_hat_hard, const VectorXd& b_true);

double to_db(double value);

/// Per-trial seed; shared across the SNR grid so each trial sees the same H, s, b.
std::uint64_t trial_seed(std::uint64_t master_seed, int trial);

/// Runs every (snr, trial) cell on `threads` workers; the result is sorted by
/// (snr_db, trial, estimator, iteration) and independent of the thread count.
std::vector<TrialRecord> run_experiment(const ExperimentConfig& config, int threads = 1);

/// Records for a single instance (one cell of run_experiment).
std::vector<TrialRecord> run_trial(const ExperimentConfig& config, int trial, double snr_db);

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);
void write_csv(const std::filesystem::path& path, const std::vector<TrialRecord>& records);
std::string to_csv(const std::vector<TrialRecord>& records);

struct SummaryRow {
    std::string estimator;
    double snr_db = 0.0;
    int iteration = 0;
    std::size_t count = 0;
    double mean_mse = 0.0;
    double stderr_mse = 0.0;
    /// dB of the mean, not mean of the dB values.
    double mean_mse_db = 0.0;
};

/// Mean and standard error of mse per (estimator, snr_db, iteration).
std::vector<SummaryRow> aggregate(const std::vector<TrialRecord>& records);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace smplmmse
