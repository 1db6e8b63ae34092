#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "smplmmse/lmmse.hpp"
#include "smplmmse/signal_model.hpp"
#include "smplmmse/smp_detector.hpp"

namespace smplmmse {

enum class ValueRule {
    /// conditional_values: E[s_n | y, b_n = 1] under the soft support.
    Conditional,
    /// lmmse_values with G = H D(b_hat), b_hat taken as a known scaling.
    Literal,
};

struct TurboConfig {
    int max_outer_iterations = 10;
    DetectorConfig detector;
    /// Stop once ||x_t - x_{t-1}|| / ||x_{t-1}|| falls below this.
    double stop_tol = 1e-6;
    /// Threshold b_hat at 0.5 in the final combiner.
    bool hard_combine = false;
    /// Threshold b_hat at 0.5 before it enters D(b_hat) in the LMMSE stage (ablation).
    bool hard_support = false;
    ValueRule value_rule = ValueRule::Conditional;
    bool keep_snapshots = false;

    void validate() const;
};

/// Ground truth, when the caller has it (simulation only).
struct Truth {
    VectorXd x;
    VectorXd b;
};

struct TurboIteration {
    int iteration = 0;  // 1-based
    double detector_max_delta = 0.0;
    bool detector_converged = false;
    double trace_v = 0.0;
    double rel_change = INFINITY;
    /// Per-component MSE and support error rate against Truth; NaN without it.
    double mse = NAN;
    double support_error_rate = NAN;
    VectorXd x_hat;  // only with keep_snapshots
};

enum class Degenerate {
    None,
    /// lambda = 0: the estimate is identically zero.
    AllZero,
    /// lambda = 1: plain LMMSE on the full matrix.
    Dense,
};

struct TurboResult {
    VectorXd x_hat;
    VectorXd b_hat;
    VectorXd s_hat;
    VectorXd v_diag;
    std::vector<TurboIteration> trajectory;
    Degenerate degenerate = Degenerate::None;
};

/// x_hat = s_hat .* b_hat, with b_hat thresholded at 0.5 first in hard mode.
VectorXd combine(const VectorXd& s_hat, const VectorXd& b_hat, bool hard);

bool stopping_check(const std::vector<TurboIteration>& trajectory, const TurboConfig& config);

/// SMP-LMMSE: alternate one detector sweep and one LMMSE value estimate until
/// stopping_check fires, then combine.
TurboResult estimate(const MatrixXd& H, const VectorXd& y, const SparsityPrior& prior, const PriorMoments& moments,
                     double sigma_w_sq, const TurboConfig& config, const std::optional<Truth>& truth = std::nullopt);

}  // namespace smplmmse
