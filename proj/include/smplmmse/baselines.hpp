#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "smplmmse/denoiser.hpp"
#include "smplmmse/lmmse.hpp"
#include "smplmmse/signal_model.hpp"
#include "smplmmse/turbo.hpp"

namespace smplmmse {

struct LinearEstimate {
    VectorXd x_hat;
    /// Trace of the error covariance (total, not per component).
    double mse_pred = 0.0;
};

/// Marginal moments of x_i = s_i b_i.
PriorMoments marginal_moments(const SparsityPrior& prior, const PriorMoments& moments);

/// LMMSE of x ignoring sparsity beyond the marginal moments of x.
LinearEstimate plain_lmmse(const MatrixXd& H, const VectorXd& y, const SparsityPrior& prior,
                           const PriorMoments& moments, double sigma_w_sq);

/// LMMSE restricted to the true support columns; zeros elsewhere. Exact MMSE
/// when the active values are Gaussian.
LinearEstimate genie_mmse(const MatrixXd& H, const VectorXd& y, const std::vector<Eigen::Index>& support,
                          const PriorMoments& moments, double sigma_w_sq);

struct AmpIteration {
    int iteration = 0;  // 1-based
    double tau_sq = 0.0;
    double residual_norm = 0.0;
    double mse = NAN;
    double support_error_rate = NAN;
};

struct AmpResult {
    VectorXd x_hat;
    VectorXd activity;
    std::vector<AmpIteration> trajectory;
    bool diverged = false;
};

/// Bayes-optimal AMP with Onsager correction. H is rescaled by 1/sqrt(M)
/// internally so that its columns have unit expected norm.
AmpResult amp_estimate(const MatrixXd& H, const VectorXd& y, const DenoiserSpec& denoiser, int iterations,
                       const std::optional<Truth>& truth = std::nullopt);

}  // namespace smplmmse
