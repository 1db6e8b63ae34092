#pragma once

#include <Eigen/Dense>

#include "smplmmse/signal_model.hpp"

namespace smplmmse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// First two moments of the value vector s. The covariance is diagonal.
struct PriorMoments {
    VectorXd mean;
    VectorXd variance;

    /// Throws DomainError unless every variance is strictly positive.
    void validate() const;

    /// mean = E[s] * 1, variance = Var(s) * 1 for the active distribution of `prior`.
    static PriorMoments from_prior(const SparsityPrior& prior, Eigen::Index n);
};

enum class CovarianceMode {
    /// Only the diagonal of the error covariance, via the M x M factorization.
    DiagonalOnly,
    /// Full N x N error covariance from the information form.
    Full,
};

struct ValueEstimate {
    VectorXd s_hat;
    VectorXd v_diag;
    /// Empty unless CovarianceMode::Full was requested.
    MatrixXd V_hat;
};

/// Support-aware LMMSE estimate of s given soft support b_hat, with G = H D(b_hat):
///   s_hat = u + V G^T (G V G^T + sigma^2 I)^{-1} (y - G u)
///   V_hat = (sigma^{-2} G^T G + V^{-1})^{-1}
ValueEstimate lmmse_values(const MatrixXd& H, const VectorXd& y, const VectorXd& b_hat, const PriorMoments& prior,
                           double sigma_w_sq, CovarianceMode mode = CovarianceMode::DiagonalOnly);

/// Per-entry value estimate given that entry n is active, the rest of the
/// support being uncertain. Column i enters the innovation covariance with
/// weight b_i V_i + b_i (1 - b_i) u_i^2 (second moment of s_i b_i minus the
/// squared mean), and column n alone is lifted to weight V_n:
///   s_hat_n = E[s_n | y, b_n = 1],  v_diag_n = Var[s_n | y, b_n = 1].
/// Agrees with lmmse_values wherever b_hat_n = 1 and every other b_hat_i is 0 or 1.
ValueEstimate conditional_values(const MatrixXd& H, const VectorXd& y, const VectorXd& b_hat,
                                 const PriorMoments& prior, double sigma_w_sq);

enum class SnrForm {
    /// Regularizer snr^{-1} I on G G^T; used for the snr -> infinity limit.
    HighSnr,
    /// Gain scaled by snr with identity regularizer; used for the snr -> 0 limit.
    LowSnr,
};

/// SNR-parameterized rewrite of lmmse_values. Requires an isotropic prior
/// covariance V = v I; the rewrite then equals lmmse_values with
/// sigma_w^2 = v / snr. Always returns the full covariance.
ValueEstimate lmmse_values_snr_form(const MatrixXd& H, const VectorXd& y, const VectorXd& b_hat,
                                    const PriorMoments& prior, double snr, SnrForm form);

/// Noise variance that makes the SNR rewrite equivalent to the sigma form.
double equivalent_noise_variance(const PriorMoments& prior, double snr);

/// trace(V_hat).
double lmmse_mse(const MatrixXd& V_hat);

}  // namespace smplmmse
