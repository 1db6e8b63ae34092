#pragma once

#include <vector>

#include <Eigen/Dense>

#include "smplmmse/lmmse.hpp"
#include "smplmmse/signal_model.hpp"

namespace smplmmse {

/// Error-covariance traces (totals over all N entries, not per component).
struct BoundReport {
    double upper_lmmse = 0.0;
    double lower_genie = 0.0;
    double prop1_trace = 0.0;
    double alpha = 0.0;
    double asymptote = 0.0;
};

/// Trace of the plain-LMMSE error covariance of x.
double lemma1_upper(const MatrixXd& H, const SparsityPrior& prior, const PriorMoments& moments, double sigma_w_sq);

/// Trace of the genie-aided error covariance on `support`.
double lemma2_lower(const MatrixXd& H, const std::vector<Eigen::Index>& support, const PriorMoments& moments,
                    double sigma_w_sq);

/// trace(sigma^{-2} (H_L^T H_L + snr^{-1} I)^{-1}), with the sigma^{-2} prefactor outside the inverse.
double prop1_trace(const MatrixXd& H, const std::vector<Eigen::Index>& support, double snr, double sigma_w_sq);

/// alpha / sigma_w^2.
double lemma4_asymptote(double alpha, double sigma_w_sq);

/// Cauchy interlacing between the spectrum of `full` and that of `restricted`
/// (sorted descending): full_k >= restricted_k >= full_{k+N-L}, with 1e-8
/// relative slack. Throws DomainError for non-symmetric or indefinite input.
bool check_interlacing(const MatrixXd& full, const MatrixXd& restricted);

BoundReport bound_report(const ProblemInstance& inst);

}  // namespace smplmmse
