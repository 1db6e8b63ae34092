#pragma once

#include <cmath>

#include <Eigen/Dense>

namespace smplmmse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DetectorConfig {
    int max_iterations = 15;
    double llr_clamp = 30.0;
    double convergence_tol = 1e-4;
    /// Weight of the previous sum-to-variable message; 0 disables damping.
    double damping = 0.0;

    void validate() const;
};

/// Mean and variance of the equivalent Gaussian noise seen on every edge (m, n).
struct GaussianEdgeStats {
    MatrixXd mean;      // M x N
    MatrixXd variance;  // M x N, floored at sigma_w^2
};

/// Messages and posteriors of the Bernoulli factor graph. Edge matrices are
/// indexed (m, n): row = sum node, column = variable node.
struct DetectorState {
    int iteration = 0;
    double prior_llr = 0.0;
    MatrixXd llr_sum_to_var;  // l^s_{m->n}
    MatrixXd llr_var_to_sum;  // l^v_{n->m}
    VectorXd llr_full;        // l^b_n
    VectorXd posterior;       // sigmoid(l^b_n)
    double last_max_delta = INFINITY;

    /// Every variable-to-sum message starts at the prior LLR.
    static DetectorState initial(Eigen::Index m, Eigen::Index n, double lambda);
};

double sigmoid(double llr) noexcept;

/// Per-edge equivalent-noise statistics from row aggregates minus each edge's
/// own term; O(MN).
GaussianEdgeStats sum_node_stats(const MatrixXd& H, const VectorXd& s_hat, const VectorXd& v_s_hat,
                                 const MatrixXd& p_var_to_sum, double sigma_w_sq);

/// Sum-node LLR of b_n given y_m and the equivalent noise, clamped to +-clamp.
MatrixXd sum_node_llr(const VectorXd& y, const GaussianEdgeStats& stats, const MatrixXd& H, const VectorXd& s_hat,
                      const VectorXd& v_s_hat, double clamp);

/// Extrinsic variable-to-sum LLRs: prior + all incoming messages except the edge's own.
MatrixXd variable_node_update(const MatrixXd& llr_sum_to_var, double prior_llr, double clamp);

struct PosteriorUpdate {
    VectorXd llr_full;
    VectorXd posterior;
};

PosteriorUpdate posterior_update(const MatrixXd& llr_sum_to_var, double prior_llr, double clamp);

struct PassResult {
    bool converged = false;
    double max_delta = 0.0;
};

/// One flooding sweep: sum nodes, variable nodes, posteriors. Mutates `state`.
PassResult detector_pass(DetectorState& state, const MatrixXd& H, const VectorXd& y, const VectorXd& s_hat,
                         const VectorXd& v_s_hat, double sigma_w_sq, const DetectorConfig& config);

/// Sweeps with fixed (s_hat, v_s_hat) until converged or config.max_iterations.
/// Returns the number of sweeps performed.
int run_detector(DetectorState& state, const MatrixXd& H, const VectorXd& y, const VectorXd& s_hat,
                 const VectorXd& v_s_hat, double sigma_w_sq, const DetectorConfig& config);

}  // namespace smplmmse
