#include "smplmmse/smp_detector.hpp"

#include <cmath>

#include "smplmmse/errors.hpp"

namespace smplmmse {

void DetectorConfig::validate() const {
    if (max_iterations < 1) throw ConfigError("detector max_iterations must be >= 1");
    if (!(llr_clamp > 0.0) || !std::isfinite(llr_clamp)) throw ConfigError("detector llr_clamp must be finite and > 0");
    if (!(convergence_tol > 0.0)) throw ConfigError("detector convergence_tol must be > 0");
    if (!(damping >= 0.0 && damping < 1.0)) throw ConfigError("detector damping must lie in [0, 1)");
}

double sigmoid(double llr) noexcept { return 1.0 / (1.0 + std::exp(-llr)); }

DetectorState DetectorState::initial(Eigen::Index m, Eigen::Index n, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw DomainError("detector needs 0 < lambda < 1");
    }
    const double l0 = -std::log(1.0 / lambda - 1.0);
    DetectorState state;
    state.prior_llr = l0;
    state.llr_sum_to_var = MatrixXd::Zero(m, n);
    state.llr_var_to_sum = MatrixXd::Constant(m, n, l0);
    state.llr_full = VectorXd::Constant(n, l0);
    state.posterior = VectorXd::Constant(n, lambda);
    return state;
}

GaussianEdgeStats sum_node_stats(const MatrixXd& H, const VectorXd& s_hat, const VectorXd& v_s_hat,
                                 const MatrixXd& p_var_to_sum, double sigma_w_sq) {
    const Eigen::Index n = H.cols();
    if (s_hat.size() != n || v_s_hat.size() != n || p_var_to_sum.rows() != H.rows() || p_var_to_sum.cols() != n) {
        throw DomainError("sum_node_stats: dimension mismatch");
    }
    if ((v_s_hat.array() < 0.0).any()) throw DomainError("sum_node_stats: negative value variance");
    if (!(sigma_w_sq > 0.0)) throw DomainError("sum_node_stats: sigma_w_sq must be > 0");

    const auto h = H.array();
    const auto p = p_var_to_sum.array();
    const Eigen::ArrayXXd hp = h * p;
    const Eigen::ArrayXXd mean_terms = hp.rowwise() * s_hat.transpose().array();
    const Eigen::ArrayXXd s_sq = (s_hat.array().square()).transpose().replicate(H.rows(), 1);
    const Eigen::ArrayXXd var_terms =
        (h * hp) * ((1.0 - p) * s_sq + v_s_hat.transpose().array().replicate(H.rows(), 1));

    GaussianEdgeStats stats;
    stats.mean = (mean_terms.rowwise().sum().replicate(1, n) - mean_terms).matrix();
    stats.variance =
        ((var_terms.rowwise().sum().replicate(1, n) - var_terms) + sigma_w_sq).max(sigma_w_sq).matrix();
    return stats;
}

MatrixXd sum_node_llr(const VectorXd& y, const GaussianEdgeStats& stats, const MatrixXd& H, const VectorXd& s_hat,
                      const VectorXd& v_s_hat, double clamp) {
    const Eigen::Index m = H.rows();
    const Eigen::Index n = H.cols();
    if (y.size() != m || stats.mean.rows() != m || stats.mean.cols() != n || stats.variance.rows() != m ||
        stats.variance.cols() != n) {
        throw DomainError("sum_node_llr: dimension mismatch");
    }
    if (!(stats.variance.array() > 0.0).all()) {
        throw NumericalError("sum_node_llr: non-positive equivalent noise variance");
    }
    const auto h = H.array();
    const auto v = stats.variance.array();
    const Eigen::ArrayXXd residual = y.array().replicate(1, n) - stats.mean.array();
    const Eigen::ArrayXXd spread = h.square().rowwise() * v_s_hat.transpose().array();
    const Eigen::ArrayXXd active_var = v + spread;
    const Eigen::ArrayXXd active_residual = residual - h.rowwise() * s_hat.transpose().array();

    Eigen::ArrayXXd llr = -0.5 * (spread / v).log1p() - active_residual.square() / (2.0 * active_var) +
                          residual.square() / (2.0 * v);
    return llr.max(-clamp).min(clamp).matrix();
}

MatrixXd variable_node_update(const MatrixXd& llr_sum_to_var, double prior_llr, double clamp) {
    const Eigen::RowVectorXd totals = llr_sum_to_var.colwise().sum().array() + prior_llr;
    Eigen::ArrayXXd out = totals.replicate(llr_sum_to_var.rows(), 1).array() - llr_sum_to_var.array();
    return out.max(-clamp).min(clamp).matrix();
}

PosteriorUpdate posterior_update(const MatrixXd& llr_sum_to_var, double prior_llr, double clamp) {
    PosteriorUpdate out;
    out.llr_full = (llr_sum_to_var.colwise().sum().transpose().array() + prior_llr).max(-clamp).min(clamp).matrix();
    out.posterior = out.llr_full.unaryExpr([](double l) { return sigmoid(l); });
    return out;
}

PassResult detector_pass(DetectorState& state, const MatrixXd& H, const VectorXd& y, const VectorXd& s_hat,
                         const VectorXd& v_s_hat, double sigma_w_sq, const DetectorConfig& config) {
    const MatrixXd p = state.llr_var_to_sum.unaryExpr([](double l) { return sigmoid(l); });
    const auto stats = sum_node_stats(H, s_hat, v_s_hat, p, sigma_w_sq);
    MatrixXd fresh = sum_node_llr(y, stats, H, s_hat, v_s_hat, config.llr_clamp);
    if (config.damping > 0.0 && state.iteration > 0) {
        // damp the sum-to-variable messages so both l^v and the exported posterior move together
        fresh = (1.0 - config.damping) * fresh + config.damping * state.llr_sum_to_var;
    }
    state.llr_sum_to_var = std::move(fresh);
    state.llr_var_to_sum = variable_node_update(state.llr_sum_to_var, state.prior_llr, config.llr_clamp);

    auto post = posterior_update(state.llr_sum_to_var, state.prior_llr, config.llr_clamp);
    const double delta = (post.llr_full - state.llr_full).cwiseAbs().maxCoeff();
    state.llr_full = std::move(post.llr_full);
    state.posterior = std::move(post.posterior);
    state.last_max_delta = delta;
    ++state.iteration;
    return {delta < config.convergence_tol, delta};
}

int run_detector(DetectorState& state, const MatrixXd& H, const VectorXd& y, const VectorXd& s_hat,
                 const VectorXd& v_s_hat, double sigma_w_sq, const DetectorConfig& config) {
    config.validate();
    int sweeps = 0;
    while (sweeps < config.max_iterations) {
        ++sweeps;
        if (detector_pass(state, H, y, s_hat, v_s_hat, sigma_w_sq, config).converged) break;
    }
    return sweeps;
}

}  // namespace smplmmse
