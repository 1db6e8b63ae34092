#include "smplmmse/baselines.hpp"

#include <cmath>

#include "smplmmse/errors.hpp"

namespace smplmmse {

PriorMoments marginal_moments(const SparsityPrior& prior, const PriorMoments& moments) {
    const double lambda = prior.lambda;
    PriorMoments out;
    out.mean = lambda * moments.mean;
    out.variance = lambda * (moments.variance + moments.mean.cwiseAbs2()) - out.mean.cwiseAbs2();
    return out;
}

LinearEstimate plain_lmmse(const MatrixXd& H, const VectorXd& y, const SparsityPrior& prior,
                           const PriorMoments& moments, double sigma_w_sq) {
    prior.validate();
    if (!(sigma_w_sq > 0.0)) throw DomainError("plain_lmmse: sigma_w_sq must be > 0");
    if (y.size() != H.rows() || moments.mean.size() != H.cols()) throw DomainError("plain_lmmse: dimension mismatch");
    const PriorMoments x_moments = marginal_moments(prior, moments);
    if (prior.lambda == 0.0 || (x_moments.variance.array() <= 0.0).all()) {
        return {VectorXd::Zero(H.cols()), 0.0};
    }
    // Plain LMMSE of x is the value estimator with every entry marked active.
    auto est = lmmse_values(H, y, VectorXd::Ones(H.cols()), x_moments, sigma_w_sq);
    return {std::move(est.s_hat), est.v_diag.sum()};
}

LinearEstimate genie_mmse(const MatrixXd& H, const VectorXd& y, const std::vector<Eigen::Index>& support,
                          const PriorMoments& moments, double sigma_w_sq) {
    if (!(sigma_w_sq > 0.0)) throw DomainError("genie_mmse: sigma_w_sq must be > 0");
    if (y.size() != H.rows() || moments.mean.size() != H.cols()) throw DomainError("genie_mmse: dimension mismatch");
    LinearEstimate out{VectorXd::Zero(H.cols()), 0.0};
    if (support.empty()) return out;
    for (const auto idx : support) {
        if (idx < 0 || idx >= H.cols()) throw DomainError("genie_mmse: support index out of range");
    }
    const auto l = static_cast<Eigen::Index>(support.size());
    const MatrixXd H_l = H(Eigen::all, support);
    const VectorXd mean_l = moments.mean(support);
    const VectorXd var_l = moments.variance(support);
    if (!(var_l.array() > 0.0).all()) throw DomainError("genie_mmse: prior variances must be > 0");

    MatrixXd info = var_l.cwiseInverse().asDiagonal();
    info.selfadjointView<Eigen::Lower>().rankUpdate(H_l.transpose(), 1.0 / sigma_w_sq);
    const Eigen::LLT<MatrixXd, Eigen::Lower> factor(info);
    if (factor.info() != Eigen::Success) throw NumericalError("genie_mmse: information matrix not positive definite");

    const VectorXd x_l = mean_l + factor.solve(H_l.transpose() * (y - H_l * mean_l)) / sigma_w_sq;
    out.x_hat(support) = x_l;
    out.mse_pred = factor.solve(MatrixXd::Identity(l, l)).trace();
    return out;
}

AmpResult amp_estimate(const MatrixXd& H, const VectorXd& y, const DenoiserSpec& denoiser, int iterations,
                       const std::optional<Truth>& truth) {
    if (iterations < 1) throw ConfigError("amp iterations must be >= 1");
    if (y.size() != H.rows()) throw DomainError("amp: dimension mismatch");
    const Eigen::Index m = H.rows();
    const Eigen::Index n = H.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    const MatrixXd A = H * scale;
    const VectorXd y_scaled = y * scale;
    const double ratio = static_cast<double>(n) / static_cast<double>(m);

    const SparsityPrior& prior = denoiser.prior();
    AmpResult result;
    VectorXd x = VectorXd::Constant(n, prior.lambda * prior.active.mean());
    result.activity = VectorXd::Constant(n, prior.lambda);
    VectorXd z = y_scaled - A * x;
    VectorXd post_var(n);
    std::vector<double> residual_history;

    for (int t = 1; t <= iterations; ++t) {
        const double tau_sq = std::max(z.squaredNorm() / static_cast<double>(m), 1e-300);
        const VectorXd r = x + A.transpose() * z;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto out = denoiser(r[i], tau_sq);
            x[i] = out.mean;
            post_var[i] = out.variance;
            result.activity[i] = out.activity;
        }
        const double onsager = ratio * post_var.mean() / tau_sq;
        z = y_scaled - A * x + onsager * z;

        AmpIteration rec;
        rec.iteration = t;
        rec.tau_sq = tau_sq;
        rec.residual_norm = z.norm();
        if (truth) {
            rec.mse = (x - truth->x).squaredNorm() / static_cast<double>(n);
            Eigen::Index flips = 0;
            for (Eigen::Index i = 0; i < n; ++i) {
                flips += ((result.activity[i] > 0.5) != (truth->b[i] != 0.0)) ? 1 : 0;
            }
            rec.support_error_rate = static_cast<double>(flips) / static_cast<double>(n);
        }
        result.trajectory.push_back(rec);
        residual_history.push_back(rec.residual_norm);

        const auto k = residual_history.size();
        if (!std::isfinite(rec.residual_norm) ||
            (k > 5 && residual_history[k - 1] > 10.0 * residual_history[k - 6])) {
            result.diverged = true;
            break;
        }
    }
    result.x_hat = std::move(x);
    return result;
}

}  // namespace smplmmse
