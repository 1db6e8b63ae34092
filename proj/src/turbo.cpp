#include "smplmmse/turbo.hpp"

#include <cmath>

#include "smplmmse/errors.hpp"

namespace smplmmse {

void TurboConfig::validate() const {
    if (max_outer_iterations < 1) throw ConfigError("turbo max_outer_iterations must be >= 1");
    if (!(stop_tol >= 0.0)) throw ConfigError("turbo stop_tol must be >= 0");
    detector.validate();
}

VectorXd combine(const VectorXd& s_hat, const VectorXd& b_hat, bool hard) {
    if (s_hat.size() != b_hat.size()) throw DomainError("combine: length mismatch");
    if (!hard) return s_hat.cwiseProduct(b_hat);
    return s_hat.cwiseProduct(b_hat.unaryExpr([](double p) { return p > 0.5 ? 1.0 : 0.0; }));
}

bool stopping_check(const std::vector<TurboIteration>& trajectory, const TurboConfig& config) {
    if (trajectory.empty()) throw DomainError("stopping_check: empty trajectory");
    return static_cast<int>(trajectory.size()) >= config.max_outer_iterations ||
           trajectory.back().rel_change < config.stop_tol;
}

namespace {

double relative_change(const VectorXd& current, const VectorXd& previous) {
    const double base = previous.norm();
    const double diff = (current - previous).norm();
    if (base == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return diff / base;
}

void score(TurboIteration& rec, const VectorXd& x_hat, const VectorXd& b_hat, const std::optional<Truth>& truth) {
    if (!truth) return;
    const auto n = static_cast<double>(x_hat.size());
    rec.mse = (x_hat - truth->x).squaredNorm() / n;
    Eigen::Index flips = 0;
    for (Eigen::Index i = 0; i < b_hat.size(); ++i) {
        flips += ((b_hat[i] > 0.5) != (truth->b[i] != 0.0)) ? 1 : 0;
    }
    rec.support_error_rate = static_cast<double>(flips) / n;
}

}  // namespace

TurboResult estimate(const MatrixXd& H, const VectorXd& y, const SparsityPrior& prior, const PriorMoments& moments,
                     double sigma_w_sq, const TurboConfig& config, const std::optional<Truth>& truth) {
    config.validate();
    prior.validate();
    moments.validate();
    const Eigen::Index n = H.cols();
    if (y.size() != H.rows() || moments.mean.size() != n) throw DomainError("estimate: dimension mismatch");
    if (!(sigma_w_sq > 0.0) && prior.lambda != 0.0) throw DomainError("estimate: sigma_w_sq must be > 0");

    TurboResult result;
    if (prior.lambda == 0.0 || prior.lambda == 1.0) {
        TurboIteration rec;
        rec.iteration = 1;
        rec.detector_converged = true;
        rec.rel_change = 0.0;
        if (prior.lambda == 0.0) {
            result.degenerate = Degenerate::AllZero;
            result.b_hat = VectorXd::Zero(n);
            result.s_hat = moments.mean;
            result.v_diag = moments.variance;
            result.x_hat = VectorXd::Zero(n);
        } else {
            result.degenerate = Degenerate::Dense;
            result.b_hat = VectorXd::Ones(n);
            auto value = lmmse_values(H, y, result.b_hat, moments, sigma_w_sq);
            result.s_hat = std::move(value.s_hat);
            result.v_diag = std::move(value.v_diag);
            result.x_hat = result.s_hat;
        }
        rec.trace_v = result.v_diag.sum();
        score(rec, result.x_hat, result.b_hat, truth);
        if (config.keep_snapshots) rec.x_hat = result.x_hat;
        result.trajectory.push_back(std::move(rec));
        return result;
    }

    DetectorState state = DetectorState::initial(H.rows(), n, prior.lambda);
    // Before any LMMSE pass the value estimate is the prior itself.
    VectorXd s_hat = moments.mean;
    VectorXd v_s_hat = moments.variance;
    VectorXd x_prev;

    while (true) {
        const PassResult pass = detector_pass(state, H, y, s_hat, v_s_hat, sigma_w_sq, config.detector);
        const VectorXd lmmse_support =
            config.hard_support ? state.posterior.unaryExpr([](double p) { return p > 0.5 ? 1.0 : 0.0; })
                                : state.posterior;
        auto value = config.value_rule == ValueRule::Conditional
                         ? conditional_values(H, y, lmmse_support, moments, sigma_w_sq)
                         : lmmse_values(H, y, lmmse_support, moments, sigma_w_sq);
        s_hat = std::move(value.s_hat);
        v_s_hat = std::move(value.v_diag);
        VectorXd x_hat = combine(s_hat, state.posterior, config.hard_combine);

        TurboIteration rec;
        rec.iteration = static_cast<int>(result.trajectory.size()) + 1;
        rec.detector_max_delta = pass.max_delta;
        rec.detector_converged = pass.converged;
        rec.trace_v = v_s_hat.sum();
        rec.rel_change = x_prev.size() == 0 ? INFINITY : relative_change(x_hat, x_prev);
        score(rec, x_hat, state.posterior, truth);
        if (config.keep_snapshots) rec.x_hat = x_hat;
        result.trajectory.push_back(std::move(rec));
        x_prev = std::move(x_hat);
        if (stopping_check(result.trajectory, config)) break;
    }

    result.x_hat = std::move(x_prev);
    result.b_hat = state.posterior;
    result.s_hat = std::move(s_hat);
    result.v_diag = std::move(v_s_hat);
    return result;
}

}  // namespace smplmmse
