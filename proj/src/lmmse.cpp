#include "smplmmse/lmmse.hpp"

#include <cmath>

#include "smplmmse/errors.hpp"

namespace smplmmse {

void PriorMoments::validate() const {
    if (mean.size() != variance.size()) throw DomainError("prior moments: mean/variance length mismatch");
    if (!(variance.array() > 0.0).all()) throw DomainError("prior moments: variances must be > 0");
}

PriorMoments PriorMoments::from_prior(const SparsityPrior& prior, Eigen::Index n) {
    PriorMoments moments{VectorXd::Constant(n, prior.active.mean()), VectorXd::Constant(n, prior.active.variance())};
    moments.validate();
    return moments;
}

namespace {

void check_dimensions(const MatrixXd& H, const VectorXd& y, const VectorXd& b_hat, const PriorMoments& prior) {
    if (y.size() != H.rows() || b_hat.size() != H.cols() || prior.mean.size() != H.cols()) {
        throw DomainError("lmmse: dimension mismatch");
    }
    prior.validate();
}

MatrixXd scale_columns(const MatrixXd& A, const VectorXd& d) {
    return (A.array().rowwise() * d.transpose().array()).matrix();
}

template <typename Factor>
void require_success(const Factor& f, const char* what) {
    if (f.info() != Eigen::Success) throw NumericalError(what);
}

MatrixXd symmetrized(const MatrixXd& A) { return 0.5 * (A + A.transpose()); }

}  // namespace

ValueEstimate lmmse_values(const MatrixXd& H, const VectorXd& y, const VectorXd& b_hat, const PriorMoments& prior,
                           double sigma_w_sq, CovarianceMode mode) {
    if (!(sigma_w_sq > 0.0)) throw DomainError("lmmse: sigma_w_sq must be > 0");
    check_dimensions(H, y, b_hat, prior);
    const Eigen::Index m = H.rows();

    const MatrixXd G = scale_columns(H, b_hat);
    // W W^T = G V G^T
    const MatrixXd W = scale_columns(G, prior.variance.cwiseSqrt());
    MatrixXd S = MatrixXd::Identity(m, m) * sigma_w_sq;
    S.selfadjointView<Eigen::Lower>().rankUpdate(W);
    const Eigen::LLT<MatrixXd, Eigen::Lower> innovation(S);
    require_success(innovation, "lmmse: innovation covariance not positive definite");

    const VectorXd residual = y - G * prior.mean;
    ValueEstimate est;
    est.s_hat = prior.mean + prior.variance.cwiseProduct(G.transpose() * innovation.solve(residual));

    if (mode == CovarianceMode::DiagonalOnly) {
        const MatrixXd whitened = innovation.matrixL().solve(W);
        const VectorXd explained = whitened.colwise().squaredNorm().transpose();
        est.v_diag = (prior.variance - prior.variance.cwiseProduct(explained))
                         .cwiseMax(0.0)
                         .cwiseMin(prior.variance);
        return est;
    }

    const Eigen::Index n = H.cols();
    MatrixXd info = prior.variance.cwiseInverse().asDiagonal();
    info.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose(), 1.0 / sigma_w_sq);
    const Eigen::LLT<MatrixXd, Eigen::Lower> info_factor(info);
    require_success(info_factor, "lmmse: information matrix not positive definite");
    est.V_hat = symmetrized(info_factor.solve(MatrixXd::Identity(n, n)));
    est.v_diag = est.V_hat.diagonal().cwiseMax(0.0).cwiseMin(prior.variance);
    return est;
}

ValueEstimate conditional_values(const MatrixXd& H, const VectorXd& y, const VectorXd& b_hat,
                                 const PriorMoments& prior, double sigma_w_sq) {
    if (!(sigma_w_sq > 0.0)) throw DomainError("lmmse: sigma_w_sq must be > 0");
    check_dimensions(H, y, b_hat, prior);
    if ((b_hat.array() < 0.0).any() || (b_hat.array() > 1.0).any()) {
        throw DomainError("conditional_values: b_hat must lie in [0, 1]");
    }
    const Eigen::Index m = H.rows();
    const auto b = b_hat.array();
    const auto u = prior.mean.array();
    const auto V = prior.variance.array();

    const VectorXd weight = (b * V + b * (1.0 - b) * u.square()).matrix();
    MatrixXd C = MatrixXd::Identity(m, m) * sigma_w_sq;
    C.selfadjointView<Eigen::Lower>().rankUpdate(scale_columns(H, weight.cwiseSqrt()));
    const Eigen::LLT<MatrixXd, Eigen::Lower> innovation(C);
    require_success(innovation, "lmmse: innovation covariance not positive definite");

    const VectorXd residual = y - H * b_hat.cwiseProduct(prior.mean);
    // a_n = h_n^T C^-1 h_n,  q_n = h_n^T C^-1 r
    const Eigen::ArrayXd a = innovation.matrixL().solve(H).colwise().squaredNorm().transpose().array();
    const Eigen::ArrayXd q = (H.transpose() * innovation.solve(residual)).array();

    // lifting column n from weight w_n to V_n is a rank-one update of C
    const Eigen::ArrayXd lift = V - weight.array();
    const Eigen::ArrayXd gain = 1.0 / (1.0 + lift * a);
    ValueEstimate est;
    est.s_hat = (u + V * (q - (1.0 - b) * u * a) * gain).matrix();
    est.v_diag = (V - V.square() * a * gain).max(0.0).min(V).matrix();
    return est;
}

double equivalent_noise_variance(const PriorMoments& prior, double snr) {
    if (!(snr > 0.0)) throw DomainError("snr must be > 0");
    prior.validate();
    const double v = prior.variance[0];
    if (((prior.variance.array() - v).abs() > 1e-12 * v).any()) {
        throw DomainError("snr-form lmmse requires an isotropic prior covariance");
    }
    return v / snr;
}

ValueEstimate lmmse_values_snr_form(const MatrixXd& H, const VectorXd& y, const VectorXd& b_hat,
                                    const PriorMoments& prior, double snr, SnrForm form) {
    check_dimensions(H, y, b_hat, prior);
    equivalent_noise_variance(prior, snr);  // validates snr and isotropy
    const double v = prior.variance[0];
    const Eigen::Index m = H.rows();
    const Eigen::Index n = H.cols();

    const MatrixXd G = scale_columns(H, b_hat);
    const VectorXd residual = y - G * prior.mean;
    ValueEstimate est;

    if (form == SnrForm::HighSnr) {
        MatrixXd gram = MatrixXd::Identity(m, m) / snr;
        gram.selfadjointView<Eigen::Lower>().rankUpdate(G);
        const Eigen::LLT<MatrixXd, Eigen::Lower> outer(gram);
        require_success(outer, "lmmse snr form: G G^T + snr^-1 I not positive definite");
        est.s_hat = G.transpose() * outer.solve(residual) + prior.mean;

        // (G^T V^{-1} G + snr^{-1} V^{-1})^{-1} snr^{-1} with V = v I
        MatrixXd inner = MatrixXd::Identity(n, n) / (snr * v);
        inner.selfadjointView<Eigen::Lower>().rankUpdate(G.transpose(), 1.0 / v);
        const Eigen::LLT<MatrixXd, Eigen::Lower> inner_factor(inner);
        require_success(inner_factor, "lmmse snr form: information matrix not positive definite");
        est.V_hat = symmetrized(inner_factor.solve(MatrixXd::Identity(n, n)) / snr);
    } else {
        MatrixXd gram = MatrixXd::Identity(m, m);
        gram.selfadjointView<Eigen::Lower>().rankUpdate(G, snr);
        const Eigen::LLT<MatrixXd, Eigen::Lower> outer(gram);
        require_success(outer, "lmmse snr form: snr G G^T + I not positive definite");
        est.s_hat = snr * (G.transpose() * outer.solve(residual)) + prior.mean;
        // V - snr V G^T (snr G G^T + I)^{-1} G
        const MatrixXd whitened = outer.matrixL().solve(G);
        est.V_hat = symmetrized(MatrixXd::Identity(n, n) * v - (snr * v) * (whitened.transpose() * whitened));
    }
    est.v_diag = est.V_hat.diagonal();
    return est;
}

double lmmse_mse(const MatrixXd& V_hat) { return V_hat.trace(); }

}  // namespace smplmmse
