#include "smplmmse/bounds.hpp"

#include <cmath>

#include "smplmmse/baselines.hpp"
#include "smplmmse/errors.hpp"

namespace smplmmse {

double lemma1_upper(const MatrixXd& H, const SparsityPrior& prior, const PriorMoments& moments, double sigma_w_sq) {
    if (prior.lambda == 0.0) return 0.0;
    // Only the covariance is needed; y does not enter it.
    return plain_lmmse(H, VectorXd::Zero(H.rows()), prior, moments, sigma_w_sq).mse_pred;
}

double lemma2_lower(const MatrixXd& H, const std::vector<Eigen::Index>& support, const PriorMoments& moments,
                    double sigma_w_sq) {
    if (support.empty()) return 0.0;
    return genie_mmse(H, VectorXd::Zero(H.rows()), support, moments, sigma_w_sq).mse_pred;
}

double prop1_trace(const MatrixXd& H, const std::vector<Eigen::Index>& support, double snr, double sigma_w_sq) {
    if (!(snr > 0.0)) throw DomainError("prop1_trace: snr must be > 0");
    if (!(sigma_w_sq > 0.0)) throw DomainError("prop1_trace: sigma_w_sq must be > 0");
    if (support.empty()) return 0.0;
    const auto l = static_cast<Eigen::Index>(support.size());
    const MatrixXd H_l = H(Eigen::all, support);
    MatrixXd gram = MatrixXd::Identity(l, l) / snr;
    gram.selfadjointView<Eigen::Lower>().rankUpdate(H_l.transpose());
    const Eigen::LLT<MatrixXd, Eigen::Lower> factor(gram);
    if (factor.info() != Eigen::Success) throw NumericalError("prop1_trace: H_L^T H_L + snr^-1 I is singular");
    return factor.solve(MatrixXd::Identity(l, l)).trace() / sigma_w_sq;
}

double lemma4_asymptote(double alpha, double sigma_w_sq) {
    if (!(sigma_w_sq > 0.0)) throw DomainError("lemma4_asymptote: sigma_w_sq must be > 0");
    return alpha / sigma_w_sq;
}

namespace {

VectorXd descending_spectrum(const MatrixXd& A, const char* name) {
    if (A.rows() != A.cols()) throw DomainError(std::string(name) + " is not square");
    const double scale = std::max(A.cwiseAbs().maxCoeff(), 1e-300);
    if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw DomainError(std::string(name) + " is not symmetric");
    }
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(A, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
    VectorXd values = eig.eigenvalues().reverse();  // ascending -> descending
    if (values.size() > 0 && values[values.size() - 1] < -1e-10 * std::max(std::abs(values[0]), 1e-300)) {
        throw DomainError(std::string(name) + " is not positive semidefinite");
    }
    return values;
}

}  // namespace

bool check_interlacing(const MatrixXd& full, const MatrixXd& restricted) {
    if (restricted.rows() > full.rows()) throw DomainError("check_interlacing: restricted matrix larger than full");
    const VectorXd big = descending_spectrum(full, "full matrix");
    const VectorXd small = descending_spectrum(restricted, "restricted matrix");
    const double slack = 1e-8 * std::max(big.size() > 0 ? std::abs(big[0]) : 0.0, 1e-300);
    const Eigen::Index n = big.size();
    const Eigen::Index l = small.size();
    // Principal-submatrix interlacing: full_k >= restricted_k >= full_{k + n - l}.
    for (Eigen::Index k = 0; k < l; ++k) {
        if (small[k] > big[k] + slack) return false;
        if (small[k] < big[k + n - l] - slack) return false;
    }
    return true;
}

BoundReport bound_report(const ProblemInstance& inst) {
    const auto moments = PriorMoments::from_prior(inst.prior, inst.n());
    BoundReport report;
    report.upper_lmmse = lemma1_upper(inst.H, inst.prior, moments, inst.sigma_w_sq);
    report.lower_genie = lemma2_lower(inst.H, inst.support, moments, inst.sigma_w_sq);
    report.prop1_trace = prop1_trace(inst.H, inst.support, inst.snr, inst.sigma_w_sq);
    report.alpha = static_cast<double>(inst.support.size()) / static_cast<double>(inst.m());
    report.asymptote = lemma4_asymptote(report.alpha, inst.sigma_w_sq);
    return report;
}

}  // namespace smplmmse
