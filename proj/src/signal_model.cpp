#include "smplmmse/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "smplmmse/errors.hpp"

namespace smplmmse {

ActiveDistribution ActiveDistribution::gaussian(double mean, double variance) {
    if (!std::isfinite(mean) || !std::isfinite(variance) || variance < 0.0) {
        throw ConfigError("gaussian active distribution needs finite mean and variance >= 0");
    }
    return ActiveDistribution(Kind::Gaussian, mean, variance, 0);
}

ActiveDistribution ActiveDistribution::chi_square(int dof) {
    if (dof < 1) {
        throw ConfigError("chi-square active distribution needs dof >= 1");
    }
    return ActiveDistribution(Kind::ChiSquare, 0.0, 0.0, dof);
}

double ActiveDistribution::mean() const noexcept {
    return kind_ == Kind::Gaussian ? mean_ : static_cast<double>(dof_);
}

double ActiveDistribution::variance() const noexcept {
    return kind_ == Kind::Gaussian ? variance_ : 2.0 * dof_;
}

double ActiveDistribution::pdf(double x) const {
    if (kind_ == Kind::Gaussian) {
        if (variance_ <= 0.0) {
            throw DomainError("zero-variance gaussian has no density");
        }
        const double d = x - mean_;
        return std::exp(-0.5 * d * d / variance_) / std::sqrt(2.0 * std::numbers::pi * variance_);
    }
    if (x < 0.0) return 0.0;
    const double half_k = 0.5 * dof_;
    if (x == 0.0) {
        if (dof_ == 2) return 0.5;
        return dof_ < 2 ? INFINITY : 0.0;
    }
    return std::exp((half_k - 1.0) * std::log(x) - 0.5 * x - half_k * std::numbers::ln2 - std::lgamma(half_k));
}

double ActiveDistribution::sample(Rng& rng) const {
    if (kind_ == Kind::Gaussian) {
        std::normal_distribution<double> dist(mean_, std::sqrt(variance_));
        return dist(rng);
    }
    std::chi_squared_distribution<double> dist(dof_);
    return dist(rng);
}

std::string ActiveDistribution::describe() const {
    std::ostringstream os;
    if (kind_ == Kind::Gaussian) {
        os << "gaussian(mean=" << mean_ << ", variance=" << variance_ << ")";
    } else {
        os << "chi_square(dof=" << dof_ << ")";
    }
    return os.str();
}

void SparsityPrior::validate() const {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("sparsity ratio lambda must lie in [0, 1]");
    }
}

double SparsityPrior::prior_llr() const {
    validate();
    if (lambda == 0.0) return -INFINITY;
    if (lambda == 1.0) return INFINITY;
    return -std::log(1.0 / lambda - 1.0);
}

SignalDraw sample_signal(const SparsityPrior& prior, Eigen::Index n, Rng& rng) {
    prior.validate();
    if (n < 1) throw ConfigError("signal length must be >= 1");
    SignalDraw draw{VectorXd(n), VectorXd(n), VectorXd(n)};
    std::bernoulli_distribution active(prior.lambda);
    for (Eigen::Index i = 0; i < n; ++i) draw.b[i] = active(rng) ? 1.0 : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) draw.s[i] = prior.active.sample(rng);
    draw.x = draw.s.cwiseProduct(draw.b);
    return draw;
}

MatrixXd sample_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
    if (m < 1 || n < 1) throw ConfigError("matrix dimensions must be >= 1");
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd H(m, n);
    for (Eigen::Index r = 0; r < m; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) H(r, c) = normal(rng);
    }
    return H;
}

double noise_variance_for_snr(const SparsityPrior& prior, Eigen::Index n, Eigen::Index m, double snr) {
    if (!(snr > 0.0)) throw DomainError("snr must be > 0");
    if (n < 1 || m < 1) throw ConfigError("dimensions must be >= 1");
    prior.validate();
    const double signal_energy = static_cast<double>(n) * prior.lambda * prior.active.second_moment();
    return signal_energy / (static_cast<double>(m) * snr);
}

std::vector<Eigen::Index> support_of(const VectorXd& b) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        if (b[i] != 0.0) support.push_back(i);
    }
    return support;
}

ProblemInstance synthesize(const SparsityPrior& prior, Eigen::Index m, Eigen::Index n, double snr,
                           std::uint64_t seed) {
    const double sigma_w_sq = noise_variance_for_snr(prior, n, m, snr);
    Rng rng(seed);
    ProblemInstance inst{.H = sample_matrix(m, n, rng),
                         .s = {},
                         .b = {},
                         .x = {},
                         .y = {},
                         .sigma_w_sq = sigma_w_sq,
                         .snr = snr,
                         .support = {},
                         .seed = seed,
                         .prior = prior};
    auto draw = sample_signal(prior, n, rng);
    inst.s = std::move(draw.s);
    inst.b = std::move(draw.b);
    inst.x = std::move(draw.x);
    std::normal_distribution<double> normal(0.0, 1.0);
    VectorXd w(m);
    for (Eigen::Index i = 0; i < m; ++i) w[i] = normal(rng);
    inst.y = inst.H * inst.x + std::sqrt(sigma_w_sq) * w;
    inst.support = support_of(inst.b);
    return inst;
}

}  // namespace smplmmse
