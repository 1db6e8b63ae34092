#include "smplmmse/denoiser.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "smplmmse/errors.hpp"

namespace smplmmse {

namespace {

double log_normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return -0.5 * (d * d / var + std::log(2.0 * std::numbers::pi * var));
}

/// Weights of the two components in log domain -> activity probability.
double activity_from_logs(double log_active, double log_inactive) {
    if (log_active == -INFINITY) return 0.0;
    if (log_inactive == -INFINITY) return 1.0;
    return 1.0 / (1.0 + std::exp(log_inactive - log_active));
}

// Boost only ships compile-time node counts; the supported run-time set.
template <unsigned N>
std::pair<std::vector<double>, std::vector<double>> legendre_rule() {
    using Rule = boost::math::quadrature::gauss<double, N>;
    // Boost stores the non-negative abscissae only.
    std::vector<double> x;
    std::vector<double> w;
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    for (std::size_t i = 0; i < abscissa.size(); ++i) {
        x.push_back(abscissa[i]);
        w.push_back(weights[i]);
        if (abscissa[i] != 0.0) {
            x.push_back(-abscissa[i]);
            w.push_back(weights[i]);
        }
    }
    return {x, w};
}

const std::pair<std::vector<double>, std::vector<double>>& rule_for(int nodes) {
    static const auto r8 = legendre_rule<8>();
    static const auto r16 = legendre_rule<16>();
    static const auto r32 = legendre_rule<32>();
    static const auto r64 = legendre_rule<64>();
    static const auto r128 = legendre_rule<128>();
    switch (nodes) {
        case 8: return r8;
        case 16: return r16;
        case 32: return r32;
        case 64: return r64;
        case 128: return r128;
        default: throw ConfigError("quadrature_nodes must be one of 8, 16, 32, 64, 128");
    }
}

}  // namespace

DenoiserOutput bg_denoiser(double r, double tau_sq, double lambda, double mean, double variance) {
    if (!(tau_sq > 0.0)) throw DomainError("bg_denoiser: tau_sq must be > 0");
    if (!(lambda >= 0.0 && lambda <= 1.0) || variance < 0.0) throw DomainError("bg_denoiser: invalid prior");
    const double log_active = lambda > 0.0 ? std::log(lambda) + log_normal_pdf(r, mean, variance + tau_sq) : -INFINITY;
    const double log_inactive = lambda < 1.0 ? std::log1p(-lambda) + log_normal_pdf(r, 0.0, tau_sq) : -INFINITY;
    const double pi = activity_from_logs(log_active, log_inactive);

    const double gain = variance / (variance + tau_sq);
    const double active_mean = mean + gain * (r - mean);
    const double active_var = gain * tau_sq;
    DenoiserOutput out;
    out.activity = pi;
    out.mean = pi * active_mean;
    out.variance = std::max(pi * (active_var + active_mean * active_mean) - out.mean * out.mean, 0.0);
    return out;
}

DenoiserSpec DenoiserSpec::bernoulli_gaussian(double lambda, double mean, double variance) {
    return {Kind::BernoulliGaussian, SparsityPrior{lambda, ActiveDistribution::gaussian(mean, variance)}, 0};
}

DenoiserSpec DenoiserSpec::bernoulli_general(const SparsityPrior& prior, int quadrature_nodes) {
    prior.validate();
    if (quadrature_nodes < 8) throw ConfigError("quadrature_nodes must be >= 8");
    rule_for(quadrature_nodes);
    return {Kind::BernoulliGeneral, prior, quadrature_nodes};
}

DenoiserSpec DenoiserSpec::for_prior(const SparsityPrior& prior, int quadrature_nodes) {
    prior.validate();
    if (prior.active.kind() == ActiveDistribution::Kind::Gaussian) {
        return bernoulli_gaussian(prior.lambda, prior.active.gaussian_mean(), prior.active.gaussian_variance());
    }
    return bernoulli_general(prior, quadrature_nodes);
}

DenoiserOutput DenoiserSpec::operator()(double r, double tau_sq) const {
    if (kind_ == Kind::BernoulliGaussian) {
        return bg_denoiser(r, tau_sq, prior_.lambda, prior_.active.gaussian_mean(),
                           prior_.active.gaussian_variance());
    }
    return quadrature(r, tau_sq);
}

DenoiserOutput DenoiserSpec::quadrature(double r, double tau_sq) const {
    if (!(tau_sq > 0.0)) throw DomainError("denoiser: tau_sq must be > 0");
    const double lambda = prior_.lambda;
    const double log_inactive = lambda < 1.0 ? std::log1p(-lambda) + log_normal_pdf(r, 0.0, tau_sq) : -INFINITY;
    if (lambda == 0.0) return {};

    const ActiveDistribution& f = prior_.active;
    const double tau = std::sqrt(tau_sq);
    const double sd = std::sqrt(f.variance());
    const bool chi = f.kind() == ActiveDistribution::Kind::ChiSquare;
    const double support_lo = chi ? 0.0 : f.mean() - 14.0 * sd;
    const double support_hi = f.mean() + (chi ? 40.0 : 14.0) * sd;

    // The integrand f(s) N(r; s, tau^2) lives where both factors do.
    double lo = std::max(support_lo, r - 12.0 * tau);
    double hi = std::min(support_hi, r + 12.0 * tau);
    if (lo >= hi) {
        // r far outside the support: the Gaussian factor decays over tau^2 / d from the nearest edge.
        const double edge = r < support_lo ? support_lo : support_hi;
        const double d = std::abs(r - edge);
        const double width = std::min({12.0 * tau, 12.0 * tau_sq / d, support_hi - support_lo});
        lo = r < support_lo ? edge : edge - width;
        hi = r < support_lo ? edge + width : edge;
    }

    // Chi-square densities with dof < 2 are singular at 0; s = t^2 removes it.
    const bool substitute = chi && f.dof() < 2;
    const double a = substitute ? std::sqrt(lo) : lo;
    const double b = substitute ? std::sqrt(hi) : hi;
    const auto& [nodes, weights] = rule_for(nodes_);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);

    std::vector<double> log_terms(nodes.size());
    std::vector<double> values(nodes.size());
    double peak = -INFINITY;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double t = mid + half * nodes[k];
        const double s = substitute ? t * t : t;
        const double jac = substitute ? 2.0 * t : 1.0;
        const double density = f.pdf(s) * jac;
        values[k] = s;
        log_terms[k] = density > 0.0 ? std::log(weights[k] * half * density) + log_normal_pdf(r, s, tau_sq) : -INFINITY;
        peak = std::max(peak, log_terms[k]);
    }
    if (peak == -INFINITY) return {0.0, 0.0, 0.0};

    double z = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double w = std::exp(log_terms[k] - peak);
        z += w;
        m1 += w * values[k];
        m2 += w * values[k] * values[k];
    }
    const double active_mean = m1 / z;
    const double active_second = m2 / z;
    const double log_active = std::log(lambda) + peak + std::log(z);
    const double pi = activity_from_logs(log_active, log_inactive);

    DenoiserOutput out;
    out.activity = pi;
    out.mean = pi * active_mean;
    out.variance = std::max(pi * active_second - out.mean * out.mean, 0.0);
    return out;
}

}  // namespace smplmmse
