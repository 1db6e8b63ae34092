#pragma once

#include "smplmmse/signal_model.hpp"

namespace smplmmse {

/// Posterior summary of x from r = x + N(0, tau^2) under a Bernoulli prior.
struct DenoiserOutput {
    double mean = 0.0;
    double variance = 0.0;
    /// Posterior probability that x is drawn from the active component.
    double activity = 0.0;
};

/// Exact two-component posterior under x ~ (1 - lambda) delta_0 + lambda N(mean, variance).
DenoiserOutput bg_denoiser(double r, double tau_sq, double lambda, double mean, double variance);

/// Scalar MMSE denoiser for AMP.
class DenoiserSpec {
public:
    enum class Kind { BernoulliGaussian, BernoulliGeneral };

    /// Closed form for Gaussian actives, quadrature otherwise.
    static DenoiserSpec for_prior(const SparsityPrior& prior, int quadrature_nodes = 64);
    static DenoiserSpec bernoulli_gaussian(double lambda, double mean, double variance);
    static DenoiserSpec bernoulli_general(const SparsityPrior& prior, int quadrature_nodes = 64);

    Kind kind() const noexcept { return kind_; }
    const SparsityPrior& prior() const noexcept { return prior_; }
    int quadrature_nodes() const noexcept { return nodes_; }

    DenoiserOutput operator()(double r, double tau_sq) const;

private:
    DenoiserSpec(Kind kind, SparsityPrior prior, int nodes) : kind_(kind), prior_(prior), nodes_(nodes) {}

    DenoiserOutput quadrature(double r, double tau_sq) const;

    Kind kind_;
    SparsityPrior prior_;
    int nodes_;
};

}  // namespace smplmmse
