#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "smplmmse/rng.hpp"

namespace smplmmse {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Distribution f(x) of the non-zero entries.
class ActiveDistribution {
public:
    enum class Kind { Gaussian, ChiSquare };

    static ActiveDistribution gaussian(double mean, double variance);
    static ActiveDistribution chi_square(int dof);

    Kind kind() const noexcept { return kind_; }
    double mean() const noexcept;
    double variance() const noexcept;
    double second_moment() const noexcept { return variance() + mean() * mean(); }

    /// Gaussian parameters; dof is only meaningful for ChiSquare.
    double gaussian_mean() const noexcept { return mean_; }
    double gaussian_variance() const noexcept { return variance_; }
    int dof() const noexcept { return dof_; }

    /// Density at x (Dirac-free; a zero-variance Gaussian has no density).
    double pdf(double x) const;

    double sample(Rng& rng) const;

    std::string describe() const;

private:
    ActiveDistribution(Kind kind, double mean, double variance, int dof)
        : kind_(kind), mean_(mean), variance_(variance), dof_(dof) {}

    Kind kind_;
    double mean_;
    double variance_;
    int dof_;
};

struct SparsityPrior {
    double lambda;
    ActiveDistribution active;

    /// Throws ConfigError unless 0 <= lambda <= 1.
    void validate() const;

    /// log(lambda / (1 - lambda)); infinite at the endpoints.
    double prior_llr() const;
};

struct SignalDraw {
    VectorXd s;
    VectorXd b;
    VectorXd x;
};

/// b_i ~ Bernoulli(lambda), s_i ~ f at every index, x = s .* b.
SignalDraw sample_signal(const SparsityPrior& prior, Eigen::Index n, Rng& rng);

/// i.i.d. N(0,1) entries, drawn row-major, no column normalization.
MatrixXd sample_matrix(Eigen::Index m, Eigen::Index n, Rng& rng);

/// Noise variance giving E||x||^2 / E||w||^2 = snr (snr on the linear scale).
double noise_variance_for_snr(const SparsityPrior& prior, Eigen::Index n, Eigen::Index m, double snr);

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// One realization y = H D(s) b + w.
struct ProblemInstance {
    MatrixXd H;
    VectorXd s;
    VectorXd b;
    VectorXd x;
    VectorXd y;
    double sigma_w_sq = 0.0;
    double snr = 0.0;  // linear
    std::vector<Eigen::Index> support;
    std::uint64_t seed = 0;
    SparsityPrior prior;

    Eigen::Index m() const { return H.rows(); }
    Eigen::Index n() const { return H.cols(); }
};

/// Draw order from a single stream seeded with `seed`: H, b, s, then unit noise
/// scaled by sqrt(sigma_w_sq). Changing only `snr` therefore keeps H, s, b and the
/// noise direction fixed.
ProblemInstance synthesize(const SparsityPrior& prior, Eigen::Index m, Eigen::Index n, double snr,
                           std::uint64_t seed);

std::vector<Eigen::Index> support_of(const VectorXd& b);

}  // namespace smplmmse
