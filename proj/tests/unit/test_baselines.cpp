#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "smplmmse/baselines.hpp"
#include "smplmmse/denoiser.hpp"
#include "smplmmse/errors.hpp"
#include "support.hpp"

using namespace smplmmse;
using testsupport::normal_pdf;

TEST_CASE("genie on a single active entry with unit rows") {
    for (Eigen::Index m : {1, 4, 16}) {
        const double sigma_sq = 0.5;
        MatrixXd H = MatrixXd::Zero(m, 3);
        H.col(1).setOnes();
        const PriorMoments moments{VectorXd::Zero(3), VectorXd::Ones(3)};
        const auto res = genie_mmse(H, VectorXd::Ones(m), {1}, moments, sigma_sq);
        const double post_var = 1.0 / (static_cast<double>(m) / sigma_sq + 1.0);
        CHECK(res.mse_pred == doctest::Approx(post_var).epsilon(1e-13));
        // posterior mean: post_var * sum(y) / sigma^2
        CHECK(res.x_hat[1] == doctest::Approx(post_var * static_cast<double>(m) / sigma_sq).epsilon(1e-13));
        CHECK(res.x_hat[0] == 0.0);
        CHECK(res.x_hat[2] == 0.0);
    }
}

TEST_CASE("genie with an empty support") {
    const PriorMoments moments{VectorXd::Zero(3), VectorXd::Ones(3)};
    const auto res = genie_mmse(MatrixXd::Ones(2, 3), VectorXd::Ones(2), {}, moments, 1.0);
    CHECK(res.x_hat.isZero());
    CHECK(res.mse_pred == 0.0);
    CHECK_THROWS_AS(genie_mmse(MatrixXd::Ones(2, 3), VectorXd::Ones(2), {5}, moments, 1.0), DomainError);
}

TEST_CASE("marginal moments of a Bernoulli product") {
    const SparsityPrior prior{0.25, ActiveDistribution::gaussian(2.0, 3.0)};
    const auto m = marginal_moments(prior, PriorMoments::from_prior(prior, 2));
    CHECK(m.mean[0] == doctest::Approx(0.5));
    // 0.25 * (3 + 4) - 0.25
    CHECK(m.variance[0] == doctest::Approx(1.5));
}

TEST_CASE("genie error never exceeds plain LMMSE") {
    const SparsityPrior prior{0.125, ActiveDistribution::gaussian(0.0, 1.0)};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto inst = synthesize(prior, 32, 64, 100.0, seed);
        const auto moments = PriorMoments::from_prior(prior, 64);
        const double genie = genie_mmse(inst.H, inst.y, inst.support, moments, inst.sigma_w_sq).mse_pred;
        const double plain = plain_lmmse(inst.H, inst.y, prior, moments, inst.sigma_w_sq).mse_pred;
        CHECK(genie <= plain);
    }
}

TEST_CASE("plain LMMSE with lambda = 0 is zero") {
    const SparsityPrior prior{0.0, ActiveDistribution::gaussian(0.0, 1.0)};
    const auto res = plain_lmmse(MatrixXd::Ones(2, 3), VectorXd::Ones(2), prior, PriorMoments::from_prior(prior, 3), 1.0);
    CHECK(res.x_hat.isZero());
    CHECK(res.mse_pred == 0.0);
}

TEST_CASE("Bernoulli-Gaussian denoiser against the two-component posterior") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.05, 0.95), var(0.1, 3.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double r = 3.0 * nd(rng), tau_sq = var(rng), lambda = ud(rng), mu = nd(rng), v = var(rng);
        const double w1 = lambda * normal_pdf(r, mu, v + tau_sq);
        const double w0 = (1.0 - lambda) * normal_pdf(r, 0.0, tau_sq);
        const double pi = w1 / (w1 + w0);
        const double m1 = (v * r + tau_sq * mu) / (v + tau_sq);
        const double v1 = v * tau_sq / (v + tau_sq);
        const auto out = bg_denoiser(r, tau_sq, lambda, mu, v);
        CHECK(out.activity == doctest::Approx(pi).epsilon(1e-12));
        CHECK(out.mean == doctest::Approx(pi * m1).epsilon(1e-12));
        CHECK(out.variance == doctest::Approx(pi * (v1 + m1 * m1) - pi * pi * m1 * m1).epsilon(1e-9));
    }
}

TEST_CASE("Bernoulli-Gaussian denoiser edge cases") {
    CHECK(bg_denoiser(5.0, 1.0, 0.0, 0.0, 1.0).mean == 0.0);
    CHECK(bg_denoiser(5.0, 1.0, 1.0, 0.0, 1.0).activity == 1.0);
    CHECK(bg_denoiser(5.0, 1.0, 1.0, 0.0, 1.0).mean == doctest::Approx(2.5));
    // far tails stay finite
    CHECK(std::isfinite(bg_denoiser(1e4, 1e-6, 0.1, 0.0, 1.0).mean));
    CHECK_THROWS_AS(bg_denoiser(0.0, 0.0, 0.5, 0.0, 1.0), DomainError);
}

TEST_CASE("quadrature denoiser agrees with the closed form on Gaussian actives") {
    const SparsityPrior prior{0.3, ActiveDistribution::gaussian(0.5, 2.0)};
    const auto quad = DenoiserSpec::bernoulli_general(prior, 64);
    for (double r : {-4.0, -1.0, 0.0, 0.7, 3.0, 8.0}) {
        for (double tau_sq : {0.01, 0.3, 2.0}) {
            const auto a = quad(r, tau_sq);
            const auto b = bg_denoiser(r, tau_sq, 0.3, 0.5, 2.0);
            CHECK(a.mean == doctest::Approx(b.mean).epsilon(1e-8));
            CHECK(a.activity == doctest::Approx(b.activity).epsilon(1e-8));
            CHECK(a.variance == doctest::Approx(b.variance).epsilon(1e-7));
        }
    }
}

TEST_CASE("chi-square denoiser against adaptive Gauss-Kronrod") {
    using boost::math::quadrature::gauss_kronrod;
    for (int dof : {1, 4}) {
        const SparsityPrior prior{0.125, ActiveDistribution::chi_square(dof)};
        const auto den = DenoiserSpec::for_prior(prior);
        CHECK(den.kind() == DenoiserSpec::Kind::BernoulliGeneral);
        for (double r : {-1.0, 0.5, 2.0, 4.0, 9.0}) {
            for (double tau_sq : {0.05, 0.5, 4.0}) {
                auto moment = [&](int k) {
                    // s = t^2 keeps the dof = 1 singularity out of the integrand
                    auto f = [&](double t) {
                        const double s = t * t;
                        return std::pow(s, k) * prior.active.pdf(s) * 2.0 * t * normal_pdf(r, s, tau_sq);
                    };
                    return gauss_kronrod<double, 61>::integrate(f, 0.0, 8.0, 20, 1e-13);
                };
                const double z1 = prior.lambda * moment(0);
                const double z0 = (1.0 - prior.lambda) * normal_pdf(r, 0.0, tau_sq);
                const double pi = z1 / (z1 + z0);
                const double mean = pi * moment(1) / moment(0);
                const double second = pi * moment(2) / moment(0);
                const auto out = den(r, tau_sq);
                CHECK(out.activity == doctest::Approx(pi).epsilon(1e-6));
                CHECK(out.mean == doctest::Approx(mean).epsilon(1e-6));
                CHECK(out.variance == doctest::Approx(second - mean * mean).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("AMP recovers a sparse vector at high snr") {
    const SparsityPrior prior{0.1, ActiveDistribution::gaussian(0.0, 1.0)};
    const auto inst = synthesize(prior, 250, 500, db_to_linear(40.0), 9);
    const auto res = amp_estimate(inst.H, inst.y, DenoiserSpec::for_prior(prior), 30, Truth{inst.x, inst.b});
    CHECK_FALSE(res.diverged);
    REQUIRE(res.trajectory.size() == 30);
    CHECK(res.trajectory.back().mse < 1e-3);
    CHECK(res.trajectory.back().mse < res.trajectory.front().mse);
    CHECK(res.trajectory.back().support_error_rate < 0.01);
    CHECK_THROWS_AS(amp_estimate(inst.H, inst.y, DenoiserSpec::for_prior(prior), 0), ConfigError);
}
