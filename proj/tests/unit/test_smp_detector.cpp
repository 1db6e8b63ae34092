#include <doctest.h>

#include <cmath>
#include <random>

#include "smplmmse/errors.hpp"
#include "smplmmse/signal_model.hpp"
#include "smplmmse/smp_detector.hpp"
#include "support.hpp"

using namespace smplmmse;
using testsupport::gaussian_matrix;
using testsupport::gaussian_vector;
using testsupport::normal_pdf;
using testsupport::uniform_vector;

namespace {

// Edge statistics by direct double loop.
GaussianEdgeStats naive_stats(const MatrixXd& H, const VectorXd& s, const VectorXd& v, const MatrixXd& p,
                              double sigma_sq) {
    GaussianEdgeStats out{MatrixXd::Zero(H.rows(), H.cols()), MatrixXd::Zero(H.rows(), H.cols())};
    for (Eigen::Index m = 0; m < H.rows(); ++m) {
        for (Eigen::Index n = 0; n < H.cols(); ++n) {
            double mean = 0.0, var = sigma_sq;
            for (Eigen::Index i = 0; i < H.cols(); ++i) {
                if (i == n) continue;
                const double h = H(m, i), q = p(m, i);
                mean += h * s[i] * q;
                var += h * h * q * v[i] + h * h * q * (1.0 - q) * s[i] * s[i];
            }
            out.mean(m, n) = mean;
            out.variance(m, n) = var;
        }
    }
    return out;
}

MatrixXd random_probabilities(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    MatrixXd p(m, n);
    for (auto& e : p.reshaped()) e = ud(rng);
    return p;
}

}  // namespace

TEST_CASE("sum node stats: single column has an empty exclusion sum") {
    MatrixXd H(2, 1);
    H << 0.7, -1.3;
    const auto st = sum_node_stats(H, VectorXd::Constant(1, 2.0), VectorXd::Constant(1, 0.5),
                                   MatrixXd::Constant(2, 1, 0.4), 0.3);
    CHECK(st.mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.variance.isApproxToConstant(0.3));
}

TEST_CASE("sum node stats: no active interferers leaves only the noise") {
    std::mt19937_64 rng(11);
    const MatrixXd H = gaussian_matrix(4, 6, rng);
    const auto st = sum_node_stats(H, gaussian_vector(6, rng), uniform_vector(6, 0.0, 1.0, rng),
                                   MatrixXd::Zero(4, 6), 0.02);
    CHECK(st.mean.cwiseAbs().maxCoeff() == 0.0);
    CHECK(st.variance.isApproxToConstant(0.02));
}

TEST_CASE("sum node stats match the double loop") {
    std::mt19937_64 rng(12);
    for (auto [m, n] : {std::pair{3, 3}, {5, 9}, {16, 32}}) {
        const MatrixXd H = gaussian_matrix(m, n, rng);
        const VectorXd s = gaussian_vector(n, rng);
        const VectorXd v = uniform_vector(n, 0.0, 2.0, rng);
        const MatrixXd p = random_probabilities(m, n, rng);
        const auto fast = sum_node_stats(H, s, v, p, 0.05);
        const auto slow = naive_stats(H, s, v, p, 0.05);
        CHECK(testsupport::max_rel_diff(fast.mean, slow.mean) < 1e-12);
        CHECK(testsupport::max_rel_diff(fast.variance, slow.variance) < 1e-12);
        CHECK((fast.variance.array() >= 0.05).all());
    }
}

TEST_CASE("sum node stats reject negative value variances") {
    CHECK_THROWS_AS(sum_node_stats(MatrixXd::Ones(2, 2), VectorXd::Zero(2), VectorXd::Constant(2, -1.0),
                                   MatrixXd::Zero(2, 2), 1.0),
                    DomainError);
}

TEST_CASE("sum node llr: hand-evaluated scalar") {
    const GaussianEdgeStats st{MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1)};
    const auto l = sum_node_llr(VectorXd::Zero(1), st, MatrixXd::Ones(1, 1), VectorXd::Ones(1), VectorXd::Zero(1), 30);
    CHECK(l(0, 0) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("sum node llr: zero coupling carries no evidence") {
    std::mt19937_64 rng(13);
    MatrixXd H = gaussian_matrix(3, 4, rng);
    H(1, 2) = 0.0;
    const GaussianEdgeStats st{gaussian_matrix(3, 4, rng), MatrixXd::Constant(3, 4, 0.7)};
    const auto l = sum_node_llr(gaussian_vector(3, rng), st, H, gaussian_vector(4, rng),
                                uniform_vector(4, 0.0, 1.0, rng), 30);
    CHECK(l(1, 2) == 0.0);
}

TEST_CASE("sum node llr agrees with the two-likelihood ratio") {
    std::mt19937_64 rng(14);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.05, 2.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double h = nd(rng), s = nd(rng), vs = ud(rng), u = 0.5 * nd(rng), v = ud(rng), y = nd(rng);
        const GaussianEdgeStats st{MatrixXd::Constant(1, 1, u), MatrixXd::Constant(1, 1, v)};
        const double l = sum_node_llr(VectorXd::Constant(1, y), st, MatrixXd::Constant(1, 1, h), VectorXd::Constant(1, s),
                                      VectorXd::Constant(1, vs), 30)(0, 0);
        const double on = normal_pdf(y, u + h * s, v + h * h * vs);
        const double off = normal_pdf(y, u, v);
        CHECK(sigmoid(l) == doctest::Approx(on / (on + off)).epsilon(1e-10));
    }
}

TEST_CASE("sum node llr rejects a non-positive noise variance") {
    const GaussianEdgeStats st{MatrixXd::Zero(1, 1), MatrixXd::Zero(1, 1)};
    CHECK_THROWS_AS(sum_node_llr(VectorXd::Zero(1), st, MatrixXd::Ones(1, 1), VectorXd::Ones(1), VectorXd::Zero(1), 30),
                    NumericalError);
}

TEST_CASE("variable node update") {
    const double l0 = -std::log(7.0);
    SUBCASE("single row leaves the prior") {
        const auto lv = variable_node_update(MatrixXd::Constant(1, 3, 4.0), l0, 30);
        CHECK(lv.isApproxToConstant(l0));
    }
    SUBCASE("lambda = 0.125 offset") {
        CHECK(DetectorState::initial(2, 2, 0.125).prior_llr == doctest::Approx(-std::log(7.0)).epsilon(1e-14));
    }
    SUBCASE("matches the per-edge exclusion loop") {
        std::mt19937_64 rng(15);
        const MatrixXd ls = gaussian_matrix(4, 5, rng);
        const auto lv = variable_node_update(ls, l0, 30);
        for (Eigen::Index m = 0; m < 4; ++m) {
            for (Eigen::Index n = 0; n < 5; ++n) {
                double acc = l0;
                for (Eigen::Index j = 0; j < 4; ++j)
                    if (j != m) acc += ls(j, n);
                CHECK(std::abs(lv(m, n) - acc) < 1e-12);
            }
        }
    }
    SUBCASE("clamped") {
        const auto lv = variable_node_update(MatrixXd::Constant(5, 2, 20.0), 0.0, 30);
        CHECK(lv.isApproxToConstant(30.0));
    }
}

TEST_CASE("posterior update") {
    SUBCASE("uninformative") {
        const auto post = posterior_update(MatrixXd::Zero(3, 2), 0.0, 30);
        CHECK(post.llr_full.isApproxToConstant(0.0));
        CHECK(post.posterior.isApproxToConstant(0.5));
    }
    SUBCASE("saturation at the clamp") {
        const auto post = posterior_update(MatrixXd::Constant(2, 1, 40.0), 0.0, 30);
        CHECK(post.llr_full[0] == 30.0);
        CHECK(1.0 - post.posterior[0] == doctest::Approx(1.0 / (1.0 + std::exp(30.0))).epsilon(1e-3));
        CHECK(1.0 - post.posterior[0] == doctest::Approx(9.36e-14).epsilon(1e-2));
    }
    SUBCASE("full minus extrinsic equals the edge message") {
        std::mt19937_64 rng(16);
        const MatrixXd ls = gaussian_matrix(6, 4, rng);
        const double l0 = -1.2;
        const auto lv = variable_node_update(ls, l0, 30);
        const auto post = posterior_update(ls, l0, 30);
        for (Eigen::Index m = 0; m < 6; ++m)
            for (Eigen::Index n = 0; n < 4; ++n) CHECK(std::abs(post.llr_full[n] - lv(m, n) - ls(m, n)) < 1e-12);
    }
}

TEST_CASE("detector initial state") {
    const auto st = DetectorState::initial(3, 4, 0.2);
    CHECK(st.iteration == 0);
    CHECK(st.llr_var_to_sum.isApproxToConstant(std::log(0.25)));
    CHECK(st.posterior.isApproxToConstant(0.2));
    CHECK_THROWS_AS(DetectorState::initial(3, 4, 0.0), DomainError);
    CHECK_THROWS_AS(DetectorState::initial(3, 4, 1.0), DomainError);
}

TEST_CASE("zero measurement keeps the prior") {
    auto st = DetectorState::initial(4, 5, 0.3);
    const auto res = detector_pass(st, MatrixXd::Zero(4, 5), VectorXd::Zero(4), VectorXd::Ones(5), VectorXd::Ones(5),
                                   0.1, DetectorConfig{});
    CHECK(st.posterior.isApprox(VectorXd::Constant(5, 0.3), 1e-14));
    CHECK(res.converged);
}

TEST_CASE("single edge: posterior is the exact Bayes posterior") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> lam(0.05, 0.95), var(0.1, 2.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double lambda = lam(rng), h = nd(rng), s = nd(rng), sigma_sq = var(rng), y = nd(rng);
        auto st = DetectorState::initial(1, 1, lambda);
        detector_pass(st, MatrixXd::Constant(1, 1, h), VectorXd::Constant(1, y), VectorXd::Constant(1, s),
                      VectorXd::Zero(1), sigma_sq, DetectorConfig{});
        const double on = lambda * normal_pdf(y, h * s, sigma_sq);
        const double off = (1.0 - lambda) * normal_pdf(y, 0.0, sigma_sq);
        worst = std::max(worst, std::abs(st.posterior[0] - on / (on + off)));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("exclusion: an edge's outgoing messages ignore its own input") {
    std::mt19937_64 rng(18);
    const MatrixXd H = gaussian_matrix(5, 7, rng);
    const VectorXd s = gaussian_vector(7, rng), v = uniform_vector(7, 0.0, 1.0, rng), y = gaussian_vector(5, rng);
    MatrixXd p = random_probabilities(5, 7, rng);
    const auto before = sum_node_stats(H, s, v, p, 0.1);
    p(2, 3) = 1.0 - p(2, 3);
    const auto after = sum_node_stats(H, s, v, p, 0.1);
    CHECK(after.mean(2, 3) == doctest::Approx(before.mean(2, 3)).epsilon(1e-12));
    CHECK(after.variance(2, 3) == doctest::Approx(before.variance(2, 3)).epsilon(1e-12));

    MatrixXd ls = gaussian_matrix(5, 7, rng);
    const auto lv_before = variable_node_update(ls, -1.0, 30);
    ls(2, 3) += 5.0;
    const auto lv_after = variable_node_update(ls, -1.0, 30);
    CHECK(lv_after(2, 3) == doctest::Approx(lv_before(2, 3)).epsilon(1e-12));
}

TEST_CASE("posteriors stay in (0,1) and follow sigmoid of the full llr") {
    const SparsityPrior prior{0.2, ActiveDistribution::gaussian(0.0, 1.0)};
    const auto inst = synthesize(prior, 24, 40, db_to_linear(20.0), 19);
    auto st = DetectorState::initial(24, 40, prior.lambda);
    for (int k = 0; k < 4; ++k) {
        detector_pass(st, inst.H, inst.y, inst.s, VectorXd::Zero(40), inst.sigma_w_sq, DetectorConfig{});
        CHECK((st.posterior.array() > 0.0).all());
        CHECK((st.posterior.array() < 1.0).all());
        CHECK((st.llr_full.cwiseAbs().array() <= 30.0).all());
        for (Eigen::Index n = 0; n < 40; ++n) CHECK(st.posterior[n] == sigmoid(st.llr_full[n]));
    }
}

TEST_CASE("known values on 3x3: loopy posterior close to 2^3 enumeration") {
    const SparsityPrior prior{0.125, ActiveDistribution::gaussian(0.0, 1.0)};
    DetectorConfig cfg;
    cfg.max_iterations = 100;
    double total = 0.0;
    const int seeds = 100;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto inst = synthesize(prior, 3, 3, db_to_linear(20.0), 1000 + seed);
        VectorXd exact = VectorXd::Zero(3);
        double z = 0.0;
        for (int mask = 0; mask < 8; ++mask) {
            VectorXd b(3);
            double w = 1.0;
            for (int i = 0; i < 3; ++i) {
                b[i] = (mask >> i) & 1;
                w *= b[i] != 0.0 ? prior.lambda : 1.0 - prior.lambda;
            }
            const VectorXd r = inst.y - inst.H * inst.s.cwiseProduct(b);
            w *= std::exp(-r.squaredNorm() / (2.0 * inst.sigma_w_sq));
            z += w;
            exact += w * b;
        }
        exact /= z;
        auto st = DetectorState::initial(3, 3, prior.lambda);
        run_detector(st, inst.H, inst.y, inst.s, VectorXd::Zero(3), inst.sigma_w_sq, cfg);
        total += (st.posterior - exact).cwiseAbs().maxCoeff();
    }
    CHECK(total / seeds < 1e-2);
}

TEST_CASE("damping keeps the first sweep undamped and validates its range") {
    DetectorConfig cfg;
    cfg.damping = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.damping = 0.5;
    CHECK_NOTHROW(cfg.validate());

    const SparsityPrior prior{0.2, ActiveDistribution::gaussian(0.0, 1.0)};
    const auto inst = synthesize(prior, 10, 16, db_to_linear(20.0), 20);
    auto plain = DetectorState::initial(10, 16, 0.2);
    auto damped = DetectorState::initial(10, 16, 0.2);
    detector_pass(plain, inst.H, inst.y, inst.s, VectorXd::Zero(16), inst.sigma_w_sq, DetectorConfig{});
    detector_pass(damped, inst.H, inst.y, inst.s, VectorXd::Zero(16), inst.sigma_w_sq, cfg);
    CHECK(plain.llr_sum_to_var.isApprox(damped.llr_sum_to_var));
}
