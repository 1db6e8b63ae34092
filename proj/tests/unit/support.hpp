#pragma once

#include <cmath>
#include <random>

#include <Eigen/Dense>

namespace testsupport {

inline Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd A(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = nd(rng);
    return A;
}

inline Eigen::VectorXd gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
    return gaussian_matrix(n, 1, rng).col(0);
}

inline Eigen::VectorXd uniform_vector(Eigen::Index n, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(lo, hi);
    Eigen::VectorXd v(n);
    for (auto& e : v) e = ud(rng);
    return v;
}

inline double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
}

inline double max_rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double scale = std::max(1.0, b.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace testsupport
