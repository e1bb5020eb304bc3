#pragma once

// Gauss rules from the Golub-Welsch eigenproblem of the Jacobi matrix.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace spintel {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline QuadratureRule golub_welsch(const Eigen::VectorXd& offdiag, double mu0) {
    const Eigen::Index n = offdiag.size() + 1;
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i + 1 < n; ++i) j(i, i + 1) = j(i + 1, i) = offdiag[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    QuadratureRule q;
    for (Eigen::Index i = 0; i < n; ++i) {
        q.nodes.push_back(es.eigenvalues()[i]);
        const double v0 = es.eigenvectors()(0, i);
        q.weights.push_back(mu0 * v0 * v0);
    }
    return q;
}

}  // namespace detail

// Weight exp(-x^2) on the real line.
inline QuadratureRule gauss_hermite(int order) {
    if (order < 1) throw std::domain_error("gauss_hermite: order must be positive");
    Eigen::VectorXd b(order - 1);
    for (int i = 1; i < order; ++i) b[i - 1] = std::sqrt(i / 2.0);
    return detail::golub_welsch(b, std::sqrt(std::numbers::pi));
}

// Unit weight on [-1, 1].
inline QuadratureRule gauss_legendre(int order) {
    if (order < 1) throw std::domain_error("gauss_legendre: order must be positive");
    Eigen::VectorXd b(order - 1);
    for (int i = 1; i < order; ++i) b[i - 1] = i / std::sqrt(4.0 * i * i - 1.0);
    return detail::golub_welsch(b, 2.0);
}

}  // namespace spintel
