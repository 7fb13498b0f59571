#include "ricci/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace ricci {

double flat_heat_kernel(int n, double r, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("flat_heat_kernel: tau <= 0");
    return std::pow(4.0 * M_PI * tau, -0.5 * n) *
           std::exp(-r * r / (4.0 * tau));
}

Eigen::MatrixXd dense_heat_propagator(const DiscreteComplex& cx,
                                      BoundaryKind bc, double t) {
    if (!cx.volumes_static)
        throw std::invalid_argument(
            "dense_heat_propagator: time-varying volumes not supported");
    const int n = static_cast<int>(cx.cell_count());
    const bool dirichlet = bc == BoundaryKind::Dirichlet;

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        const auto [i, j] = cx.edges[e];
        const double w = cx.conductance[e];
        const bool bi = dirichlet && cx.is_boundary[i];
        const bool bj = dirichlet && cx.is_boundary[j];
        if (bi && bj) continue;
        if (bi) {
            K(j, j) += w;
            continue;
        }
        if (bj) {
            K(i, i) += w;
            continue;
        }
        K(i, i) += w;
        K(j, j) += w;
        K(i, j) -= w;
        K(j, i) -= w;
    }

    Eigen::VectorXd sqv(n);
    for (int i = 0; i < n; ++i) sqv[i] = std::sqrt(cx.volume[0][i]);
    // exp(-t V^{-1} K) = V^{-1/2} exp(-t S) V^{1/2}, S = V^{-1/2} K V^{-1/2}
    Eigen::MatrixXd S = sqv.cwiseInverse().asDiagonal() * K *
                        sqv.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    Eigen::VectorXd ex = (-t * es.eigenvalues().array()).exp();
    Eigen::MatrixXd expS =
        es.eigenvectors() * ex.asDiagonal() * es.eigenvectors().transpose();
    return sqv.cwiseInverse().asDiagonal() * expS * sqv.asDiagonal();
}

std::vector<double> dense_heat_solve(const DiscreteComplex& cx, BoundaryKind bc,
                                     std::span<const double> u0, double t) {
    const Eigen::MatrixXd P = dense_heat_propagator(cx, bc, t);
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(
        u0.data(), static_cast<long>(u0.size()));
    Eigen::VectorXd v = P * u;
    return {v.data(), v.data() + v.size()};
}

}  // namespace ricci
