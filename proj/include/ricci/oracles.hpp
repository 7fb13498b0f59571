#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "ricci/geometry.hpp"

namespace ricci {

/// Closed-form heat kernel of flat R^n: (4 pi tau)^{-n/2} e^{-r^2/(4 tau)}.
double flat_heat_kernel(int n, double r, double tau);

/// Brute-force dense propagator exp(-t V^{-1} K) for complexes with
/// time-independent volumes, via the symmetrized eigendecomposition of
/// V^{-1/2} K V^{-1/2}.  Reference implementation for small complexes only.
Eigen::MatrixXd dense_heat_propagator(const DiscreteComplex& cx,
                                      BoundaryKind bc, double t);

/// Apply the dense propagator to an initial field.
std::vector<double> dense_heat_solve(const DiscreteComplex& cx, BoundaryKind bc,
                                     std::span<const double> u0, double t);

}  // namespace ricci
