#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ricci/geometry.hpp"

namespace ricci {

enum class EquationKind { ConjugateHeat, LinearParabolic };

/// Coefficients of the linear parabolic equation
/// u_t = Delta u + a.grad u + b u (+ forcing).
struct CoefficientData {
    /// Drift sample per edge: component of the vector field along the edge
    /// direction a -> b, with respect to g(0) edge lengths.
    std::vector<double> edge_drift;
    std::vector<double> potential;  // b_i per cell
    double alpha1 = 0.0;            // declared sup |a|
    double alpha2 = 0.0;            // declared sup |b|

    /// Checks the declared sups against the stored samples (1e-12).
    void validate(const DiscreteComplex& cx) const;
};

struct SpaceTimeField {
    EquationKind equation = EquationKind::ConjugateHeat;
    BoundaryKind bc = BoundaryKind::Neumann;
    int source_cell = -1;
    double source_time = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> values;  // [time][cell]

    std::size_t time_index(double t) const;
    const std::vector<double>& at(double t) const { return values[time_index(t)]; }
};

struct SolveOptions {
    /// theta = 1: implicit Euler, unconditionally positive for this M-matrix
    /// structure; theta = 0.5: Crank-Nicolson, second order in time but the
    /// positivity guarantee is lost for large steps.
    double theta = 1.0;
    /// Symmetric steps default to a sparse Cholesky factorization (cached
    /// across steps when the matrix is time-independent); set `iterative`
    /// for diagonally preconditioned conjugate gradients instead.
    bool iterative = false;
    double lin_tol = 1e-12;
    int max_cg_iter = 20000;
};

/// Unit-mass single-cell indicator at cell y, time s.
std::vector<double> discrete_delta(const DiscreteComplex& cx, int y, double s);

/// Forward conjugate heat solve u_t = Delta u - R u from delta data at
/// (y, s) to time T on the nodes of the complex's time grid.
SpaceTimeField solve_conjugate_forward(const DiscreteComplex& cx, int y,
                                       double s, BoundaryKind bc, double T,
                                       const SolveOptions& opts = {});

/// As above but starting from an arbitrary initial field at time s.
SpaceTimeField solve_conjugate_from(const DiscreteComplex& cx,
                                    std::vector<double> u0, double s,
                                    BoundaryKind bc, double T,
                                    const SolveOptions& opts = {});

/// Linear parabolic solve u_t = Delta u + a.grad u + b u + f with upwinded
/// drift fluxes.  `forcing` may be empty (treated as 0).
SpaceTimeField solve_linear_parabolic(
    const DiscreteComplex& cx, const CoefficientData& coeffs,
    std::vector<double> u0, const std::function<double(int, double)>& forcing,
    BoundaryKind bc, double s, double T, const SolveOptions& opts = {});

/// Discrete mass m(t) = sum_i u_i(t) V_i(t).
double mass(const DiscreteComplex& cx, const SpaceTimeField& field, double t);

/// Partial masses over balls of the given radii around the field's source
/// (or the base cell), at time t.
std::vector<std::pair<double, double>> mass_growth_profile(
    const DiscreteComplex& cx, const SpaceTimeField& field,
    std::span<const double> radii, double t);

class HeatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
