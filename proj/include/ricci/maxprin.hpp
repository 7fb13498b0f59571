#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"
#include "ricci/heat.hpp"

namespace ricci {

/// Cutoff and weight apparatus for the non-positivity argument: the
/// space-time weight h concentrates the energy estimate near the basepoint,
/// the ramp phiR localizes it to the ball of radius R.
struct CutoffData {
    double lambda = 0.0;   // growth-condition constant
    double lambda1 = 0.0;  // lambda e^{alpha3 T}
    double eta = 0.0;      // window length of one energy-estimate pass
    double C1 = 0.0;       // 2 alpha2 + 4 alpha1^2 + n alpha3 / 2
    double alpha3 = 0.0;
    double T = 0.0;
    double R = 0.0;
    int n = 2;

    std::vector<double> r0;    // distance to base under g(0), per cell
    std::vector<double> phiR;  // ramp(r0 - R), per cell

    /// Weight h_i(t) = -r_i(0)^2 / (4 (2 eta - t)) for t in [0, eta].
    double h(std::size_t cell, double t) const;
    double h_time_derivative(std::size_t cell, double t) const;
};

/// Assembles the cutoff constants from the flow certificate and the
/// declared coefficient bounds, and verifies h(., 0) <= -lambda1 r0^2 on
/// every cell.  Requires lambda > 0 and R >= 1.
CutoffData build_cutoff(const DiscreteComplex& cx, const FlowCertificate& cert,
                        const CoefficientData& coeffs, double lambda, double R);

/// One randomized hypothesis set: drift and potential within the declared
/// bounds, non-positive initial data, non-positive forcing slack.  The
/// parabolic solve of such an instance is a genuine subsolution.
struct RandomInstance {
    CoefficientData coeffs;
    std::vector<double> u0;     // <= 0 everywhere
    std::vector<double> slack;  // <= 0, time-independent forcing

    std::function<double(int, double)> forcing() const;
};

/// Deterministic in the seed; measured sups stay within alpha1 / alpha2.
RandomInstance random_instance(std::uint64_t seed, const DiscreteComplex& cx,
                               double alpha1, double alpha2);

/// Max of u over all cells and stored times (the falsifiable conclusion:
/// <= 0 up to solver tolerance).
double check_conclusion(const SpaceTimeField& field);

/// Both sides of the localized energy estimate over the window [0, eta],
/// with the initial positive-part energy carried on the right-hand side so
/// the inequality also covers diagnostic runs seeded with positive data.
struct EnergyReport {
    double state_max = 0.0;  // max_t e^{-C1 t} int phi^2 e^h u+^2 dV_t
    double grad_max = 0.0;   // max_t (e^{-C1 eta}/8) int_0^t int phi^2 e^h |grad u+|^2
    double annulus = 0.0;    // 32 e^{alpha3 T} int_0^eta int_{B_{R+1} \ B_R} e^h u+^2
    double initial = 0.0;    // int phi^2 e^{h(0)} u+(0)^2 dV_0
    double margin = 0.0;     // max_t LHS(t) - (annulus + initial)
    double scale = 0.0;      // magnitude reference for the pass tolerance
};

EnergyReport energy_inequality_check(const DiscreteComplex& cx,
                                     const SpaceTimeField& field,
                                     const CutoffData& cut);

/// Space-time quadrature of int u+^2 e^{-lambda r_t^2} dV_t dt over the
/// stored trajectory (finite by construction on truncated domains; the
/// value is recorded, the conclusion check is the falsifiable part).
double growth_condition_value(const DiscreteComplex& cx,
                              const SpaceTimeField& field, double lambda);

/// Discrete residuals of the analytic identities the weight apparatus
/// rests on, measured on interior cells.
struct CutoffResiduals {
    double eikonal = 0.0;     // sup |h_t + |grad0 h|^2|, O(spacing)
    double damped = 0.0;      // sup (h_t + e^{-alpha3 eta} |grad0 h|^2)
    double grad_phi0 = 0.0;   // sup edge slope of phiR under g(0)
    double grad_phi_t = 0.0;  // sup over stored times under g(t)
};

CutoffResiduals cutoff_residuals(const DiscreteComplex& cx,
                                 const CutoffData& cut);

class MaxPrinError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
