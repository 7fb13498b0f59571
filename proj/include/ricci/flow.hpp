#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ricci/geometry.hpp"

namespace ricci {

enum class FlowDirection { Forward, Backward };

struct FlowOptions {
    double dt = 0.005;        // target time step
    double inner_tol = 1e-10; // nonlinear inner-loop sup-norm tolerance
    int max_inner = 60;
    int max_halvings = 8;
    double blowup_guard = 1e4;  // abort when sup |K| exceeds this
};

/// One metric family g(t) on [0, T].  Conformal classes carry the
/// log-factor w per grid node and time node; flat/sphere are closed form
/// (w identically 0, or a scalar scale factor).
struct FlowSolution {
    GeometryModel model;  // geometry at t = 0
    FlowDirection direction = FlowDirection::Forward;
    std::vector<double> times;
    PlanarGrid grid;                      // planar classes
    std::vector<std::vector<double>> w;   // [time][node], planar classes
    std::vector<double> scale;            // [time], sphere class
    std::vector<double> sup_k;            // per-time sup |K| over the grid

    bool planar() const { return model.layout == Layout::Planar; }
    double duration() const { return times.back() - times.front(); }
    double sup_rm() const;
    /// Log-factor at (x, y, t), piecewise linear in t between stored slices.
    double w_at(double x, double y, double t) const;
    double scale_at(double t) const;

    /// Time-frozen solution at t = 0 (used for static geometries).
    static FlowSolution still(const GeometryModel& model);
};

/// Solve the forward Ricci flow for T time units.  Conformal classes use
/// implicit stepping of d/dt w = e^{-2w} Delta_0 w with w = 0 outside the
/// square; flat and sphere classes return closed forms.
FlowSolution evolve_forward(const GeometryModel& model, double T,
                            const FlowOptions& opts = {});

/// Time-reversal g_back(t) = g_fwd(T - t); an exact involution on the data.
FlowSolution reverse(const FlowSolution& flow);

/// Concrete constants for the hypotheses the solvers rely on: curvature
/// bound k0, metric-velocity bound alpha3 = 2(n-1) k0, and the derived
/// metric/distance/volume-element equivalence factors over [0, T].
struct FlowCertificate {
    int n = 2;
    double T = 0.0;
    double k0 = 0.0;
    double alpha3 = 0.0;
    double metric_factor = 1.0;    // e^{alpha3 T}
    double distance_factor = 1.0;  // e^{alpha3 T / 2}
    double volume_factor = 1.0;    // e^{n alpha3 T / 2}
    std::uint64_t samples_checked = 0;
};

class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Compute the certificate and re-check every band on `samples` random
/// space-time samples; throws CertificationError naming the offending
/// sample if a measured ratio escapes its band.
FlowCertificate certify(const FlowSolution& flow, std::uint64_t seed = 1,
                        int samples = 2000);

struct RateCheckResult {
    double residual = 0.0;      // max_i |dV_i/dt - R_i V_i| (backward flows)
    double band_margin = 0.0;   // max_i |dV_i/dt| / ((n alpha3/2) V_i)
};

/// Finite-difference check of the volume-element evolution rate at an
/// interior time node; throws CertificationError if the band fails.
RateCheckResult volume_element_rate_check(const FlowSolution& flow, double t);

/// Build a discrete ball on a (typically reversed) flow solution.
DiscreteComplex build_complex(const FlowSolution& flow, double ball_radius,
                              std::vector<double> time_grid,
                              const ComplexOptions& opts = {});

}  // namespace ricci
