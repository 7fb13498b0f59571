#pragma once

#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"
#include "ricci/heat.hpp"

namespace ricci {

/// One conjugate-heat kernel solve on the ball of radius k.
struct GreenRecord {
    double k = 0.0;
    BoundaryKind bc = BoundaryKind::Neumann;
    int source_cell = 0;
    double source_time = 0.0;
    DiscreteComplex cx;
    SpaceTimeField field;
    std::vector<double> mass_trace;  // per field time node
};

struct GreenOptions {
    double dt = 0.005;
    double theta = 1.0;
};

/// Kernel family on nested balls ks[0] < ks[1] < ... with a common grid
/// spacing; source at the basepoint, s = 0.
std::vector<GreenRecord> green_family(const GeometryModel& model,
                                      BoundaryKind bc,
                                      std::span<const double> ks, double T,
                                      const GreenOptions& opts = {});
std::vector<GreenRecord> green_family(const FlowSolution& flow,
                                      BoundaryKind bc,
                                      std::span<const double> ks, double T,
                                      const GreenOptions& opts = {});

/// The fixed compact on which convergence is measured: the smallest ball
/// minus a one-cell collar, with the delta layer t - s < 10 h^2 excluded.
struct ProbeSet {
    std::vector<int> ids;  // radial cell index, or planar grid node index
    std::vector<std::size_t> time_indices;  // into the field time grid
    double t1 = 0.0;
};

ProbeSet make_probe(const GreenRecord& smallest);

/// Kernel value at a probe point (ids are shared across records of one
/// family; returns the value of the cell the id maps to).
double probe_value(const GreenRecord& rec, int id, std::size_t time_index);

/// Sup over the probe compact of |a - b| for two records of one family.
double probe_sup_delta(const GreenRecord& a, const GreenRecord& b,
                       const ProbeSet& probe);

struct ConvergenceRow {
    double k = 0.0;
    double delta_neumann = 0.0;    // sup |Z_{k+1} - Z_k|; 0 for the last k
    double delta_dirichlet = 0.0;  // sup |G_{k+1} - G_k|
    double gap = 0.0;              // sup |Z_k - G_k|
    double mass_err = 0.0;         // max_t |m(t) - 1| of the Neumann record
};

std::vector<ConvergenceRow> exhaustion_convergence(
    const std::vector<GreenRecord>& neumann,
    const std::vector<GreenRecord>& dirichlet);

/// Pointwise Gaussian upper bound Z <= (C / V_y(sqrt(tau))) e^{-r^2/(D tau)}.
struct GaussianFit {
    double C = 0.0;
    double D = 0.0;
    double residual = 0.0;  // max over samples of Z V_y e^{r^2/(D tau)} - C
};

struct FitSpec {
    std::vector<double> taus;      // time gaps to sample (resolved ones only)
    double d_min = 1.0;
    double d_max = 64.0;
    int d_count = 32;              // log-spaced decay-constant grid
    double amplitude_slack = 1.05; // pick the smallest D within this of min C
    int stride = 1;                // subsampling for held-out validation
    int offset = 0;
    double max_radius = std::numeric_limits<double>::infinity();
};

GaussianFit fit_gaussian_bound(const GreenRecord& rec, const FitSpec& spec);

/// Largest violation of a given fit over the sample set of `spec`
/// (<= 0 means the bound holds there).
double gaussian_bound_excess(const GreenRecord& rec, const GaussianFit& fit,
                             const FitSpec& spec);

struct MassIntegrability {
    double C_T = 0.0;
    double quadrature_delta = 0.0;  // agreement of two quadrature levels
};

/// Majorant C integral_0^inf e^{-xi + C' sqrt(D xi)} d xi with
/// C' = (n-1) sqrt(k0 T); finite for every D < infinity.
MassIntegrability mass_integrability_check(const GaussianFit& fit,
                                           const FlowCertificate& cert, int n,
                                           double T);

struct SublinearRow {
    double R = 0.0;
    double max_mass = 0.0;  // max over t > s of the partial mass in B_R
};

struct SublinearVerdict {
    bool bounded = false;  // sup <= 1 + 1e-10 (strong form of the o(R) bound)
    std::vector<SublinearRow> profile;
};

SublinearVerdict sublinear_mass_check(const GreenRecord& rec,
                                      std::span<const double> radii);

class GreenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
