#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ricci {

enum class ModelKind { FlatEuclidean, SphereBackwardFlow, ConformalPlaneFlow, PrescribedFamily };
enum class Layout { Radial, Planar };
enum class BoundaryKind { Dirichlet, Neumann };

using ScalarField2d = std::function<double(double, double)>;
using TimeField2d = std::function<double(double, double, double)>;  // (x, y, t)

/// Square tensor grid of cell centers, (2n+1)^2 nodes at spacing h covering
/// [-half_width, half_width]^2 with a node exactly at the origin.
struct PlanarGrid {
    double half_width = 0.0;
    double spacing = 0.0;
    int per_side = 0;  // nodes per side, odd

    static PlanarGrid make(double half_width, double spacing);
    int node_count() const { return per_side * per_side; }
    int index(int ix, int iy) const { return iy * per_side + ix; }
    bool valid(int ix, int iy) const {
        return ix >= 0 && ix < per_side && iy >= 0 && iy < per_side;
    }
    double x(int ix) const { return -half_width + ix * spacing; }
    double y(int iy) const { return -half_width + iy * spacing; }
    int center_index() const { return index(per_side / 2, per_side / 2); }
};

/// Description of one of the supported model geometries.  The metric family
/// g(t) is defined in closed form (flat, sphere) or through a conformal
/// log-factor w(x, t) on a planar grid.
struct GeometryModel {
    ModelKind kind = ModelKind::FlatEuclidean;
    int dim = 2;
    double extent = 4.0;        // largest representable ball radius (g(0))
    double spacing = 1.0 / 16;  // cell width
    Layout layout = Layout::Radial;
    double sphere_radius = 1.0;      // SphereBackwardFlow base radius at t = 0
    ScalarField2d conformal_w0;      // ConformalPlaneFlow initial log-factor
    TimeField2d prescribed_w;        // PrescribedFamily log-factor w(x, y, t)

    static GeometryModel flat(int n, double r_max, double spacing,
                              Layout layout = Layout::Radial);
    static GeometryModel sphere(double radius, double spacing);
    static GeometryModel conformal(ScalarField2d w0, double half_width,
                                   double spacing);
    static GeometryModel prescribed(TimeField2d w, double half_width,
                                    double spacing);
};

struct Edge {
    int a;
    int b;
};

/// Geometry-agnostic finite-volume skeleton.  Immutable after construction;
/// downstream solvers only see cells, time-dependent volumes, conductances,
/// curvature and distance samples.
class DiscreteComplex {
public:
    int dim = 2;
    Layout layout = Layout::Radial;
    double spacing = 0.0;
    double ball_radius = 0.0;
    int base_cell = 0;

    std::vector<std::array<double, 2>> position;  // radial: {r, 0}
    std::vector<char> is_boundary;
    std::vector<Edge> edges;
    std::vector<double> edge_length0;  // rep-point separation under g(0)
    // Conductances are time-independent for every supported model class
    // (flat, sphere scaling, 2-D conformal families).
    std::vector<double> conductance;

    std::vector<double> times;
    std::vector<std::vector<double>> volume;     // [time][cell]
    std::vector<std::vector<double>> curvature;  // scalar curvature samples
    std::vector<std::vector<double>> dist;       // distance to base, [time][cell]
    bool volumes_static = false;

    std::size_t cell_count() const { return position.size(); }
    std::size_t time_count() const { return times.size(); }
    /// Index of time node equal to t (1e-9 tolerance); throws if absent.
    std::size_t time_index(double t) const;
    double total_volume(std::size_t m) const;
    /// (Delta u)_i = (1/V_i) sum_j w_ij (u_j - u_i) at time node m.
    void apply_laplacian(std::size_t m, std::span<const double> u,
                         std::span<double> out) const;

    // Planar complexes keep their originating grid for index lookups.
    PlanarGrid grid;
    std::vector<int> grid_to_cell;  // -1 where the grid node is outside
};

struct ComplexOptions {
    /// Compute distance rows for every time node (otherwise only t_0).
    bool time_distances = false;
};

/// Build the ball B_k of the model geometry, sampled on the given time grid.
DiscreteComplex build_complex(const GeometryModel& model, double ball_radius,
                              std::vector<double> time_grid,
                              const ComplexOptions& opts = {});

/// Per-cell distance to the basepoint at time t (a copy of the stored row).
std::vector<double> distance_to_base(const DiscreteComplex& cx, double t);

struct BallVolume {
    double volume = 0.0;
    bool truncated = false;  // radius exceeded the complex extent
};

/// Volume at time t of the set of cells within `radius` of `center_cell`.
BallVolume ball_volume(const DiscreteComplex& cx, int center_cell,
                       double radius, double t);

/// Comparison ball volume in the curvature -k0 space form,
/// integral of ((1/sqrt(k0)) sinh(sqrt(k0) rho))^(n-1) d rho over [0, r].
/// Note: no unit-sphere area factor; only ratios of these values are used.
double comparison_volume(double k0, int n, double r);

struct RatioBound {
    double lhs = 0.0;   // measured V_y(r)/V_y(sqrt(tau))
    double rhs = 0.0;   // comparison bound V_k0(a sqrt(T))/V_k0(sqrt(T))
    bool under_resolved = false;  // sqrt(tau) below one cell width
};

RatioBound comparison_ratio_bound(const DiscreteComplex& cx, int y, double r,
                                  double tau, double k0, double T);

/// Geodesic distances from a grid node under the conformal metric e^{2w}
/// delta, by Dijkstra on the 8-neighbor stencil of the full grid.
std::vector<double> grid_distances(const PlanarGrid& g, std::span<const double> w,
                                   int source);

/// Scalar curvature R = -2 e^{-2w} (Delta_0 w) of the conformal metric
/// e^{2w} delta on the grid stencil (w = 0 outside the square).
std::vector<double> conformal_curvature(const PlanarGrid& g,
                                        std::span<const double> w);

/// Distances from an arbitrary cell at time t (used by ball_volume and
/// diagnostics; basepoint distances are precomputed).
std::vector<double> distance_from_cell(const DiscreteComplex& cx, int center,
                                       double t);

class GeometryError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
