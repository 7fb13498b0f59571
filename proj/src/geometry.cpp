#include "ricci/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ricci/flow.hpp"
#include "ricci/numerics.hpp"

namespace ricci {

namespace {

constexpr double kTimeTol = 1e-9;

double unit_sphere_area(int n) {
    // surface area of S^{n-1}
    return 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
}

}  // namespace

// Dijkstra over the full planar grid with 8-neighbor stencil; edge length is
// the Euclidean step scaled by the mean conformal factor of its endpoints.
std::vector<double> grid_distances(const PlanarGrid& g,
                                   std::span<const double> w, int source) {
    const int n = g.per_side;
    const double h = g.spacing;
    std::vector<double> d(g.node_count(),
                          std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[source] = 0.0;
    pq.emplace(0.0, source);
    static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    static const double step[8] = {1, 1, 1, 1, M_SQRT2, M_SQRT2, M_SQRT2, M_SQRT2};
    while (!pq.empty()) {
        auto [dist, u] = pq.top();
        pq.pop();
        if (dist > d[u] * (1 + 1e-15)) continue;
        const int ux = u % n, uy = u / n;
        for (int k = 0; k < 8; ++k) {
            const int vx = ux + dx[k], vy = uy + dy[k];
            if (!g.valid(vx, vy)) continue;
            const int v = g.index(vx, vy);
            const double len =
                step[k] * h * std::exp(0.5 * (w[u] + w[v]));
            if (d[u] + len < d[v]) {
                d[v] = d[u] + len;
                pq.emplace(d[v], v);
            }
        }
    }
    return d;
}

std::vector<double> conformal_curvature(const PlanarGrid& g,
                                        std::span<const double> w) {
    const int n = g.per_side;
    const double h2 = g.spacing * g.spacing;
    std::vector<double> R(g.node_count());
    auto wat = [&](int ix, int iy) {
        return g.valid(ix, iy) ? w[g.index(ix, iy)] : 0.0;
    };
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int i = g.index(ix, iy);
            const double lap = (wat(ix + 1, iy) + wat(ix - 1, iy) +
                                wat(ix, iy + 1) + wat(ix, iy - 1) - 4.0 * w[i]) /
                               h2;
            R[i] = -2.0 * std::exp(-2.0 * w[i]) * lap;
        }
    }
    return R;
}

namespace {

DiscreteComplex build_planar(const PlanarGrid& g, const TimeField2d& wfun,
                             double ball_radius, std::vector<double> times,
                             const ComplexOptions& opts) {
    if (ball_radius > g.half_width + kTimeTol)
        throw GeometryError("build_complex: ball radius exceeds model extent");
    const std::size_t nt = times.size();
    const int nn = g.node_count();

    std::vector<std::vector<double>> w(nt, std::vector<double>(nn));
    for (std::size_t m = 0; m < nt; ++m)
        for (int iy = 0; iy < g.per_side; ++iy)
            for (int ix = 0; ix < g.per_side; ++ix)
                w[m][g.index(ix, iy)] = wfun(g.x(ix), g.y(iy), times[m]);

    const auto dist0 = grid_distances(g, w[0], g.center_index());
    std::vector<int> grid_to_cell(nn, -1);
    std::vector<int> cells;
    for (int i = 0; i < nn; ++i) {
        if (dist0[i] <= ball_radius + kTimeTol) {
            grid_to_cell[i] = static_cast<int>(cells.size());
            cells.push_back(i);
        }
    }
    if (cells.empty()) throw GeometryError("build_complex: empty ball");

    DiscreteComplex cx;
    cx.dim = 2;
    cx.layout = Layout::Planar;
    cx.spacing = g.spacing;
    cx.ball_radius = ball_radius;
    cx.grid = g;
    cx.grid_to_cell = grid_to_cell;
    cx.times = std::move(times);
    const std::size_t nc = cells.size();
    cx.position.resize(nc);
    cx.is_boundary.assign(nc, 0);
    for (std::size_t c = 0; c < nc; ++c) {
        const int i = cells[c];
        cx.position[c] = {g.x(i % g.per_side), g.y(i / g.per_side)};
    }
    cx.base_cell = grid_to_cell[g.center_index()];

    // 4-neighbor edges among kept cells; conductance of the conformal
    // Laplace-Beltrami flux is exactly the flat value 1 in 2-D.
    const double h2 = g.spacing * g.spacing;
    for (std::size_t c = 0; c < nc; ++c) {
        const int i = cells[c];
        const int ix = i % g.per_side, iy = i / g.per_side;
        bool rim = false;
        const int nbx[4] = {ix + 1, ix - 1, ix, ix};
        const int nby[4] = {iy, iy, iy + 1, iy - 1};
        for (int k = 0; k < 4; ++k) {
            if (!g.valid(nbx[k], nby[k])) {
                rim = true;
                continue;
            }
            const int j = g.index(nbx[k], nby[k]);
            if (grid_to_cell[j] < 0) {
                rim = true;
                continue;
            }
            if (j > i) {
                cx.edges.push_back({static_cast<int>(c), grid_to_cell[j]});
                cx.conductance.push_back(1.0);
                cx.edge_length0.push_back(
                    g.spacing * std::exp(0.5 * (w[0][i] + w[0][j])));
            }
        }
        if (rim) cx.is_boundary[c] = 1;
    }

    cx.volume.assign(nt, std::vector<double>(nc));
    cx.curvature.assign(nt, std::vector<double>(nc));
    cx.dist.assign(nt, {});
    bool vstatic = true;
    for (std::size_t m = 0; m < nt; ++m) {
        const auto R = conformal_curvature(g, w[m]);
        for (std::size_t c = 0; c < nc; ++c) {
            cx.volume[m][c] = std::exp(2.0 * w[m][cells[c]]) * h2;
            cx.curvature[m][c] = R[cells[c]];
            if (std::abs(cx.volume[m][c] - cx.volume[0][c]) >
                1e-15 * cx.volume[0][c])
                vstatic = false;
        }
    }
    cx.volumes_static = vstatic;

    cx.dist[0].resize(nc);
    for (std::size_t c = 0; c < nc; ++c) cx.dist[0][c] = dist0[cells[c]];
    if (opts.time_distances) {
        for (std::size_t m = 1; m < nt; ++m) {
            const auto dm = grid_distances(g, w[m], g.center_index());
            cx.dist[m].resize(nc);
            for (std::size_t c = 0; c < nc; ++c) cx.dist[m][c] = dm[cells[c]];
        }
    } else if (vstatic) {
        for (std::size_t m = 1; m < nt; ++m) cx.dist[m] = cx.dist[0];
    }
    return cx;
}

DiscreteComplex build_flat_radial(int n, double spacing, double extent,
                                  double ball_radius,
                                  std::vector<double> times) {
    if (ball_radius > extent + kTimeTol)
        throw GeometryError("build_complex: ball radius exceeds model extent");
    const int J = std::max(1, static_cast<int>(std::llround(ball_radius / spacing)));
    const double h = ball_radius / J;
    const double omega = unit_sphere_area(n);

    DiscreteComplex cx;
    cx.dim = n;
    cx.layout = Layout::Radial;
    cx.spacing = h;
    cx.ball_radius = ball_radius;
    cx.base_cell = 0;
    cx.times = std::move(times);
    const std::size_t nt = cx.times.size();

    cx.position.resize(J);
    cx.is_boundary.assign(J, 0);
    cx.is_boundary[J - 1] = 1;
    std::vector<double> vol(J);
    for (int j = 0; j < J; ++j) {
        const double a = j * h, b = (j + 1) * h;
        cx.position[j] = {0.5 * (a + b), 0.0};
        vol[j] = omega / n * (std::pow(b, n) - std::pow(a, n));
    }
    for (int j = 1; j < J; ++j) {
        cx.edges.push_back({j - 1, j});
        cx.conductance.push_back(omega * std::pow(j * h, n - 1) / h);
        cx.edge_length0.push_back(h);
    }
    cx.volume.assign(nt, vol);
    cx.curvature.assign(nt, std::vector<double>(J, 0.0));
    std::vector<double> d(J);
    for (int j = 0; j < J; ++j) d[j] = cx.position[j][0];
    cx.dist.assign(nt, d);
    cx.volumes_static = true;
    return cx;
}

DiscreteComplex build_sphere(double radius, double spacing, double ball_radius,
                             std::vector<double> times) {
    const double a = radius;
    const double max_r = M_PI * a;
    if (ball_radius > max_r + kTimeTol)
        throw GeometryError("build_complex: ball radius exceeds model extent");
    for (double t : times)
        if (t < 0.0)
            throw GeometryError(
                "build_complex: sphere backward flow requires t >= 0");
    const double theta_max = std::min(ball_radius, max_r) / a;
    const int J = std::max(1, static_cast<int>(std::llround(theta_max * a / spacing)));
    const double dtheta = theta_max / J;
    const bool whole = theta_max >= M_PI - 1e-12;

    DiscreteComplex cx;
    cx.dim = 2;
    cx.layout = Layout::Radial;
    cx.spacing = dtheta * a;
    cx.ball_radius = ball_radius;
    cx.base_cell = 0;
    cx.times = std::move(times);
    const std::size_t nt = cx.times.size();

    cx.position.resize(J);
    cx.is_boundary.assign(J, 0);
    if (!whole) cx.is_boundary[J - 1] = 1;
    std::vector<double> vol0(J);
    for (int j = 0; j < J; ++j) {
        const double ta = j * dtheta, tb = (j + 1) * dtheta;
        cx.position[j] = {a * 0.5 * (ta + tb), 0.0};
        vol0[j] = 2.0 * M_PI * a * a * (std::cos(ta) - std::cos(tb));
    }
    for (int j = 1; j < J; ++j) {
        cx.edges.push_back({j - 1, j});
        cx.conductance.push_back(2.0 * M_PI * std::sin(j * dtheta) / dtheta);
        cx.edge_length0.push_back(a * dtheta);
    }
    cx.volume.assign(nt, {});
    cx.curvature.assign(nt, {});
    cx.dist.assign(nt, {});
    const double R0 = 2.0 / (a * a);
    for (std::size_t m = 0; m < nt; ++m) {
        const double s = 1.0 + cx.times[m];  // metric scale (1+t) h_0
        cx.volume[m].resize(J);
        cx.curvature[m].assign(J, R0 / s);
        cx.dist[m].resize(J);
        for (int j = 0; j < J; ++j) {
            cx.volume[m][j] = s * vol0[j];
            cx.dist[m][j] = std::sqrt(s) * cx.position[j][0];
        }
    }
    cx.volumes_static = false;
    return cx;
}

}  // namespace

PlanarGrid PlanarGrid::make(double half_width, double spacing) {
    if (!(half_width > 0.0) || !(spacing > 0.0))
        throw GeometryError("PlanarGrid: non-positive extent or spacing");
    PlanarGrid g;
    g.spacing = spacing;
    const int half = std::max(1, static_cast<int>(std::llround(half_width / spacing)));
    g.per_side = 2 * half + 1;
    g.half_width = half * spacing;
    return g;
}

GeometryModel GeometryModel::flat(int n, double r_max, double spacing,
                                  Layout layout) {
    if (n < 1 || !(r_max > 0.0) || !(spacing > 0.0))
        throw GeometryError("GeometryModel::flat: bad parameters");
    if (layout == Layout::Planar && n != 2)
        throw GeometryError("GeometryModel::flat: planar layout requires n=2");
    GeometryModel m;
    m.kind = ModelKind::FlatEuclidean;
    m.dim = n;
    m.extent = r_max;
    m.spacing = spacing;
    m.layout = layout;
    return m;
}

GeometryModel GeometryModel::sphere(double radius, double spacing) {
    if (!(radius > 0.0) || !(spacing > 0.0))
        throw GeometryError("GeometryModel::sphere: bad parameters");
    GeometryModel m;
    m.kind = ModelKind::SphereBackwardFlow;
    m.dim = 2;
    m.sphere_radius = radius;
    m.extent = M_PI * radius;
    m.spacing = spacing;
    m.layout = Layout::Radial;
    return m;
}

GeometryModel GeometryModel::conformal(ScalarField2d w0, double half_width,
                                       double spacing) {
    if (!w0 || !(half_width > 0.0) || !(spacing > 0.0))
        throw GeometryError("GeometryModel::conformal: bad parameters");
    GeometryModel m;
    m.kind = ModelKind::ConformalPlaneFlow;
    m.dim = 2;
    m.extent = half_width;
    m.spacing = spacing;
    m.layout = Layout::Planar;
    m.conformal_w0 = std::move(w0);
    return m;
}

GeometryModel GeometryModel::prescribed(TimeField2d w, double half_width,
                                        double spacing) {
    if (!w || !(half_width > 0.0) || !(spacing > 0.0))
        throw GeometryError("GeometryModel::prescribed: bad parameters");
    GeometryModel m;
    m.kind = ModelKind::PrescribedFamily;
    m.dim = 2;
    m.extent = half_width;
    m.spacing = spacing;
    m.layout = Layout::Planar;
    m.prescribed_w = std::move(w);
    return m;
}

std::size_t DiscreteComplex::time_index(double t) const {
    for (std::size_t m = 0; m < times.size(); ++m)
        if (std::abs(times[m] - t) <= kTimeTol * std::max(1.0, std::abs(t)))
            return m;
    throw GeometryError("time " + std::to_string(t) + " not on the time grid");
}

double DiscreteComplex::total_volume(std::size_t m) const {
    return kahan_sum(volume.at(m));
}

void DiscreteComplex::apply_laplacian(std::size_t m, std::span<const double> u,
                                      std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        const double f = conductance[e] * (u[j] - u[i]);
        out[i] += f;
        out[j] -= f;
    }
    const auto& V = volume.at(m);
    for (std::size_t i = 0; i < cell_count(); ++i) out[i] /= V[i];
}

DiscreteComplex build_complex(const GeometryModel& model, double ball_radius,
                              std::vector<double> time_grid,
                              const ComplexOptions& opts) {
    if (!(ball_radius > 0.0))
        throw GeometryError("build_complex: non-positive ball radius");
    if (time_grid.empty())
        throw GeometryError("build_complex: empty time grid");
    for (std::size_t m = 1; m < time_grid.size(); ++m)
        if (!(time_grid[m] > time_grid[m - 1]))
            throw GeometryError("build_complex: time grid not increasing");
    if (!(model.spacing > 0.0))
        throw GeometryError("build_complex: non-positive resolution");

    switch (model.kind) {
        case ModelKind::FlatEuclidean:
            if (model.layout == Layout::Planar) {
                const auto g = PlanarGrid::make(model.extent, model.spacing);
                return build_planar(
                    g, [](double, double, double) { return 0.0; }, ball_radius,
                    std::move(time_grid), opts);
            }
            return build_flat_radial(model.dim, model.spacing, model.extent,
                                     ball_radius, std::move(time_grid));
        case ModelKind::SphereBackwardFlow:
            return build_sphere(model.sphere_radius, model.spacing, ball_radius,
                                std::move(time_grid));
        case ModelKind::ConformalPlaneFlow: {
            const double T = time_grid.back();
            FlowOptions fo;
            const FlowSolution flow =
                T > 0.0 ? evolve_forward(model, T, fo)
                        : FlowSolution::still(model);
            return build_complex(flow, ball_radius, std::move(time_grid), opts);
        }
        case ModelKind::PrescribedFamily: {
            const auto g = PlanarGrid::make(model.extent, model.spacing);
            return build_planar(g, model.prescribed_w, ball_radius,
                                std::move(time_grid), opts);
        }
    }
    throw GeometryError("build_complex: unknown model kind");
}

DiscreteComplex build_complex(const FlowSolution& flow, double ball_radius,
                              std::vector<double> time_grid,
                              const ComplexOptions& opts) {
    for (double t : time_grid)
        if (t < flow.times.front() - kTimeTol || t > flow.times.back() + kTimeTol)
            throw GeometryError("build_complex: time grid outside flow lifespan");
    const auto g = PlanarGrid::make(flow.model.extent, flow.model.spacing);
    return build_planar(
        g, [&flow](double x, double y, double t) { return flow.w_at(x, y, t); },
        ball_radius, std::move(time_grid), opts);
}

std::vector<double> distance_to_base(const DiscreteComplex& cx, double t) {
    const std::size_t m = cx.time_index(t);
    if (!cx.dist[m].empty()) return cx.dist[m];
    return distance_from_cell(cx, cx.base_cell, t);
}

std::vector<double> distance_from_cell(const DiscreteComplex& cx, int center,
                                       double t) {
    const std::size_t m = cx.time_index(t);
    if (cx.layout == Layout::Radial) {
        // radial cells are annuli; distance along the radius, scaled the way
        // the basepoint distances are.
        const double scale =
            cx.dist[m].empty() ? 1.0 : cx.dist[m].back() / cx.position.back()[0];
        std::vector<double> d(cx.cell_count());
        for (std::size_t i = 0; i < d.size(); ++i)
            d[i] = scale * std::abs(cx.position[i][0] - cx.position[center][0]);
        return d;
    }
    // planar: Dijkstra on the kept subgraph with conformal factors recovered
    // from cell volumes (V = e^{2w} h^2).
    const double h2 = cx.spacing * cx.spacing;
    const auto& V = cx.volume[m];
    const int n = cx.grid.per_side;
    std::vector<double> d(cx.cell_count(),
                          std::numeric_limits<double>::infinity());
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[center] = 0.0;
    pq.emplace(0.0, center);
    static constexpr int dx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static constexpr int dy[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    static const double step[8] = {1, 1, 1, 1, M_SQRT2, M_SQRT2, M_SQRT2, M_SQRT2};
    // node index of each cell on the originating grid
    std::vector<int> cell_to_grid(cx.cell_count(), -1);
    for (int gi = 0; gi < cx.grid.node_count(); ++gi)
        if (cx.grid_to_cell[gi] >= 0) cell_to_grid[cx.grid_to_cell[gi]] = gi;
    while (!pq.empty()) {
        auto [dist, u] = pq.top();
        pq.pop();
        if (dist > d[u] * (1 + 1e-15)) continue;
        const int gu = cell_to_grid[u];
        const int ux = gu % n, uy = gu / n;
        for (int k = 0; k < 8; ++k) {
            const int vx = ux + dx[k], vy = uy + dy[k];
            if (!cx.grid.valid(vx, vy)) continue;
            const int v = cx.grid_to_cell[cx.grid.index(vx, vy)];
            if (v < 0) continue;
            const double conf =
                std::pow(V[u] * V[v] / (h2 * h2), 0.25);
            const double len = step[k] * cx.spacing * conf;
            if (d[u] + len < d[v]) {
                d[v] = d[u] + len;
                pq.emplace(d[v], v);
            }
        }
    }
    return d;
}

BallVolume ball_volume(const DiscreteComplex& cx, int center_cell,
                       double radius, double t) {
    if (!(radius > 0.0))
        throw GeometryError("ball_volume: non-positive radius");
    const std::size_t m = cx.time_index(t);
    const auto d = center_cell == cx.base_cell
                       ? distance_to_base(cx, t)
                       : distance_from_cell(cx, center_cell, t);
    BallVolume out;
    double maxd = 0.0;
    std::vector<double> vals;
    vals.reserve(cx.cell_count());
    for (std::size_t i = 0; i < cx.cell_count(); ++i) {
        maxd = std::max(maxd, d[i]);
        if (d[i] <= radius + kTimeTol) vals.push_back(cx.volume[m][i]);
    }
    out.volume = kahan_sum(vals);
    out.truncated = radius > maxd + cx.spacing;
    return out;
}

double comparison_volume(double k0, int n, double r) {
    if (!(k0 > 0.0) || n < 2 || r < 0.0)
        throw GeometryError("comparison_volume: bad arguments");
    if (r == 0.0) return 0.0;
    const double sq = std::sqrt(k0);
    const auto f = [&](double rho) {
        return std::pow(std::sinh(sq * rho) / sq, n - 1);
    };
    return integrate_adaptive(f, 0.0, r, 1e-12);
}

RatioBound comparison_ratio_bound(const DiscreteComplex& cx, int y, double r,
                                  double tau, double k0, double T) {
    if (!(tau > 0.0)) throw GeometryError("comparison_ratio_bound: tau <= 0");
    RatioBound out;
    const double rt = std::sqrt(tau);
    out.under_resolved = rt < cx.spacing;
    const double t0 = cx.times.front();
    out.lhs = ball_volume(cx, y, r, t0).volume /
              ball_volume(cx, y, rt, t0).volume;
    const double a = r / rt + 1.0;
    out.rhs = comparison_volume(k0, cx.dim, a * std::sqrt(T)) /
              comparison_volume(k0, cx.dim, std::sqrt(T));
    return out;
}

}  // namespace ricci
