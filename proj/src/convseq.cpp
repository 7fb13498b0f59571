#include "ricci/convseq.hpp"

#include <algorithm>
#include <cmath>

#include "ricci/numerics.hpp"

namespace ricci {

namespace {

std::vector<double> sample_times(double alpha) {
    return {0.0, 0.25 * alpha, 0.5 * alpha, 0.75 * alpha, alpha};
}

// grid samples of w(t) for one flow
std::vector<double> sample_w(const FlowSolution& f, const PlanarGrid& g,
                             double t) {
    std::vector<double> out(g.node_count());
    for (int iy = 0; iy < g.per_side; ++iy)
        for (int ix = 0; ix < g.per_side; ++ix)
            out[g.index(ix, iy)] = f.w_at(g.x(ix), g.y(iy), t);
    return out;
}

}  // namespace

FlowSequence build_sequence(const SequenceSpec& spec, int count,
                            const FlowOptions& opts) {
    if (count < 3) throw ConvSeqError("build_sequence: need count >= 3");
    if (spec.limit.kind != ModelKind::ConformalPlaneFlow)
        throw ConvSeqError("build_sequence: limit must be a conformal model");
    if (!(spec.eps0 > 0.0) || !(spec.eps_decay > 0.0) ||
        !(spec.eps_decay < 1.0))
        throw ConvSeqError("build_sequence: amplitudes must decrease to 0");
    if (!(spec.A_step > 0.0) || !(spec.A0 > 0.0))
        throw ConvSeqError("build_sequence: flattening radii must increase");

    FlowSequence seq;
    seq.limit = evolve_forward(spec.limit, spec.alpha, opts);
    const double probe =
        spec.probe_radius > 0.0 ? spec.probe_radius : 0.8 * spec.A0;
    const auto& grid = seq.limit.grid;

    for (int k = 1; k <= count; ++k) {
        const double eps = spec.eps0 * std::pow(spec.eps_decay, k - 1);
        const double A = spec.A0 + (k - 1) * spec.A_step;
        auto w0 = [base = spec.limit.conformal_w0, psi = spec.psi_pert, eps,
                   A](double x, double y) {
            const double r = std::hypot(x, y);
            return (base(x, y) + eps * psi(x, y)) * cubic_ramp(r - A);
        };
        const auto model = GeometryModel::conformal(
            w0, spec.limit.extent, spec.limit.spacing);
        seq.members.push_back(evolve_forward(model, spec.alpha, opts));
        seq.eps.push_back(eps);
        seq.cutoffs.push_back(A);
    }

    // common curvature bound over the whole family
    double measured = seq.limit.sup_rm();
    for (const auto& m : seq.members) measured = std::max(measured, m.sup_rm());
    if (spec.curvature_bound > 0.0) {
        if (measured > spec.curvature_bound)
            throw ConvSeqError(
                "build_sequence: member curvature escapes the common bound");
        seq.curvature_bound = spec.curvature_bound;
    } else {
        seq.curvature_bound = 1.05 * measured;
    }

    // chart-norm distances and the uniform metric-equivalence constant on
    // the probe compact, from grid samples of w at a handful of times
    const auto times = sample_times(spec.alpha);
    std::vector<std::vector<double>> wl;
    for (double t : times) wl.push_back(sample_w(seq.limit, grid, t));
    const double h = grid.spacing;
    double ratio = 1.0;
    for (std::size_t j = 0; j < seq.members.size(); ++j) {
        double c0 = 0.0, c2 = 0.0;
        std::vector<double> wmin(grid.node_count(), 1e300),
            wmax(grid.node_count(), -1e300);
        for (std::size_t s = 0; s < times.size(); ++s) {
            const auto wm = sample_w(seq.members[j], grid, times[s]);
            for (int iy = 1; iy + 1 < grid.per_side; ++iy)
                for (int ix = 1; ix + 1 < grid.per_side; ++ix) {
                    const int i = grid.index(ix, iy);
                    wmin[i] = std::min(wmin[i], wm[i]);
                    wmax[i] = std::max(wmax[i], wm[i]);
                    if (std::hypot(grid.x(ix), grid.y(iy)) > probe) continue;
                    auto d = [&](int jx, int jy) {
                        const int q = grid.index(jx, jy);
                        return wm[q] - wl[s][q];
                    };
                    const double d0 = d(ix, iy);
                    const double gx = (d(ix + 1, iy) - d(ix - 1, iy)) / (2 * h);
                    const double gy = (d(ix, iy + 1) - d(ix, iy - 1)) / (2 * h);
                    const double hxx =
                        (d(ix + 1, iy) - 2 * d0 + d(ix - 1, iy)) / (h * h);
                    const double hyy =
                        (d(ix, iy + 1) - 2 * d0 + d(ix, iy - 1)) / (h * h);
                    const double hxy = (d(ix + 1, iy + 1) - d(ix + 1, iy - 1) -
                                        d(ix - 1, iy + 1) + d(ix - 1, iy - 1)) /
                                       (4 * h * h);
                    c0 = std::max(c0, std::abs(d0));
                    c2 = std::max(c2, std::abs(d0) + std::abs(gx) +
                                          std::abs(gy) + std::abs(hxx) +
                                          std::abs(hyy) + std::abs(hxy));
                }
        }
        for (int iy = 1; iy + 1 < grid.per_side; ++iy)
            for (int ix = 1; ix + 1 < grid.per_side; ++ix) {
                if (std::hypot(grid.x(ix), grid.y(iy)) > probe) continue;
                const int i = grid.index(ix, iy);
                ratio = std::max(ratio, std::exp(2.0 * (wmax[i] - wmin[i])));
            }
        seq.chart_c0.push_back(c0);
        seq.chart_c2.push_back(c2);
    }
    seq.metric_ratio = ratio;
    return seq;
}

KernelSequence solve_sequence_kernels(const FlowSequence& seq, double ball,
                                      const GreenOptions& opts) {
    KernelSequence ks;
    ks.alpha = seq.limit.duration();
    const std::vector<double> one_ball{ball};
    ks.limit = std::move(green_family(reverse(seq.limit), BoundaryKind::Neumann,
                                      one_ball, ks.alpha, opts)[0]);
    for (const auto& m : seq.members)
        ks.members.push_back(std::move(green_family(reverse(m),
                                                    BoundaryKind::Neumann,
                                                    one_ball, ks.alpha,
                                                    opts)[0]));
    return ks;
}

std::vector<SequenceRow> compare_on_compact(const KernelSequence& ks,
                                            double probe_radius,
                                            double tau_lo, double tau_hi) {
    if (!(0.0 < tau_lo) || !(tau_lo < tau_hi) || tau_hi > ks.alpha + 1e-12)
        throw ConvSeqError("compare_on_compact: bad time window");
    const auto& lcx = ks.limit.cx;
    // probe nodes: inside the compact on the limit geometry and present
    // (non-boundary) in every member complex
    std::vector<int> ids;
    for (int g = 0; g < lcx.grid.node_count(); ++g) {
        const int c = lcx.grid_to_cell[g];
        if (c < 0 || lcx.is_boundary[c] || lcx.dist[0][c] > probe_radius)
            continue;
        bool everywhere = true;
        for (const auto& m : ks.members) {
            const int mc = m.cx.grid_to_cell[g];
            if (mc < 0 || m.cx.is_boundary[mc]) {
                everywhere = false;
                break;
            }
        }
        if (everywhere) ids.push_back(g);
    }
    std::vector<std::size_t> slices;
    for (std::size_t m = 0; m < ks.limit.field.times.size(); ++m) {
        const double tau = ks.limit.field.times[m];
        if (tau >= tau_lo - 1e-12 && tau <= tau_hi + 1e-12) slices.push_back(m);
    }
    if (ids.empty() || slices.empty())
        throw ConvSeqError("compare_on_compact: empty probe compact");

    std::vector<SequenceRow> rows;
    double prev = 0.0;
    for (std::size_t j = 0; j < ks.members.size(); ++j) {
        SequenceRow row;
        row.k = static_cast<int>(j) + 1;
        for (std::size_t m : slices)
            for (int g : ids)
                row.delta = std::max(
                    row.delta, std::abs(probe_value(ks.members[j], g, m) -
                                        probe_value(ks.limit, g, m)));
        row.ratio = j == 0 ? 0.0 : row.delta / prev;
        prev = row.delta;
        rows.push_back(row);
    }
    return rows;
}

std::vector<WeakIdentityRow> weak_identity_check(const GreenRecord& rec,
                                                 const ScalarField2d& psi,
                                                 double t1) {
    const auto& cx = rec.cx;
    const double tau_max = -t1;
    if (!(tau_max > 0.0) || tau_max > rec.field.times.back() + 1e-12)
        throw ConvSeqError("weak_identity_check: t1 outside (-alpha, 0)");
    std::vector<double> p(cx.cell_count());
    double pmax = 0.0;
    for (std::size_t i = 0; i < cx.cell_count(); ++i) {
        p[i] = psi(cx.position[i][0], cx.position[i][1]);
        pmax = std::max(pmax, std::abs(p[i]));
    }
    for (std::size_t i = 0; i < cx.cell_count(); ++i)
        if (cx.is_boundary[i] && std::abs(p[i]) > 1e-9 * pmax)
            throw ConvSeqError("weak_identity_check: psi clipped by the grid");
    const double pbase = p[cx.base_cell];

    // sup of the evolving-metric Laplacian of psi over the window
    double lap_sup = 0.0;
    std::vector<double> lap(cx.cell_count());
    for (std::size_t m = 0; m < cx.time_count(); ++m) {
        if (cx.times[m] > tau_max + 1e-12) break;
        cx.apply_laplacian(m, p, lap);
        for (std::size_t i = 0; i < cx.cell_count(); ++i)
            lap_sup = std::max(lap_sup, std::abs(lap[i]));
        if (cx.volumes_static) break;
    }

    std::vector<WeakIdentityRow> rows;
    for (std::size_t m = 1; m < rec.field.times.size(); ++m) {
        const double tau = rec.field.times[m];
        if (tau > tau_max + 1e-12) break;
        const std::size_t mc = cx.time_index(tau);
        const auto& u = rec.field.values[m];
        const auto& V = cx.volume[mc];
        std::vector<double> terms(cx.cell_count());
        for (std::size_t i = 0; i < cx.cell_count(); ++i)
            terms[i] = u[i] * p[i] * V[i];
        WeakIdentityRow row;
        row.t = -tau;
        row.lhs = std::abs(kahan_sum(terms) - pbase);
        row.bound = tau * lap_sup;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace ricci
