#include "ricci/green.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "ricci/numerics.hpp"

namespace ricci {

namespace {

GreenRecord solve_one(DiscreteComplex cx, double k, BoundaryKind bc, double T,
                      const GreenOptions& opts) {
    GreenRecord rec;
    rec.k = k;
    rec.bc = bc;
    rec.source_cell = cx.base_cell;
    rec.source_time = cx.times.front();
    SolveOptions so;
    so.theta = opts.theta;
    rec.field = solve_conjugate_forward(cx, cx.base_cell, cx.times.front(), bc,
                                        T, so);
    rec.cx = std::move(cx);
    rec.mass_trace.reserve(rec.field.times.size());
    for (double t : rec.field.times)
        rec.mass_trace.push_back(mass(rec.cx, rec.field, t));
    return rec;
}

void check_nested(const std::vector<GreenRecord>& recs) {
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (!(recs[i].k > recs[i - 1].k))
            throw GreenError("green_family: radii must be strictly increasing");
        if (std::abs(recs[i].cx.spacing - recs[0].cx.spacing) >
            1e-12 * recs[0].cx.spacing)
            throw GreenError("green_family: grids are not nested (spacing)");
    }
}

int record_cell(const GreenRecord& rec, int id) {
    if (rec.cx.layout == Layout::Radial) return id;
    return rec.cx.grid_to_cell[id];
}

}  // namespace

std::vector<GreenRecord> green_family(const GeometryModel& model,
                                      BoundaryKind bc,
                                      std::span<const double> ks, double T,
                                      const GreenOptions& opts) {
    if (ks.empty()) throw GreenError("green_family: no radii");
    const auto grid = uniform_time_grid(0.0, T, opts.dt);
    std::vector<GreenRecord> out;
    out.reserve(ks.size());
    for (double k : ks)
        out.push_back(solve_one(build_complex(model, k, grid), k, bc, T, opts));
    check_nested(out);
    return out;
}

std::vector<GreenRecord> green_family(const FlowSolution& flow,
                                      BoundaryKind bc,
                                      std::span<const double> ks, double T,
                                      const GreenOptions& opts) {
    if (ks.empty()) throw GreenError("green_family: no radii");
    const auto grid = uniform_time_grid(0.0, T, opts.dt);
    std::vector<GreenRecord> out;
    out.reserve(ks.size());
    for (double k : ks)
        out.push_back(solve_one(build_complex(flow, k, grid), k, bc, T, opts));
    check_nested(out);
    return out;
}

ProbeSet make_probe(const GreenRecord& smallest) {
    ProbeSet probe;
    const auto& cx = smallest.cx;
    const double h = cx.spacing;
    const double rim = smallest.k - h;  // one-cell collar
    std::vector<int> cell_to_grid;
    if (cx.layout == Layout::Planar) {
        cell_to_grid.assign(cx.cell_count(), -1);
        for (int g = 0; g < cx.grid.node_count(); ++g)
            if (cx.grid_to_cell[g] >= 0) cell_to_grid[cx.grid_to_cell[g]] = g;
    }
    for (std::size_t i = 0; i < cx.cell_count(); ++i) {
        if (cx.is_boundary[i] || cx.dist[0][i] > rim) continue;
        probe.ids.push_back(cx.layout == Layout::Radial
                                ? static_cast<int>(i)
                                : cell_to_grid[i]);
    }
    probe.t1 = smallest.source_time + 10.0 * h * h;
    for (std::size_t m = 0; m < smallest.field.times.size(); ++m)
        if (smallest.field.times[m] >= probe.t1 - 1e-12)
            probe.time_indices.push_back(m);
    if (probe.ids.empty() || probe.time_indices.empty())
        throw GreenError("make_probe: empty probe compact");
    return probe;
}

double probe_value(const GreenRecord& rec, int id, std::size_t time_index) {
    const int c = record_cell(rec, id);
    if (c < 0) throw GreenError("probe_value: probe point outside the ball");
    return rec.field.values[time_index][c];
}

double probe_sup_delta(const GreenRecord& a, const GreenRecord& b,
                       const ProbeSet& probe) {
    double sup = 0.0;
    for (std::size_t m : probe.time_indices)
        for (int id : probe.ids)
            sup = std::max(sup, std::abs(probe_value(a, id, m) -
                                         probe_value(b, id, m)));
    return sup;
}

std::vector<ConvergenceRow> exhaustion_convergence(
    const std::vector<GreenRecord>& neumann,
    const std::vector<GreenRecord>& dirichlet) {
    if (neumann.size() < 3 || neumann.size() != dirichlet.size())
        throw GreenError("exhaustion_convergence: need >= 3 matched radii");
    const ProbeSet probe = make_probe(neumann.front());
    std::vector<ConvergenceRow> rows;
    for (std::size_t i = 0; i < neumann.size(); ++i) {
        ConvergenceRow row;
        row.k = neumann[i].k;
        if (i + 1 < neumann.size()) {
            row.delta_neumann = probe_sup_delta(neumann[i + 1], neumann[i],
                                                probe);
            row.delta_dirichlet =
                probe_sup_delta(dirichlet[i + 1], dirichlet[i], probe);
        }
        row.gap = probe_sup_delta(neumann[i], dirichlet[i], probe);
        for (double m : neumann[i].mass_trace)
            row.mass_err = std::max(row.mass_err, std::abs(m - 1.0));
        rows.push_back(row);
    }
    return rows;
}

namespace {

struct Sample {
    double value;  // Z
    double r;      // g(0) distance to the source
    double tau;    // t - s
    double vol;    // V_y(sqrt(tau))
};

std::vector<Sample> collect_samples(const GreenRecord& rec,
                                    const FitSpec& spec) {
    if (spec.taus.empty())
        throw GreenError("fit_gaussian_bound: no sample times");
    const double h = rec.cx.spacing;
    std::vector<Sample> all;
    const auto d0 = rec.source_cell == rec.cx.base_cell
                        ? distance_to_base(rec.cx, rec.cx.times.front())
                        : distance_from_cell(rec.cx, rec.source_cell,
                                             rec.cx.times.front());
    for (double tau : spec.taus) {
        if (tau < 4.0 * h * h)
            throw GreenError("fit_gaussian_bound: unresolved sample time");
        const double t = rec.source_time + tau;
        const std::size_t m = rec.field.time_index(t);
        const double vol =
            ball_volume(rec.cx, rec.source_cell, std::sqrt(tau),
                        rec.cx.times.front())
                .volume;
        for (std::size_t i = 0; i < rec.cx.cell_count(); ++i)
            if (d0[i] <= spec.max_radius)
                all.push_back({rec.field.values[m][i], d0[i], tau, vol});
    }
    if (spec.stride > 1) {
        std::vector<Sample> sub;
        for (std::size_t j = static_cast<std::size_t>(spec.offset);
             j < all.size(); j += static_cast<std::size_t>(spec.stride))
            sub.push_back(all[j]);
        return sub;
    }
    return all;
}

double amplitude_for(const std::vector<Sample>& samples, double D) {
    double C = 0.0;
    for (const auto& s : samples)
        C = std::max(C, s.value * s.vol * std::exp(s.r * s.r / (D * s.tau)));
    return C;
}

}  // namespace

GaussianFit fit_gaussian_bound(const GreenRecord& rec, const FitSpec& spec) {
    const auto samples = collect_samples(rec, spec);
    if (spec.d_count < 2 || !(spec.d_max > spec.d_min) || !(spec.d_min > 0.0))
        throw GreenError("fit_gaussian_bound: bad decay grid");

    std::vector<double> ds(spec.d_count), cs(spec.d_count);
    const double lr = std::log(spec.d_max / spec.d_min);
    double c_min = std::numeric_limits<double>::infinity();
    for (int j = 0; j < spec.d_count; ++j) {
        ds[j] = spec.d_min * std::exp(lr * j / (spec.d_count - 1));
        cs[j] = amplitude_for(samples, ds[j]);
        c_min = std::min(c_min, cs[j]);
    }
    if (!std::isfinite(c_min) || c_min <= 0.0)
        throw GreenError("fit_gaussian_bound: degenerate amplitude");

    // C(D) is non-increasing and flattens once D exceeds the true decay
    // rate; report the smallest D whose amplitude is within the slack of
    // the minimum, so the fitted pair tracks the actual decay.
    GaussianFit fit;
    for (int j = 0; j < spec.d_count; ++j) {
        if (cs[j] <= spec.amplitude_slack * c_min) {
            fit.D = ds[j];
            fit.C = cs[j];
            break;
        }
    }
    fit.residual = gaussian_bound_excess(rec, fit, spec);
    return fit;
}

double gaussian_bound_excess(const GreenRecord& rec, const GaussianFit& fit,
                             const FitSpec& spec) {
    const auto samples = collect_samples(rec, spec);
    double excess = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples)
        excess = std::max(
            excess,
            s.value * s.vol * std::exp(s.r * s.r / (fit.D * s.tau)) - fit.C);
    return excess;
}

MassIntegrability mass_integrability_check(const GaussianFit& fit,
                                           const FlowCertificate& cert, int n,
                                           double T) {
    if (!(fit.C > 0.0) || !(fit.D > 0.0))
        throw GreenError("mass_integrability_check: invalid fit");
    const double cp = (n - 1) * std::sqrt(cert.k0 * T);
    const double D = fit.D;
    // substituted xi = u^2 so the integrand is smooth at the origin
    const auto f = [&](double u) {
        return 2.0 * u * std::exp(-u * u + cp * std::sqrt(D) * u);
    };
    // cut where the exponent is below -60
    const double X = 0.5 * (cp * std::sqrt(D) +
                            std::sqrt(cp * cp * D + 240.0)) + 8.0;
    const double i1 = integrate_gl(f, 0.0, X, 256);
    const double i2 = integrate_gl(f, 0.0, X, 512);
    if (!std::isfinite(i2))
        throw GreenError("mass_integrability_check: quadrature diverged");
    MassIntegrability out;
    out.C_T = fit.C * i2;
    out.quadrature_delta = std::abs(i1 - i2) / std::max(std::abs(i2), 1.0);
    return out;
}

SublinearVerdict sublinear_mass_check(const GreenRecord& rec,
                                      std::span<const double> radii) {
    const auto d0 = rec.source_cell == rec.cx.base_cell
                        ? distance_to_base(rec.cx, rec.cx.times.front())
                        : distance_from_cell(rec.cx, rec.source_cell,
                                             rec.cx.times.front());
    SublinearVerdict out;
    out.bounded = true;
    for (double R : radii) {
        SublinearRow row;
        row.R = R;
        for (std::size_t m = 1; m < rec.field.times.size(); ++m) {
            const std::size_t mc = rec.cx.time_index(rec.field.times[m]);
            std::vector<double> terms;
            for (std::size_t i = 0; i < rec.cx.cell_count(); ++i)
                if (d0[i] <= R)
                    terms.push_back(rec.field.values[m][i] *
                                    rec.cx.volume[mc][i]);
            row.max_mass = std::max(row.max_mass, kahan_sum(terms));
        }
        if (row.max_mass > 1.0 + 1e-10) out.bounded = false;
        out.profile.push_back(row);
    }
    return out;
}

}  // namespace ricci
