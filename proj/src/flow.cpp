#include "ricci/flow.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <random>

#include "ricci/numerics.hpp"

namespace ricci {

namespace {

constexpr double kTimeTol = 1e-9;

double sup_abs_curvature(const PlanarGrid& g, std::span<const double> w) {
    const auto R = conformal_curvature(g, w);
    double s = 0.0;
    for (double r : R) s = std::max(s, 0.5 * std::abs(r));  // K = R/2 in 2-D
    return s;
}

// 5-point graph Laplacian L = -Delta_0 on the full grid with zero exterior
// values (the models are flat outside the square).
Eigen::SparseMatrix<double> neg_laplacian(const PlanarGrid& g) {
    const int n = g.per_side;
    const double inv_h2 = 1.0 / (g.spacing * g.spacing);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(5 * g.node_count());
    for (int iy = 0; iy < n; ++iy) {
        for (int ix = 0; ix < n; ++ix) {
            const int i = g.index(ix, iy);
            trip.emplace_back(i, i, 4.0 * inv_h2);
            const int nbx[4] = {ix + 1, ix - 1, ix, ix};
            const int nby[4] = {iy, iy, iy + 1, iy - 1};
            for (int k = 0; k < 4; ++k)
                if (g.valid(nbx[k], nby[k]))
                    trip.emplace_back(i, g.index(nbx[k], nby[k]), -inv_h2);
        }
    }
    Eigen::SparseMatrix<double> L(g.node_count(), g.node_count());
    L.setFromTriplets(trip.begin(), trip.end());
    return L;
}

// One accepted implicit step of d/dt w = e^{-2w} Delta_0 w.  Fixed-point
// iteration on (diag(e^{2w_k}) + dt L) w_{k+1} = diag(e^{2w_k}) w_old; the
// accepted iterate satisfies |w - w_old - dt e^{-2w} Delta_0 w| <= tol.
bool implicit_step(const PlanarGrid& g, const Eigen::SparseMatrix<double>& L,
                   Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& solver,
                   const Eigen::VectorXd& w_old, double dt,
                   const FlowOptions& opts, Eigen::VectorXd& w_new) {
    const int nn = g.node_count();
    Eigen::VectorXd w = w_old;
    for (int it = 0; it < opts.max_inner; ++it) {
        Eigen::VectorXd e2w = (2.0 * w.array()).exp();
        Eigen::SparseMatrix<double> A = dt * L;
        for (int i = 0; i < nn; ++i) A.coeffRef(i, i) += e2w[i];
        solver.factorize(A);
        if (solver.info() != Eigen::Success) return false;
        Eigen::VectorXd rhs = e2w.cwiseProduct(w_old);
        Eigen::VectorXd w_next = solver.solve(rhs);
        const double delta = (w_next - w).lpNorm<Eigen::Infinity>();
        w = w_next;
        if (delta <= 0.1 * opts.inner_tol) {
            // residual of the accepted step, measured on the increment
            Eigen::VectorXd e2 = (2.0 * w.array()).exp();
            Eigen::VectorXd res =
                w - w_old + dt * (L * w).cwiseQuotient(e2);
            if (res.lpNorm<Eigen::Infinity>() <= opts.inner_tol) {
                w_new = w;
                return true;
            }
        }
    }
    return false;
}

FlowSolution evolve_conformal(const GeometryModel& model, double T,
                              const FlowOptions& opts) {
    FlowSolution f;
    f.model = model;
    f.direction = FlowDirection::Forward;
    f.grid = PlanarGrid::make(model.extent, model.spacing);
    const int nn = f.grid.node_count();

    Eigen::VectorXd w(nn);
    for (int iy = 0; iy < f.grid.per_side; ++iy)
        for (int ix = 0; ix < f.grid.per_side; ++ix)
            w[f.grid.index(ix, iy)] =
                model.conformal_w0(f.grid.x(ix), f.grid.y(iy));

    const auto L = neg_laplacian(f.grid);
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    {
        Eigen::SparseMatrix<double> A = L;
        for (int i = 0; i < nn; ++i) A.coeffRef(i, i) += 1.0;
        solver.analyzePattern(A);
    }

    auto push_slice = [&](double t, const Eigen::VectorXd& ws) {
        f.times.push_back(t);
        f.w.emplace_back(ws.data(), ws.data() + nn);
        const double k = sup_abs_curvature(f.grid, f.w.back());
        if (k > opts.blowup_guard)
            throw FlowError("evolve_forward: curvature blow-up guard tripped");
        f.sup_k.push_back(k);
    };
    push_slice(0.0, w);

    double t = 0.0;
    while (t < T - kTimeTol) {
        double dt = std::min(opts.dt, T - t);
        Eigen::VectorXd w_new(nn);
        int halvings = 0;
        while (!implicit_step(f.grid, L, solver, w, dt, opts, w_new)) {
            if (++halvings > opts.max_halvings)
                throw FlowError(
                    "evolve_forward: nonlinear step failed to converge");
            dt *= 0.5;
        }
        t += dt;
        w = w_new;
        push_slice(t, w);
    }
    f.times.back() = T;  // guard against accumulated round-off
    return f;
}

}  // namespace

double FlowSolution::sup_rm() const {
    double s = 0.0;
    for (double k : sup_k) s = std::max(s, k);
    return s;
}

double FlowSolution::w_at(double x, double y, double t) const {
    if (!planar())
        throw FlowError("w_at: not a planar (conformal) flow solution");
    // bracketing time slices, linear in t
    if (t < times.front() - kTimeTol || t > times.back() + kTimeTol)
        throw FlowError("w_at: time outside the flow interval");
    std::size_t m = 0;
    double a = 0.0;
    if (times.size() > 1) {
        while (m + 2 < times.size() && times[m + 1] <= t) ++m;
        a = std::clamp((t - times[m]) / (times[m + 1] - times[m]), 0.0, 1.0);
    }

    // bilinear in space; flat (w = 0) outside the grid
    const double gx = (x + grid.half_width) / grid.spacing;
    const double gy = (y + grid.half_width) / grid.spacing;
    const int ix = static_cast<int>(std::floor(gx));
    const int iy = static_cast<int>(std::floor(gy));
    const double fx = gx - ix, fy = gy - iy;
    auto node = [&](int jx, int jy) -> double {
        if (!grid.valid(jx, jy)) return 0.0;
        const int i = grid.index(jx, jy);
        return times.size() == 1 ? w[0][i]
                                 : (1.0 - a) * w[m][i] + a * w[m + 1][i];
    };
    return (1.0 - fx) * (1.0 - fy) * node(ix, iy) +
           fx * (1.0 - fy) * node(ix + 1, iy) +
           (1.0 - fx) * fy * node(ix, iy + 1) + fx * fy * node(ix + 1, iy + 1);
}

double FlowSolution::scale_at(double t) const {
    if (model.kind != ModelKind::SphereBackwardFlow)
        return 1.0;
    if (t < times.front() - kTimeTol || t > times.back() + kTimeTol)
        throw FlowError("scale_at: time outside the flow interval");
    if (times.size() == 1) return scale[0];
    std::size_t m = 0;
    while (m + 2 < times.size() && times[m + 1] <= t) ++m;
    const double a =
        std::clamp((t - times[m]) / (times[m + 1] - times[m]), 0.0, 1.0);
    return (1.0 - a) * scale[m] + a * scale[m + 1];
}

FlowSolution FlowSolution::still(const GeometryModel& model) {
    FlowSolution f;
    f.model = model;
    f.direction = FlowDirection::Forward;
    f.times = {0.0};
    switch (model.kind) {
        case ModelKind::SphereBackwardFlow:
            f.scale = {1.0};
            f.sup_k = {1.0 / (model.sphere_radius * model.sphere_radius)};
            break;
        case ModelKind::FlatEuclidean:
            if (model.layout == Layout::Radial) {
                f.sup_k = {0.0};
                break;
            }
            [[fallthrough]];
        case ModelKind::ConformalPlaneFlow:
        case ModelKind::PrescribedFamily: {
            f.grid = PlanarGrid::make(model.extent, model.spacing);
            std::vector<double> w0(f.grid.node_count(), 0.0);
            for (int iy = 0; iy < f.grid.per_side; ++iy)
                for (int ix = 0; ix < f.grid.per_side; ++ix) {
                    const double x = f.grid.x(ix), y = f.grid.y(iy);
                    if (model.kind == ModelKind::ConformalPlaneFlow)
                        w0[f.grid.index(ix, iy)] = model.conformal_w0(x, y);
                    else if (model.kind == ModelKind::PrescribedFamily)
                        w0[f.grid.index(ix, iy)] = model.prescribed_w(x, y, 0.0);
                }
            f.sup_k = {sup_abs_curvature(f.grid, w0)};
            f.w = {std::move(w0)};
            break;
        }
    }
    return f;
}

FlowSolution evolve_forward(const GeometryModel& model, double T,
                            const FlowOptions& opts) {
    if (!(T > 0.0)) throw FlowError("evolve_forward: non-positive duration");
    switch (model.kind) {
        case ModelKind::FlatEuclidean: {
            FlowSolution f = FlowSolution::still(model);
            f.times = uniform_time_grid(0.0, T, opts.dt);
            if (f.planar()) f.w.assign(f.times.size(), f.w[0]);
            f.sup_k.assign(f.times.size(), 0.0);
            return f;
        }
        case ModelKind::SphereBackwardFlow: {
            // forward (shrinking) round solution: scale 1 - t, gone at t = 1
            if (T >= 1.0)
                throw FlowError("evolve_forward: sphere extinct before T");
            FlowSolution f;
            f.model = model;
            f.direction = FlowDirection::Forward;
            f.times = uniform_time_grid(0.0, T, opts.dt);
            const double K0 =
                1.0 / (model.sphere_radius * model.sphere_radius);
            for (double t : f.times) {
                f.scale.push_back(1.0 - t);
                f.sup_k.push_back(K0 / (1.0 - t));
            }
            return f;
        }
        case ModelKind::ConformalPlaneFlow:
            return evolve_conformal(model, T, opts);
        case ModelKind::PrescribedFamily: {
            FlowSolution f;
            f.model = model;
            f.direction = FlowDirection::Forward;
            f.grid = PlanarGrid::make(model.extent, model.spacing);
            f.times = uniform_time_grid(0.0, T, opts.dt);
            for (double t : f.times) {
                std::vector<double> ws(f.grid.node_count());
                for (int iy = 0; iy < f.grid.per_side; ++iy)
                    for (int ix = 0; ix < f.grid.per_side; ++ix)
                        ws[f.grid.index(ix, iy)] =
                            model.prescribed_w(f.grid.x(ix), f.grid.y(iy), t);
                f.sup_k.push_back(sup_abs_curvature(f.grid, ws));
                f.w.push_back(std::move(ws));
            }
            return f;
        }
    }
    throw FlowError("evolve_forward: unknown model kind");
}

FlowSolution reverse(const FlowSolution& flow) {
    FlowSolution r = flow;
    r.direction = flow.direction == FlowDirection::Forward
                      ? FlowDirection::Backward
                      : FlowDirection::Forward;
    const double T = flow.times.back();
    r.times.clear();
    for (auto it = flow.times.rbegin(); it != flow.times.rend(); ++it)
        r.times.push_back(T - *it);
    std::reverse(r.w.begin(), r.w.end());
    std::reverse(r.scale.begin(), r.scale.end());
    std::reverse(r.sup_k.begin(), r.sup_k.end());
    return r;
}

FlowCertificate certify(const FlowSolution& flow, std::uint64_t seed,
                        int samples) {
    if (flow.times.empty()) throw CertificationError("certify: empty flow");
    FlowCertificate cert;
    cert.n = flow.model.dim;
    cert.T = flow.duration();
    cert.k0 = flow.sup_rm();
    cert.alpha3 = 2.0 * (cert.n - 1) * cert.k0;
    cert.metric_factor = std::exp(cert.alpha3 * cert.T);
    cert.distance_factor = std::exp(0.5 * cert.alpha3 * cert.T);
    cert.volume_factor = std::exp(0.5 * cert.n * cert.alpha3 * cert.T);

    const std::size_t nt = flow.times.size();
    if (nt < 2 || samples <= 0) return cert;

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick_t(0, nt - 1);
    const bool planar = flow.planar();
    const std::size_t nn =
        planar ? static_cast<std::size_t>(flow.grid.node_count()) : 1;
    std::uniform_int_distribution<std::size_t> pick_x(0, nn - 1);

    // distance rows at a few time slices for the (1.8) band
    std::vector<std::size_t> dslices;
    std::vector<std::vector<double>> drows;
    if (planar) {
        const std::size_t nslices = std::min<std::size_t>(nt, 7);
        for (std::size_t k = 0; k < nslices; ++k) {
            const std::size_t m = k * (nt - 1) / (nslices - 1);
            if (!dslices.empty() && dslices.back() == m) continue;
            dslices.push_back(m);
            drows.push_back(
                grid_distances(flow.grid, flow.w[m], flow.grid.center_index()));
        }
    }

    // discretization slack: per-step solver residuals accumulate along the
    // telescoped band comparison
    const double slack = 1e-7;
    auto fail = [&](const char* band, std::size_t i, double t, double s,
                    double ratio, double bound) {
        throw CertificationError(
            std::string("certify: ") + band + " band violated at node " +
            std::to_string(i) + ", (t, s) = (" + std::to_string(t) + ", " +
            std::to_string(s) + "): ratio " + std::to_string(ratio) +
            " vs bound " + std::to_string(bound));
    };

    for (int k = 0; k < samples; ++k) {
        std::size_t ma = pick_t(rng), mb = pick_t(rng);
        if (ma > mb) std::swap(ma, mb);
        const double s = flow.times[ma], t = flow.times[mb];
        const std::size_t i = pick_x(rng);

        // (1.7): metric ratio g(t)/g(s) against e^{+-alpha3 |t-s|}
        double log_ratio;
        if (planar)
            log_ratio = 2.0 * (flow.w[mb][i] - flow.w[ma][i]);
        else if (flow.model.kind == ModelKind::SphereBackwardFlow)
            log_ratio = std::log(flow.scale[mb] / flow.scale[ma]);
        else
            log_ratio = 0.0;
        const double mbound = cert.alpha3 * (t - s) + slack;
        if (std::abs(log_ratio) > mbound)
            fail("metric", i, t, s, std::exp(log_ratio), std::exp(mbound));

        // (1.9): volume-element ratio against e^{+-(n alpha3/2)|t-s|}
        const double vol_log = 0.5 * cert.n * log_ratio;
        if (std::abs(vol_log) > 0.5 * cert.n * cert.alpha3 * (t - s) + slack)
            fail("volume", i, t, s, std::exp(vol_log), cert.volume_factor);
    }

    // (1.8): r_t/r_0 within e^{+-alpha3 T/2} on the sampled distance rows
    if (planar) {
        for (std::size_t kslice = 1; kslice < dslices.size(); ++kslice) {
            const double t = flow.times[dslices[kslice]];
            const double bound = 0.5 * cert.alpha3 * t + slack;
            for (std::size_t i = 0; i < nn; ++i) {
                if (drows[0][i] < flow.grid.spacing) continue;
                const double lr = std::log(drows[kslice][i] / drows[0][i]);
                if (std::abs(lr) > bound)
                    fail("distance", i, t, 0.0, std::exp(lr),
                         std::exp(bound));
            }
        }
    } else if (flow.model.kind == ModelKind::SphereBackwardFlow) {
        for (std::size_t m = 1; m < nt; ++m) {
            const double lr = 0.5 * std::log(flow.scale[m] / flow.scale[0]);
            if (std::abs(lr) > 0.5 * cert.alpha3 * flow.times[m] + slack)
                fail("distance", 0, flow.times[m], 0.0, std::exp(lr),
                     cert.distance_factor);
        }
    }

    cert.samples_checked = static_cast<std::uint64_t>(samples);
    return cert;
}

RateCheckResult volume_element_rate_check(const FlowSolution& flow, double t) {
    const std::size_t nt = flow.times.size();
    std::size_t m = nt;
    for (std::size_t k = 0; k < nt; ++k)
        if (std::abs(flow.times[k] - t) <= kTimeTol * std::max(1.0, std::abs(t)))
            m = k;
    if (m == 0 || m >= nt - 1)
        throw FlowError("volume_element_rate_check: t must be interior");

    const FlowCertificate cert = certify(flow, 1, 0);
    const double band = 0.5 * cert.n * cert.alpha3;
    // backward flows gain volume at rate R dV; forward flows lose it
    const double sign =
        flow.direction == FlowDirection::Backward ? 1.0 : -1.0;
    const double dt_m = flow.times[m] - flow.times[m - 1];
    const double dt_p = flow.times[m + 1] - flow.times[m];

    RateCheckResult out;
    auto account = [&](double rate_over_V, double R) {
        out.residual = std::max(out.residual, std::abs(rate_over_V - sign * R));
        out.band_margin =
            std::max(out.band_margin,
                     band > 0.0 ? std::abs(rate_over_V) / band : 0.0);
        if (std::abs(rate_over_V) > band * (1.0 + 1e-6) + 1e-12)
            throw CertificationError(
                "volume_element_rate_check: rate outside the certified band");
    };

    if (flow.planar()) {
        const auto Rrow = conformal_curvature(flow.grid, flow.w[m]);
        for (int i = 0; i < flow.grid.node_count(); ++i) {
            // nonuniform centered difference of V_i = e^{2w} h^2, relative
            const double vm = std::exp(2.0 * flow.w[m - 1][i]);
            const double v0 = std::exp(2.0 * flow.w[m][i]);
            const double vp = std::exp(2.0 * flow.w[m + 1][i]);
            const double rate =
                (dt_m * dt_m * vp - dt_p * dt_p * vm -
                 (dt_m * dt_m - dt_p * dt_p) * v0) /
                (dt_m * dt_p * (dt_m + dt_p));
            account(rate / v0, Rrow[i]);
        }
    } else if (flow.model.kind == ModelKind::SphereBackwardFlow) {
        const double vm = flow.scale[m - 1], v0 = flow.scale[m],
                     vp = flow.scale[m + 1];
        const double rate = (dt_m * dt_m * vp - dt_p * dt_p * vm -
                             (dt_m * dt_m - dt_p * dt_p) * v0) /
                            (dt_m * dt_p * (dt_m + dt_p));
        const double R =
            2.0 / (flow.model.sphere_radius * flow.model.sphere_radius * v0);
        account(rate / v0, R);
    }
    return out;
}

}  // namespace ricci
