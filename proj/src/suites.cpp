#include "ricci/suites.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <thread>

#include "ricci/convseq.hpp"
#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"
#include "ricci/green.hpp"
#include "ricci/heat.hpp"
#include "ricci/maxprin.hpp"
#include "ricci/numerics.hpp"
#include "ricci/oracles.hpp"

namespace ricci {

bool SuiteResult::pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

namespace {

struct Checker {
    std::vector<CheckResult>& out;
    double tol_scale;

    void upper(std::string name, double measured, double required,
               bool scaled = true) {
        CheckResult c;
        c.name = std::move(name);
        c.measured = measured;
        c.required = scaled ? required * tol_scale : required;
        c.pass = c.measured <= c.required;
        out.push_back(std::move(c));
    }

    void lower(std::string name, double measured, double required,
               bool scaled = true) {
        CheckResult c;
        c.name = std::move(name);
        c.measured = measured;
        c.required = scaled ? required / tol_scale : required;
        c.lower_bound = true;
        c.pass = c.measured >= c.required;
        out.push_back(std::move(c));
    }
};

GeometryModel bump_model(double half_width, double spacing) {
    return GeometryModel::conformal(
        [](double x, double y) {
            const double r2 = x * x + y * y;
            return 0.1 * std::exp(-r2) *
                   cubic_ramp(2.0 * (std::sqrt(r2) - 1.0));
        },
        half_width, spacing);
}

double max_mass_err(const GreenRecord& rec) {
    double err = 0.0;
    for (double m : rec.mass_trace) err = std::max(err, std::abs(m - 1.0));
    return err;
}

void run_parallel(int jobs, int count, const std::function<void(int)>& work) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex mx;
    int next = 0;
    const int n = std::min(jobs, count);
    for (int t = 0; t < n; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard lock(mx);
                    if (next >= count) return;
                    i = next++;
                }
                work(i);
            }
        });
    for (auto& th : pool) th.join();
}

// ---------------------------------------------------------------- mass --

SuiteResult mass_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "mass";
    Checker ck{res.checks, o.tol_scale};
    Csv csv;
    csv.columns = {"geometry", "max_mass_err"};

    auto record = [&](const std::string& name, const GreenRecord& rec) {
        const double err = max_mass_err(rec);
        csv.rows.push_back({name, format_g17(err)});
        ck.upper("unit mass on " + name, err, 1e-10);
    };

    GreenOptions fine;
    fine.dt = 0.0025;
    record("flat disk",
           green_family(GeometryModel::flat(2, 2.0, 1.0 / 64),
                        BoundaryKind::Neumann, std::vector<double>{2.0}, 0.25,
                        fine)[0]);
    GreenOptions sp;
    sp.dt = 0.005;
    record("round background",
           green_family(GeometryModel::sphere(M_SQRT2, 1.0 / 32),
                        BoundaryKind::Neumann,
                        std::vector<double>{M_PI * M_SQRT2}, 1.0, sp)[0]);
    const auto back = reverse(evolve_forward(bump_model(2.4, 1.0 / 16), 0.1));
    record("evolving bump",
           green_family(back, BoundaryKind::Neumann, std::vector<double>{2.0},
                        0.1, fine)[0]);

    res.artifacts.emplace_back("mass", std::move(csv));
    return res;
}

// -------------------------------------------------------------- oracle --

struct OracleParams {
    double spacing = 1.0 / 64;
    double extent = 2.5;
    double horizon = 0.25;
    double theta = 0.5;
    std::vector<double> taus;  // empty = default ladder from 4 h^2 up
    double rel_tol = 0.02;
};

void oracle_kernel_checks(Checker& ck, SuiteResult& res,
                          const OracleParams& p) {
    const double h = p.spacing;
    const auto model = GeometryModel::flat(2, p.extent, h);
    const auto grid =
        graded_time_grid(0.0, p.horizon, h * h / 8.0, 0.002, 1.08);
    const auto cx = build_complex(model, p.extent, grid);
    SolveOptions so;
    so.theta = p.theta;
    const auto field = solve_conjugate_forward(
        cx, cx.base_cell, 0.0, BoundaryKind::Neumann, p.horizon, so);
    std::vector<double> taus = p.taus;
    if (taus.empty())
        taus = {4 * h * h, 10 * h * h, 0.01, 0.05, 0.1, p.horizon};
    Csv csv;
    csv.columns = {"tau", "sup_rel_err"};
    double worst = 0.0;
    for (double target : taus) {
        std::size_t m = 0;
        for (std::size_t j = 0; j < field.times.size(); ++j)
            if (std::abs(field.times[j] - target) <
                std::abs(field.times[m] - target))
                m = j;
        const double tau = field.times[m];
        if (tau <= 0.0) continue;
        double sup_truth = 0.0, sup_err = 0.0;
        for (std::size_t i = 0; i < cx.cell_count(); ++i) {
            if (cx.dist[0][i] > p.extent - h) continue;
            const double truth = flat_heat_kernel(2, cx.dist[0][i], tau);
            sup_truth = std::max(sup_truth, truth);
            sup_err =
                std::max(sup_err, std::abs(field.values[m][i] - truth));
        }
        const double rel = sup_err / sup_truth;
        worst = std::max(worst, rel);
        csv.rows.push_back({format_g17(tau), format_g17(rel)});
    }
    ck.upper("free-space kernel sup-relative error", worst, p.rel_tol);
    res.artifacts.emplace_back("oracle_kernel", std::move(csv));
}

void oracle_dense_checks(Checker& ck) {
    // sparse stepping against the dense propagator, first order in dt
    const auto make = [](double dt) {
        return build_complex(GeometryModel::flat(2, 0.5, 1.0 / 8), 0.4,
                             uniform_time_grid(0.0, 0.1, dt));
    };
    const auto cx0 = make(0.01);
    const auto exact = dense_heat_solve(cx0, BoundaryKind::Neumann,
                                        discrete_delta(cx0, 0, 0.0), 0.1);
    auto err = [&](double dt) {
        const auto c = make(dt);
        const auto f =
            solve_conjugate_forward(c, 0, 0.0, BoundaryKind::Neumann, 0.1);
        double e = 0.0;
        for (std::size_t i = 0; i < exact.size(); ++i)
            e = std::max(e, std::abs(f.values.back()[i] - exact[i]));
        return e;
    };
    const double e1 = err(0.01), e2 = err(0.005);
    ck.lower("step-halving error ratio vs dense propagator", e1 / e2, 1.8);
    ck.upper("dense-propagator error at dt=0.005", e2, 0.05);
}

SuiteResult oracle_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "oracle";
    Checker ck{res.checks, o.tol_scale};
    oracle_kernel_checks(ck, res, OracleParams{});
    oracle_dense_checks(ck);
    return res;
}

// --------------------------------------------------------------- green --

void green_geometry(Checker& ck, SuiteResult& res, const std::string& name,
                    const std::vector<GreenRecord>& zs,
                    const std::vector<GreenRecord>& gs) {
    const auto probe = make_probe(zs.front());
    double mono = 0.0, dom = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i)
        for (std::size_t m : probe.time_indices)
            for (int id : probe.ids) {
                if (i + 1 < zs.size())
                    mono = std::max(mono, probe_value(gs[i], id, m) -
                                              probe_value(gs[i + 1], id, m));
                dom = std::max(dom, probe_value(gs[i], id, m) -
                                        probe_value(zs[i], id, m));
            }
    const auto rows = exhaustion_convergence(zs, gs);
    double inc = -1e300, mass_err = 0.0;
    for (std::size_t i = 0; i + 2 < rows.size(); ++i) {
        inc = std::max(inc, rows[i + 1].delta_neumann - rows[i].delta_neumann);
        inc = std::max(inc,
                       rows[i + 1].delta_dirichlet - rows[i].delta_dirichlet);
    }
    for (const auto& row : rows) mass_err = std::max(mass_err, row.mass_err);

    ck.upper(name + ": monotone in the ball", mono, 1e-10);
    ck.upper(name + ": bounded by the Neumann kernel", dom, 1e-10);
    ck.upper(name + ": shrinking deltas", inc, 0.0, false);
    ck.upper(name + ": final gap", rows.back().gap, 1e-3);
    ck.upper(name + ": unit mass", mass_err, 1e-10);

    Csv csv;
    csv.columns = {"k", "delta_neumann", "delta_dirichlet", "gap", "mass_err"};
    for (const auto& row : rows)
        csv.rows.push_back({format_g17(row.k), format_g17(row.delta_neumann),
                            format_g17(row.delta_dirichlet),
                            format_g17(row.gap), format_g17(row.mass_err)});
    res.artifacts.emplace_back("green_" + name, std::move(csv));
}

SuiteResult green_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "green";
    Checker ck{res.checks, o.tol_scale};
    const std::vector<double> ks{1.0, 2.0, 3.0, 4.0};

    GreenOptions go;
    go.dt = 0.0025;
    const auto flat = GeometryModel::flat(2, 4.5, 1.0 / 64);
    green_geometry(ck, res, "flat",
                   green_family(flat, BoundaryKind::Neumann, ks, 0.5, go),
                   green_family(flat, BoundaryKind::Dirichlet, ks, 0.5, go));

    const auto back = reverse(evolve_forward(bump_model(4.2, 1.0 / 16), 0.1));
    green_geometry(ck, res, "bump",
                   green_family(back, BoundaryKind::Neumann, ks, 0.1, go),
                   green_family(back, BoundaryKind::Dirichlet, ks, 0.1, go));
    return res;
}

// ------------------------------------------------------------- maxprin --

struct MaxPrinGeometry {
    std::string name;
    DiscreteComplex cx;
    FlowCertificate cert;
    double lambda = 1.0;
    double horizon = 0.0;
    double alpha1 = 0.4;
    double alpha2 = 0.8;
    int seeds = 20;
};

void maxprin_arithmetic(Checker& ck) {
    // the window / constant formulas, checked exactly
    const auto tiny =
        build_complex(GeometryModel::flat(2, 1.5, 1.0 / 8), 1.5, {0.0});
    FlowCertificate c;
    c.n = 2;
    c.T = 0.0;
    c.alpha3 = std::log(9.0 / 8.0);
    CoefficientData zero;
    const auto cut = build_cutoff(tiny, c, zero, 1.0, 1.0);
    ck.upper("window formula example", std::abs(cut.eta - 0.125), 0.0, false);
    FlowCertificate c1;
    c1.n = 2;
    c1.T = 1.0;
    const auto cut0 = build_cutoff(tiny, c1, zero, 1.0, 1.0);
    ck.upper("zero-bounds energy constant", std::abs(cut0.C1), 0.0, false);
    CoefficientData unit;
    unit.alpha1 = 1.0;
    unit.alpha2 = 1.0;
    FlowCertificate cu;
    cu.n = 2;
    cu.T = 0.0;
    cu.alpha3 = 1.0;
    const auto cut7 = build_cutoff(tiny, cu, unit, 1.0, 1.0);
    ck.upper("unit-bounds energy constant", std::abs(cut7.C1 - 7.0), 0.0,
             false);
}

void maxprin_geometry(Checker& ck, Csv& csv, const SuiteOptions& o,
                      const MaxPrinGeometry& geo) {
    struct Row {
        double max_u, margin, scale, growth;
    };
    std::vector<Row> rows(geo.seeds);
    run_parallel(o.jobs, geo.seeds, [&](int j) {
        const std::uint64_t seed = o.seed + static_cast<std::uint64_t>(j);
        const auto inst =
            random_instance(seed, geo.cx, geo.alpha1, geo.alpha2);
        const auto field = solve_linear_parabolic(
            geo.cx, inst.coeffs, inst.u0, inst.forcing(),
            BoundaryKind::Neumann, 0.0, geo.horizon);
        const auto cut =
            build_cutoff(geo.cx, geo.cert, inst.coeffs, geo.lambda, 1.0);
        const auto rep = energy_inequality_check(geo.cx, field, cut);
        rows[j] = {check_conclusion(field), rep.margin, rep.scale,
                   growth_condition_value(geo.cx, field, geo.lambda)};
        if (!o.out_dir.empty() && rows[j].max_u > 1e-8 * o.tol_scale)
            write_field_dump(std::filesystem::path(o.out_dir) /
                                 (geo.name + "_seed" + std::to_string(seed) +
                                  ".rcfd"),
                             field);
    });
    double worst_u = -1e300, worst_margin = -1e300;
    for (int j = 0; j < geo.seeds; ++j) {
        worst_u = std::max(worst_u, rows[j].max_u);
        worst_margin =
            std::max(worst_margin,
                     rows[j].margin / (geo.cx.spacing * rows[j].scale));
        csv.rows.push_back(
            {geo.name, std::to_string(o.seed + static_cast<std::uint64_t>(j)),
             format_g17(rows[j].max_u), format_g17(rows[j].margin),
             format_g17(rows[j].growth)});
    }
    ck.upper(geo.name + ": max u over seeds", worst_u, 1e-8);
    ck.upper(geo.name + ": energy margin (spacing-scaled)", worst_margin, 1.0);
}

Csv maxprin_csv() {
    Csv csv;
    csv.columns = {"geometry", "seed", "max_u", "energy_margin",
                   "growth_value"};
    return csv;
}

SuiteResult maxprin_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "maxprin";
    Checker ck{res.checks, o.tol_scale};
    maxprin_arithmetic(ck);

    std::vector<MaxPrinGeometry> geos;
    {
        MaxPrinGeometry g;
        g.name = "flat_radial";
        g.horizon = 0.375;
        g.cx = build_complex(GeometryModel::flat(2, 2.0, 1.0 / 32), 2.0,
                             uniform_time_grid(0.0, g.horizon, 0.005));
        g.cert.n = 2;
        g.cert.T = g.horizon;
        geos.push_back(std::move(g));
    }
    {
        MaxPrinGeometry g;
        g.name = "flat_planar";
        g.horizon = 0.375;
        g.cx = build_complex(
            GeometryModel::flat(2, 2.0, 1.0 / 16, Layout::Planar), 2.0,
            uniform_time_grid(0.0, g.horizon, 0.005));
        g.cert.n = 2;
        g.cert.T = g.horizon;
        geos.push_back(std::move(g));
    }
    {
        MaxPrinGeometry g;
        g.name = "evolving_bump";
        g.horizon = 0.1;
        const auto back =
            reverse(evolve_forward(bump_model(2.4, 1.0 / 16), 0.1));
        g.cert = certify(back);
        g.cx = build_complex(back, 2.2,
                             uniform_time_grid(0.0, g.horizon, 0.0025));
        g.lambda = 2.0;
        geos.push_back(std::move(g));
    }

    Csv csv = maxprin_csv();
    for (const auto& geo : geos) maxprin_geometry(ck, csv, o, geo);
    res.artifacts.emplace_back("maxprin_seeds", std::move(csv));
    return res;
}

// ------------------------------------------------------------ gaussian --

struct GaussianWindows {
    double d_lo = 3.6, d_hi = 4.4;
    double c_lo = 0.23, c_hi = 0.28;
};

void gaussian_checks(Checker& ck, SuiteResult& res, const GreenRecord& rec,
                     const FitSpec& spec, const GaussianWindows& win,
                     double k0, double T) {
    const auto fit = fit_gaussian_bound(rec, spec);
    ck.upper("fitted decay rate low side", win.d_lo - fit.D, 0.0, false);
    ck.upper("fitted decay rate high side", fit.D - win.d_hi, 0.0, false);
    ck.upper("fitted amplitude low side", win.c_lo - fit.C, 0.0, false);
    ck.upper("fitted amplitude high side", fit.C - win.c_hi, 0.0, false);
    ck.upper("fit residual", fit.residual, 0.0, false);

    FitSpec train = spec;
    train.stride = 2;
    auto inflated = fit_gaussian_bound(rec, train);
    inflated.C *= 1.05;
    FitSpec held = train;
    held.offset = 1;
    ck.upper("held-out excess under 5% inflation",
             gaussian_bound_excess(rec, inflated, held), 0.0, false);

    FlowCertificate cert;
    cert.k0 = k0;
    const auto mi = mass_integrability_check(fit, cert, 2, T);
    ck.upper("majorant quadrature self-agreement", mi.quadrature_delta, 1e-8);
    ck.lower("majorant value finite and positive",
             std::isfinite(mi.C_T) ? mi.C_T : -1.0, 0.0, false);

    Csv csv;
    csv.columns = {"C", "D", "residual", "C_T", "quadrature_delta"};
    csv.rows.push_back({format_g17(fit.C), format_g17(fit.D),
                        format_g17(fit.residual), format_g17(mi.C_T),
                        format_g17(mi.quadrature_delta)});
    res.artifacts.emplace_back("gaussian_fit", std::move(csv));
}

SuiteResult gaussian_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "gaussian";
    Checker ck{res.checks, o.tol_scale};

    GreenOptions go;
    go.dt = 0.0025;
    go.theta = 0.5;
    const auto rec =
        std::move(green_family(GeometryModel::flat(2, 3.0, 1.0 / 32),
                               BoundaryKind::Neumann,
                               std::vector<double>{2.5}, 0.25, go)[0]);
    FitSpec spec;
    spec.taus = {0.05, 0.1, 0.15, 0.2, 0.25};
    spec.max_radius = 2.0;
    gaussian_checks(ck, res, rec, spec, GaussianWindows{}, 1.0, 0.25);
    return res;
}

// -------------------------------------------------------------- volume --

SuiteResult volume_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "volume";
    Checker ck{res.checks, o.tol_scale};

    double closed = 0.0;
    for (double r : {0.25, 0.5, 1.0, 2.0, 3.0})
        closed = std::max(closed, std::abs(comparison_volume(1.0, 2, r) -
                                           (std::cosh(r) - 1.0)));
    ck.upper("comparison volume closed form", closed, 1e-10);

    Csv csv;
    csv.columns = {"geometry", "r", "tau", "lhs", "rhs"};
    double worst = 0.0;
    auto sample = [&](const std::string& name, const DiscreteComplex& cx,
                      double k0, double T) {
        for (double r : {0.3, 0.6, 1.0, 1.5})
            for (double tau : {0.04, 0.09}) {
                const auto rb =
                    comparison_ratio_bound(cx, cx.base_cell, r, tau, k0, T);
                if (rb.under_resolved) continue;
                worst = std::max(worst, rb.lhs / rb.rhs);
                csv.rows.push_back({name, format_g17(r), format_g17(tau),
                                    format_g17(rb.lhs), format_g17(rb.rhs)});
            }
    };

    sample("flat",
           build_complex(GeometryModel::flat(2, 2.0, 1.0 / 64), 2.0, {0.0}),
           1e-8, 0.25);
    const auto back = reverse(evolve_forward(bump_model(2.4, 1.0 / 16), 0.1));
    const auto cert = certify(back);
    sample("bump", build_complex(back, 2.2, uniform_time_grid(0.0, 0.1, 0.01)),
           std::max(cert.k0, 1e-8), 0.1);
    // sphere backward flow is closed form; build from the model directly
    const auto smodel = GeometryModel::sphere(M_SQRT2, 1.0 / 64);
    const auto scert = certify(reverse(evolve_forward(smodel, 0.5)));
    sample("round",
           build_complex(smodel, 2.0, uniform_time_grid(0.0, 0.5, 0.01)),
           std::max(scert.k0, 1e-8), 0.5);

    ck.upper("measured/comparison volume ratio", worst, 1.01);
    res.artifacts.emplace_back("volume_ratios", std::move(csv));
    return res;
}

// ------------------------------------------------------------- convseq --

struct ConvSeqParams {
    SequenceSpec spec;
    int count = 6;
    double ball = 1.8;
    double dt = 0.005;
    double tau_lo = 0.05;
    double tau_hi = 0.25;
    double delta_tol = 1e-3;
};

void convseq_checks(Checker& ck, SuiteResult& res, const ConvSeqParams& p) {
    const auto seq = build_sequence(p.spec, p.count);
    GreenOptions go;
    go.dt = p.dt;
    const auto ks = solve_sequence_kernels(seq, p.ball, go);
    const auto rows =
        compare_on_compact(ks, p.spec.probe_radius, p.tau_lo, p.tau_hi);

    double inc = -1e300, mass_err = max_mass_err(ks.limit);
    for (std::size_t j = 1; j < rows.size(); ++j)
        inc = std::max(inc, rows[j].delta - rows[j - 1].delta);
    for (const auto& rec : ks.members)
        mass_err = std::max(mass_err, max_mass_err(rec));
    ck.upper("deltas non-increasing", inc, 0.0, false);
    ck.upper("final delta", rows.back().delta, p.delta_tol);
    ck.upper("unit mass across the sequence", mass_err, 1e-10);

    auto psi = [](double x, double y) {
        return cubic_ramp(2.0 * (std::hypot(x, y) - 0.5));
    };
    double weak = -1e300;
    auto weak_worst = [&](const GreenRecord& rec) {
        for (const auto& row : weak_identity_check(rec, psi, -p.spec.alpha))
            weak = std::max(weak, row.lhs - row.bound * (1.0 + 1e-9));
    };
    weak_worst(ks.limit);
    for (const auto& rec : ks.members) weak_worst(rec);
    ck.upper("end-condition pairing bound", weak, 1e-12, false);

    FitSpec fs;
    fs.taus = {0.1, 0.15, 0.2};
    fs.max_radius = 0.9;
    const auto flim = fit_gaussian_bound(ks.limit, fs);
    double cmax = 0.0;
    std::vector<GaussianFit> fits;
    for (const auto& rec : ks.members) {
        fits.push_back(fit_gaussian_bound(rec, fs));
        cmax = std::max(cmax, fits.back().C);
    }
    ck.upper("fitted amplitudes uniform over the sequence", cmax / flim.C,
             2.0, false);

    Csv csv;
    csv.columns = {"k",     "eps",   "A",        "chart_c0", "chart_c2",
                   "delta", "ratio", "mass_err", "fit_C",    "fit_D"};
    for (std::size_t j = 0; j < rows.size(); ++j)
        csv.rows.push_back(
            {std::to_string(rows[j].k), format_g17(seq.eps[j]),
             format_g17(seq.cutoffs[j]), format_g17(seq.chart_c0[j]),
             format_g17(seq.chart_c2[j]), format_g17(rows[j].delta),
             format_g17(rows[j].ratio),
             format_g17(max_mass_err(ks.members[j])), format_g17(fits[j].C),
             format_g17(fits[j].D)});
    res.artifacts.emplace_back("convseq", std::move(csv));
}

SuiteResult convseq_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "convseq";
    Checker ck{res.checks, o.tol_scale};

    ConvSeqParams p;
    p.spec.limit = GeometryModel::conformal(
        [](double x, double y) {
            const double r = std::hypot(x, y);
            return 0.05 * std::exp(-3.0 * r * r) *
                   cubic_ramp(3.0 * (r - 0.65));
        },
        2.0, 1.0 / 16);
    p.spec.psi_pert = [](double x, double y) {
        const double r = std::hypot(x, y);
        return 0.05 * std::exp(-2.0 * r * r) * cubic_ramp(2.0 * (r - 0.8));
    };
    p.spec.eps0 = 0.5;
    p.spec.eps_decay = 0.5;
    p.spec.A0 = 1.2;
    p.spec.A_step = 0.1;
    p.spec.alpha = 0.25;
    p.spec.probe_radius = 0.9;
    convseq_checks(ck, res, p);
    return res;
}

// ------------------------------------------------------------- certify --

SuiteResult certify_suite(const SuiteOptions& o) {
    SuiteResult res;
    res.suite = "certify";
    Checker ck{res.checks, o.tol_scale};

    Csv csv;
    csv.columns = {"geometry", "k0", "alpha3", "samples"};
    auto check_flow = [&](const std::string& name, const FlowSolution& flow) {
        try {
            const auto cert = certify(flow, o.seed, 2000);
            ck.upper(name + ": velocity-bound arithmetic",
                     std::abs(cert.alpha3 - 2.0 * (cert.n - 1) * cert.k0),
                     0.0, false);
            ck.upper(name + ": band violations", 0.0, 0.0, false);
            // a frozen flow has one time node and nothing to sample
            if (flow.times.size() >= 2)
                ck.lower(name + ": samples checked",
                         static_cast<double>(cert.samples_checked), 1000.0,
                         false);
            csv.rows.push_back({name, format_g17(cert.k0),
                                format_g17(cert.alpha3),
                                std::to_string(cert.samples_checked)});
        } catch (const CertificationError&) {
            ck.upper(name + ": band violations", 1.0, 0.0, false);
        }
    };

    check_flow("evolving bump",
               reverse(evolve_forward(bump_model(2.4, 1.0 / 16), 0.1)));
    check_flow("round background",
               reverse(evolve_forward(GeometryModel::sphere(M_SQRT2, 1.0 / 64),
                                      0.5)));
    check_flow("flat still",
               FlowSolution::still(GeometryModel::flat(2, 2.0, 1.0 / 32)));

    res.artifacts.emplace_back("certificates", std::move(csv));
    return res;
}

// ------------------------------------------------- config experiments --

double positive(const Config& cfg, const std::string& key, double fallback) {
    const double v = cfg.number_or(key, fallback);
    if (v <= 0.0) throw ConfigError("key '" + key + "' must be positive");
    return v;
}

struct GeometrySpec {
    GeometryModel model;
    double flow_time = 0.0;  // > 0: evolve forward then reverse
};

GeometrySpec parse_geometry(const Config& cfg) {
    GeometrySpec gs;
    const std::string kind = cfg.text("geometry.model");
    const double spacing = positive(cfg, "geometry.spacing", 1.0 / 32);
    if (kind == "flat") {
        const int dim = static_cast<int>(positive(cfg, "geometry.dim", 2.0));
        const double extent = positive(cfg, "geometry.extent", 2.5);
        Layout layout = Layout::Radial;
        if (cfg.has("geometry.layout")) {
            const std::string l = cfg.text("geometry.layout");
            if (l == "planar")
                layout = Layout::Planar;
            else if (l != "radial")
                throw ConfigError("geometry.layout must be radial or planar");
        }
        gs.model = GeometryModel::flat(dim, extent, spacing, layout);
    } else if (kind == "sphere") {
        gs.model = GeometryModel::sphere(
            positive(cfg, "geometry.radius", M_SQRT2), spacing);
    } else if (kind == "bump") {
        const double amp = positive(cfg, "geometry.amp", 0.1);
        const double decay = positive(cfg, "geometry.decay", 1.0);
        const double center = positive(cfg, "geometry.ramp_center", 1.0);
        const double rate = positive(cfg, "geometry.ramp_rate", 2.0);
        const double half = positive(cfg, "geometry.extent", 2.4);
        gs.model = GeometryModel::conformal(
            [=](double x, double y) {
                const double r = std::hypot(x, y);
                return amp * std::exp(-decay * r * r) *
                       cubic_ramp(rate * (r - center));
            },
            half, spacing);
    } else {
        throw ConfigError("geometry.model must be flat, sphere, or bump");
    }
    gs.flow_time = cfg.number_or("geometry.flow_time", 0.0);
    if (gs.flow_time < 0.0)
        throw ConfigError("geometry.flow_time must be non-negative");
    return gs;
}

FlowSolution parse_flow(const GeometrySpec& gs) {
    if (gs.flow_time > 0.0)
        return reverse(evolve_forward(gs.model, gs.flow_time));
    return FlowSolution::still(gs.model);
}

const std::vector<std::string> kCommonKeys = {
    "experiment.kind",    "experiment.out_dir",   "geometry.model",
    "geometry.dim",       "geometry.extent",      "geometry.spacing",
    "geometry.layout",    "geometry.radius",      "geometry.amp",
    "geometry.decay",     "geometry.ramp_center", "geometry.ramp_rate",
    "geometry.flow_time", "solver.dt",            "solver.theta",
};

std::vector<std::string> with_common(std::vector<std::string> extra) {
    extra.insert(extra.end(), kCommonKeys.begin(), kCommonKeys.end());
    return extra;
}

SuiteResult experiment_oracle(const Config& cfg, const SuiteOptions& o) {
    cfg.require_known(
        with_common({"suite.horizon", "suite.taus", "suite.rel_tol"}));
    const auto gs = parse_geometry(cfg);
    if (gs.model.kind != ModelKind::FlatEuclidean ||
        gs.model.layout != Layout::Radial || gs.flow_time != 0.0)
        throw ConfigError("oracle experiments need a static radial flat model");
    SuiteResult res;
    res.suite = "oracle";
    Checker ck{res.checks, o.tol_scale};
    OracleParams p;
    p.spacing = gs.model.spacing;
    p.extent = gs.model.extent;
    p.horizon = positive(cfg, "suite.horizon", 0.25);
    p.theta = positive(cfg, "solver.theta", 0.5);
    p.taus = cfg.numbers_or("suite.taus", {});
    p.rel_tol = positive(cfg, "suite.rel_tol", 0.02);
    oracle_kernel_checks(ck, res, p);
    oracle_dense_checks(ck);
    return res;
}

SuiteResult experiment_green(const Config& cfg, const SuiteOptions& o) {
    cfg.require_known(with_common({"suite.ks", "suite.horizon"}));
    const auto gs = parse_geometry(cfg);
    const auto ks = cfg.numbers_or("suite.ks", {1.0, 2.0, 3.0, 4.0});
    for (double k : ks)
        if (k <= 0.0) throw ConfigError("suite.ks must be positive");
    const double T = positive(cfg, "suite.horizon",
                              gs.flow_time > 0.0 ? gs.flow_time : 0.5);
    GreenOptions go;
    go.dt = positive(cfg, "solver.dt", 0.0025);
    go.theta = positive(cfg, "solver.theta", 1.0);

    SuiteResult res;
    res.suite = "green";
    Checker ck{res.checks, o.tol_scale};
    if (gs.flow_time > 0.0) {
        const auto flow = parse_flow(gs);
        green_geometry(ck, res, "experiment",
                       green_family(flow, BoundaryKind::Neumann, ks, T, go),
                       green_family(flow, BoundaryKind::Dirichlet, ks, T, go));
    } else {
        green_geometry(
            ck, res, "experiment",
            green_family(gs.model, BoundaryKind::Neumann, ks, T, go),
            green_family(gs.model, BoundaryKind::Dirichlet, ks, T, go));
    }
    return res;
}

SuiteResult experiment_maxprin(const Config& cfg, const SuiteOptions& o) {
    cfg.require_known(with_common({"suite.seeds", "suite.lambda",
                                   "suite.horizon", "suite.ball",
                                   "suite.alpha1", "suite.alpha2"}));
    const auto gs = parse_geometry(cfg);
    SuiteResult res;
    res.suite = "maxprin";
    Checker ck{res.checks, o.tol_scale};
    maxprin_arithmetic(ck);

    MaxPrinGeometry g;
    g.name = "experiment";
    g.horizon = positive(cfg, "suite.horizon",
                         gs.flow_time > 0.0 ? gs.flow_time : 0.375);
    g.lambda = positive(cfg, "suite.lambda", 1.0);
    g.alpha1 = positive(cfg, "suite.alpha1", 0.4);
    g.alpha2 = positive(cfg, "suite.alpha2", 0.8);
    g.seeds = static_cast<int>(positive(cfg, "suite.seeds", 20.0));
    const double dt = positive(cfg, "solver.dt", 0.005);
    const double ball = positive(cfg, "suite.ball", gs.model.extent * 0.9);
    if (gs.flow_time > 0.0) {
        const auto flow = parse_flow(gs);
        g.cert = certify(flow, o.seed);
        g.cx =
            build_complex(flow, ball, uniform_time_grid(0.0, g.horizon, dt));
    } else {
        g.cert.n = gs.model.dim;
        g.cert.T = g.horizon;
        g.cx = build_complex(gs.model, ball,
                             uniform_time_grid(0.0, g.horizon, dt));
    }
    Csv csv = maxprin_csv();
    maxprin_geometry(ck, csv, o, g);
    res.artifacts.emplace_back("maxprin_seeds", std::move(csv));
    return res;
}

SuiteResult experiment_gaussian(const Config& cfg, const SuiteOptions& o) {
    cfg.require_known(with_common({"suite.ball", "suite.horizon",
                                   "suite.taus", "suite.max_radius",
                                   "suite.d_lo", "suite.d_hi", "suite.c_lo",
                                   "suite.c_hi", "suite.k0"}));
    const auto gs = parse_geometry(cfg);
    const double T = positive(cfg, "suite.horizon",
                              gs.flow_time > 0.0 ? gs.flow_time : 0.25);
    const double ball = positive(cfg, "suite.ball", gs.model.extent * 0.85);
    GreenOptions go;
    go.dt = positive(cfg, "solver.dt", 0.0025);
    go.theta = positive(cfg, "solver.theta", 0.5);

    SuiteResult res;
    res.suite = "gaussian";
    Checker ck{res.checks, o.tol_scale};
    GreenRecord rec;
    double k0 = cfg.number_or("suite.k0", 0.0);
    if (gs.flow_time > 0.0) {
        const auto flow = parse_flow(gs);
        if (!cfg.has("suite.k0")) k0 = certify(flow, o.seed).k0;
        rec = std::move(green_family(flow, BoundaryKind::Neumann,
                                     std::vector<double>{ball}, T, go)[0]);
    } else {
        rec = std::move(green_family(gs.model, BoundaryKind::Neumann,
                                     std::vector<double>{ball}, T, go)[0]);
    }
    FitSpec spec;
    spec.taus = cfg.numbers_or("suite.taus", {0.05, 0.1, 0.15, 0.2, 0.25});
    spec.max_radius = positive(cfg, "suite.max_radius", 0.8 * ball);
    GaussianWindows win;
    win.d_lo = positive(cfg, "suite.d_lo", win.d_lo);
    win.d_hi = positive(cfg, "suite.d_hi", win.d_hi);
    win.c_lo = positive(cfg, "suite.c_lo", win.c_lo);
    win.c_hi = positive(cfg, "suite.c_hi", win.c_hi);
    gaussian_checks(ck, res, rec, spec, win, std::max(k0, 1e-8), T);
    return res;
}

SuiteResult experiment_convseq(const Config& cfg, const SuiteOptions& o) {
    cfg.require_known(with_common(
        {"suite.count", "suite.eps0", "suite.eps_decay", "suite.A0",
         "suite.A_step", "suite.alpha", "suite.probe_radius", "suite.ball",
         "suite.tau_lo", "suite.tau_hi", "suite.delta_tol", "suite.psi_amp",
         "suite.psi_decay", "suite.psi_center", "suite.psi_rate"}));
    const auto gs = parse_geometry(cfg);
    if (gs.model.kind != ModelKind::ConformalPlaneFlow || gs.flow_time != 0.0)
        throw ConfigError(
            "convseq experiments need a static bump model as the limit");
    ConvSeqParams p;
    p.spec.limit = gs.model;
    const double pa = positive(cfg, "suite.psi_amp", 0.05);
    const double pd = positive(cfg, "suite.psi_decay", 2.0);
    const double pc = positive(cfg, "suite.psi_center", 0.8);
    const double pr = positive(cfg, "suite.psi_rate", 2.0);
    p.spec.psi_pert = [=](double x, double y) {
        const double r = std::hypot(x, y);
        return pa * std::exp(-pd * r * r) * cubic_ramp(pr * (r - pc));
    };
    p.spec.eps0 = positive(cfg, "suite.eps0", 0.5);
    p.spec.eps_decay = positive(cfg, "suite.eps_decay", 0.5);
    p.spec.A0 = positive(cfg, "suite.A0", 1.2);
    p.spec.A_step = positive(cfg, "suite.A_step", 0.1);
    p.spec.alpha = positive(cfg, "suite.alpha", 0.25);
    p.spec.probe_radius = positive(cfg, "suite.probe_radius", 0.9);
    p.count = static_cast<int>(positive(cfg, "suite.count", 6.0));
    p.ball = positive(cfg, "suite.ball", 1.8);
    p.dt = positive(cfg, "solver.dt", 0.005);
    p.tau_lo = positive(cfg, "suite.tau_lo", 0.05);
    p.tau_hi = positive(cfg, "suite.tau_hi", 0.25);
    p.delta_tol = positive(cfg, "suite.delta_tol", 1e-3);

    SuiteResult res;
    res.suite = "convseq";
    Checker ck{res.checks, o.tol_scale};
    convseq_checks(ck, res, p);
    return res;
}

}  // namespace

std::vector<std::string> suite_names() {
    return {"mass",     "oracle", "green",   "maxprin",
            "gaussian", "volume", "convseq", "certify"};
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts) {
    if (name == "mass") return mass_suite(opts);
    if (name == "oracle") return oracle_suite(opts);
    if (name == "green") return green_suite(opts);
    if (name == "maxprin") return maxprin_suite(opts);
    if (name == "gaussian") return gaussian_suite(opts);
    if (name == "volume") return volume_suite(opts);
    if (name == "convseq") return convseq_suite(opts);
    if (name == "certify") return certify_suite(opts);
    throw SuiteError("unknown suite '" + name + "'");
}

SuiteResult run_experiment(const Config& cfg, const SuiteOptions& opts) {
    const std::string kind = cfg.text("experiment.kind");
    if (kind == "oracle") return experiment_oracle(cfg, opts);
    if (kind == "green") return experiment_green(cfg, opts);
    if (kind == "maxprin") return experiment_maxprin(cfg, opts);
    if (kind == "gaussian") return experiment_gaussian(cfg, opts);
    if (kind == "convseq") return experiment_convseq(cfg, opts);
    throw ConfigError("unknown experiment kind '" + kind + "'");
}

}  // namespace ricci
