#include <cmath>
#include <vector>

#include "doctest.h"
#include "ricci/green.hpp"
#include "ricci/numerics.hpp"
#include "ricci/oracles.hpp"

using namespace ricci;

namespace {

struct Family {
    std::vector<GreenRecord> neumann;
    std::vector<GreenRecord> dirichlet;
};

const Family& flat_family() {
    static const Family fam = [] {
        const auto model = GeometryModel::flat(2, 3.0, 1.0 / 32);
        const std::vector<double> ks{1.0, 1.5, 2.0, 2.5};
        GreenOptions opts;
        opts.dt = 0.0025;
        Family f;
        f.neumann = green_family(model, BoundaryKind::Neumann, ks, 0.25, opts);
        f.dirichlet =
            green_family(model, BoundaryKind::Dirichlet, ks, 0.25, opts);
        return f;
    }();
    return fam;
}

// second-order stepping and a tail cap keep the fitted decay rate honest
const GreenRecord& fit_record() {
    static const GreenRecord rec = [] {
        const auto model = GeometryModel::flat(2, 3.0, 1.0 / 32);
        GreenOptions opts;
        opts.dt = 0.0025;
        opts.theta = 0.5;
        const std::vector<double> ks{2.5};
        return green_family(model, BoundaryKind::Neumann, ks, 0.25, opts)[0];
    }();
    return rec;
}

FitSpec base_fit_spec() {
    FitSpec spec;
    spec.taus = {0.05, 0.1, 0.15, 0.2, 0.25};
    spec.max_radius = 2.0;
    return spec;
}

}  // namespace

TEST_CASE("Neumann members keep unit mass, Dirichlet members leak") {
    const auto& fam = flat_family();
    for (const auto& rec : fam.neumann)
        for (double m : rec.mass_trace) CHECK(std::abs(m - 1.0) <= 1e-10);
    for (const auto& rec : fam.dirichlet) {
        for (std::size_t m = 1; m < rec.mass_trace.size(); ++m)
            CHECK(rec.mass_trace[m] <= rec.mass_trace[m - 1] + 1e-14);
        CHECK(rec.mass_trace.back() > 0.0);
    }
}

TEST_CASE("Dirichlet family increases monotonically with the ball") {
    const auto& fam = flat_family();
    const auto probe = make_probe(fam.neumann.front());
    for (std::size_t i = 0; i + 1 < fam.dirichlet.size(); ++i)
        for (std::size_t m : probe.time_indices)
            for (int id : probe.ids)
                CHECK(probe_value(fam.dirichlet[i], id, m) <=
                      probe_value(fam.dirichlet[i + 1], id, m) + 1e-10);
}

TEST_CASE("Dirichlet members sit below their Neumann siblings") {
    const auto& fam = flat_family();
    const auto probe = make_probe(fam.neumann.front());
    for (std::size_t i = 0; i < fam.neumann.size(); ++i)
        for (std::size_t m : probe.time_indices)
            for (int id : probe.ids)
                CHECK(probe_value(fam.dirichlet[i], id, m) <=
                      probe_value(fam.neumann[i], id, m) + 1e-10);
}

TEST_CASE("exhaustion table: shrinking deltas and closing gap") {
    const auto& fam = flat_family();
    const auto rows = exhaustion_convergence(fam.neumann, fam.dirichlet);
    REQUIRE(rows.size() == 4);
    for (std::size_t i = 0; i + 2 < rows.size(); ++i) {
        CHECK(rows[i].delta_neumann > rows[i + 1].delta_neumann);
        CHECK(rows[i].delta_dirichlet > rows[i + 1].delta_dirichlet);
    }
    CHECK(rows.back().gap <= 2e-3);
    for (const auto& row : rows) CHECK(row.mass_err <= 1e-10);
}

TEST_CASE("largest flat member tracks the free-space kernel") {
    const auto model = GeometryModel::flat(2, 3.0, 1.0 / 32);
    GreenOptions opts;
    opts.dt = 0.001;
    opts.theta = 0.5;
    const std::vector<double> ks{1.0, 1.5, 2.0, 2.5};
    const auto zs = green_family(model, BoundaryKind::Neumann, ks, 0.1, opts);
    const auto gs = green_family(model, BoundaryKind::Dirichlet, ks, 0.1, opts);
    const auto probe = make_probe(zs.front());
    const std::size_t m = zs.back().field.time_index(0.1);
    for (int id : probe.ids) {
        const double r = zs.back().cx.dist[0][id];
        const double truth = flat_heat_kernel(2, r, 0.1);
        CHECK(probe_value(zs.back(), id, m) ==
              doctest::Approx(truth).epsilon(0.02));
        CHECK(probe_value(gs.back(), id, m) ==
              doctest::Approx(truth).epsilon(0.02));
    }
}

TEST_CASE("Gaussian bound fit recovers the flat constants") {
    const auto& rec = fit_record();
    const FitSpec spec = base_fit_spec();
    const auto fit = fit_gaussian_bound(rec, spec);
    CHECK(fit.C > 0.0);
    CHECK(fit.D > 0.0);
    CHECK(fit.residual <= 0.0);
    CHECK(fit.D == doctest::Approx(4.0).epsilon(0.15));
    CHECK(fit.C == doctest::Approx(0.25).epsilon(0.15));
}

TEST_CASE("held-out samples respect the inflated fit") {
    const auto& rec = fit_record();
    FitSpec train = base_fit_spec();
    train.stride = 2;
    train.offset = 0;
    auto fit = fit_gaussian_bound(rec, train);
    fit.C *= 1.05;
    FitSpec held = train;
    held.offset = 1;
    CHECK(gaussian_bound_excess(rec, fit, held) <= 0.0);
}

TEST_CASE("source-only samples pin the amplitude, not the decay") {
    const auto& rec = fit_record();
    FitSpec spec = base_fit_spec();
    spec.max_radius = rec.cx.spacing;
    const auto fit = fit_gaussian_bound(rec, spec);
    CHECK(fit.D == doctest::Approx(spec.d_min));
    double expect = 0.0;
    for (double tau : spec.taus) {
        const double v = ball_volume(rec.cx, rec.source_cell, std::sqrt(tau),
                                     0.0).volume;
        const std::size_t m = rec.field.time_index(tau);
        expect = std::max(expect, rec.field.values[m][rec.source_cell] * v);
    }
    CHECK(fit.C == doctest::Approx(expect).epsilon(0.02));
}

TEST_CASE("round background fit stays finite") {
    const auto model = GeometryModel::sphere(M_SQRT2, 1.0 / 16);
    GreenOptions opts;
    opts.dt = 0.0025;
    const std::vector<double> ks{M_PI * M_SQRT2};
    const auto recs = green_family(model, BoundaryKind::Neumann, ks, 0.25, opts);
    FitSpec spec;
    spec.taus = {0.1, 0.2};
    const auto fit = fit_gaussian_bound(recs[0], spec);
    CHECK(std::isfinite(fit.C));
    CHECK(fit.C > 0.0);
    CHECK(fit.D >= spec.d_min);
    CHECK(fit.D <= spec.d_max);
}

TEST_CASE("the majorant integral is finite and tracks its limits") {
    GaussianFit fit;
    fit.C = 0.25;
    fit.D = 4.0;

    FlowCertificate flatc;
    flatc.k0 = 0.0;
    auto mzero = mass_integrability_check(fit, flatc, 2, 1.0);
    CHECK(mzero.C_T == doctest::Approx(fit.C).epsilon(1e-10));

    // C' = 1: closed form 1 + e sqrt(pi) (1 + erf 1), scaled by C
    FlowCertificate c1;
    c1.k0 = 1.0;
    auto m1 = mass_integrability_check(fit, c1, 2, 1.0);
    const double integral =
        1.0 + std::exp(1.0) * std::sqrt(M_PI) * (1.0 + std::erf(1.0));
    CHECK(m1.C_T == doctest::Approx(fit.C * integral).epsilon(1e-9));
    CHECK(m1.quadrature_delta <= 1e-8);

    FlowCertificate c2;
    c2.k0 = 2.0;
    auto m2 = mass_integrability_check(fit, c2, 2, 1.0);
    CHECK(m2.C_T > m1.C_T);
    CHECK(m1.C_T > mzero.C_T);
}

TEST_CASE("partial masses stay bounded in the strong sense") {
    const auto& fam = flat_family();
    const std::vector<double> radii{0.5, 1.0, 1.5, 2.0, 2.5};
    for (const auto* rec : {&fam.neumann.back(), &fam.dirichlet.back()}) {
        const auto verdict = sublinear_mass_check(*rec, radii);
        CHECK(verdict.bounded);
        double prev = 0.0;
        for (const auto& row : verdict.profile) {
            CHECK(row.max_mass >= prev);
            prev = row.max_mass;
        }
    }
    // at the full extent the profile reproduces the mass-trace maximum
    const auto& rec = fam.neumann.back();
    const auto verdict = sublinear_mass_check(rec, radii);
    double mmax = 0.0;
    for (std::size_t m = 1; m < rec.mass_trace.size(); ++m)
        mmax = std::max(mmax, rec.mass_trace[m]);
    CHECK(verdict.profile.back().max_mass == doctest::Approx(mmax).epsilon(1e-12));
}

TEST_CASE("bump-flow family converges the same way") {
    const auto model = GeometryModel::conformal(
        [](double x, double y) {
            const double r2 = x * x + y * y;
            return 0.1 * std::exp(-r2) * cubic_ramp(2.0 * (std::sqrt(r2) - 1.0));
        },
        2.4, 1.0 / 16);
    const auto back = reverse(evolve_forward(model, 0.1));
    GreenOptions opts;
    opts.dt = 0.0025;
    const std::vector<double> ks{0.8, 1.3, 1.8, 2.3};
    const auto zs = green_family(back, BoundaryKind::Neumann, ks, 0.1, opts);
    const auto gs = green_family(back, BoundaryKind::Dirichlet, ks, 0.1, opts);
    const auto rows = exhaustion_convergence(zs, gs);
    for (std::size_t i = 0; i + 2 < rows.size(); ++i)
        CHECK(rows[i].delta_neumann > rows[i + 1].delta_neumann);
    for (const auto& row : rows) CHECK(row.mass_err <= 1e-10);

    // the comparison ratio bound holds on this geometry
    const auto cert = certify(back);
    const auto& cx = zs.back().cx;
    for (double r : {0.4, 0.8, 1.2}) {
        const auto rb = comparison_ratio_bound(cx, cx.base_cell, r, 0.09,
                                               std::max(cert.k0, 1e-8), 0.1);
        CHECK(rb.lhs <= rb.rhs * (1.0 + 1e-10));
    }
}
