#include <cmath>
#include <vector>

#include "doctest.h"
#include "ricci/maxprin.hpp"
#include "ricci/numerics.hpp"

using namespace ricci;

namespace {

DiscreteComplex small_disk() {
    return build_complex(GeometryModel::flat(2, 2.0, 1.0 / 16), 2.0, {0.0});
}

FlowCertificate still_cert(double T, double alpha3 = 0.0, int n = 2) {
    FlowCertificate cert;
    cert.n = n;
    cert.T = T;
    cert.alpha3 = alpha3;
    cert.k0 = alpha3 / (2.0 * (n - 1));
    return cert;
}

}  // namespace

TEST_CASE("cutoff constants follow the closed forms") {
    const auto cx = small_disk();
    CoefficientData zero;

    // lambda1 = 1 with alpha3 = log(9/8): the window is the cap 1/8
    auto cut = build_cutoff(cx, still_cert(0.0, std::log(9.0 / 8.0)), zero,
                            1.0, 1.0);
    CHECK(cut.lambda1 == doctest::Approx(1.0));
    CHECK(cut.eta == doctest::Approx(1.0 / 8.0));

    // all bounds zero: C1 = 0 and the window is capped by the horizon
    auto flat = build_cutoff(cx, still_cert(1.0), zero, 1.0, 1.0);
    CHECK(flat.C1 == 0.0);
    CHECK(flat.eta == doctest::Approx(1.0 / 8.0));
    auto shorter = build_cutoff(cx, still_cert(0.05), zero, 1.0, 1.0);
    CHECK(shorter.eta == doctest::Approx(0.05));

    CoefficientData unit;
    unit.alpha1 = 1.0;
    unit.alpha2 = 1.0;
    auto c7 = build_cutoff(cx, still_cert(0.0, 1.0), unit, 1.0, 1.0);
    CHECK(c7.C1 == doctest::Approx(7.0));

    CHECK_THROWS_AS(build_cutoff(cx, still_cert(1.0), zero, 0.0, 1.0),
                    MaxPrinError);
    CHECK_THROWS_AS(build_cutoff(cx, still_cert(1.0), zero, 1.0, 0.5),
                    MaxPrinError);
}

TEST_CASE("window length shrinks with lambda1 and alpha3") {
    const auto cx = small_disk();
    CoefficientData zero;
    double prev = 1e9;
    for (double lam : {0.5, 1.0, 2.0, 4.0}) {
        const auto cut = build_cutoff(cx, still_cert(1.0), zero, lam, 1.0);
        CHECK(cut.eta <= prev + 1e-15);
        prev = cut.eta;
    }
    prev = 1e9;
    for (double a3 : {0.1, 0.5, 1.0, 2.0}) {
        const auto cut = build_cutoff(cx, still_cert(1.0, a3), zero, 1.0, 1.0);
        CHECK(cut.eta <= prev + 1e-15);
        prev = cut.eta;
    }
}

TEST_CASE("weight dominates the growth term cellwise") {
    const auto cx = small_disk();
    CoefficientData zero;
    const auto cut = build_cutoff(cx, still_cert(1.0, 0.3), zero, 1.5, 1.0);
    for (std::size_t i = 0; i < cx.cell_count(); ++i) {
        const double r2 = cut.r0[i] * cut.r0[i];
        CHECK(cut.h(i, 0.0) <= -cut.lambda1 * r2 + 1e-9 * (1.0 + r2));
        // the weight only deepens as the window advances
        CHECK(cut.h(i, cut.eta) <= cut.h(i, 0.0) + 1e-15);
    }
}

TEST_CASE("radial weight residuals vanish, ramp slopes stay in band") {
    const auto cx = small_disk();
    CoefficientData zero;
    const auto cut = build_cutoff(cx, still_cert(1.0), zero, 1.0, 1.0);
    const auto res = cutoff_residuals(cx, cut);
    // quadratic weight: only the one-sided innermost cell contributes,
    // at O(spacing^2 / eta^2)
    CHECK(res.eikonal <= cx.spacing);
    CHECK(res.damped <= res.eikonal + 1e-15);
    CHECK(res.grad_phi0 <= 1.5 + 1e-12);
    CHECK(res.grad_phi_t <= 1.5 + 1e-12);  // static metric
}

TEST_CASE("planar weight residuals are grid-scale small") {
    const auto coarse = build_complex(
        GeometryModel::flat(2, 2.0, 1.0 / 8, Layout::Planar), 2.0, {0.0});
    const auto fine = build_complex(
        GeometryModel::flat(2, 2.0, 1.0 / 16, Layout::Planar), 2.0, {0.0});
    CoefficientData zero;
    std::vector<double> eik;
    for (const auto* cx : {&coarse, &fine}) {
        const auto cut = build_cutoff(*cx, still_cert(1.0), zero, 1.0, 1.0);
        const auto res = cutoff_residuals(*cx, cut);
        // the constant is large (the weight curvature scales as 1/eta^2)
        // but the residual is first order in the spacing
        CHECK(res.eikonal <= 20.0 * cx->spacing);
        CHECK(res.damped <= res.eikonal + 1e-15);
        CHECK(res.grad_phi0 <= 1.5 + 0.1);
        eik.push_back(res.eikonal);
    }
    CHECK(eik[0] / eik[1] >= 1.7);
}

TEST_CASE("random instances are deterministic and within bounds") {
    const auto cx = small_disk();
    const auto a = random_instance(11, cx, 0.4, 0.8);
    const auto b = random_instance(11, cx, 0.4, 0.8);
    CHECK(a.coeffs.edge_drift == b.coeffs.edge_drift);
    CHECK(a.coeffs.potential == b.coeffs.potential);
    CHECK(a.u0 == b.u0);
    CHECK(a.slack == b.slack);

    for (std::uint64_t seed : {1, 2, 3, 5, 9, 10}) {
        const auto inst = random_instance(seed, cx, 0.4, 0.8);
        for (double d : inst.coeffs.edge_drift) CHECK(std::abs(d) <= 0.4);
        for (double p : inst.coeffs.potential) CHECK(std::abs(p) <= 0.8);
        for (double u : inst.u0) CHECK(u <= 0.0);
        for (double f : inst.slack) CHECK(f <= 0.0);
        CHECK_NOTHROW(inst.coeffs.validate(cx));
    }
    // every fifth seed exercises the vanishing initial data edge case
    const auto edge = random_instance(10, cx, 0.4, 0.8);
    for (double u : edge.u0) CHECK(u == 0.0);
}

TEST_CASE("non-positivity holds across seeded instances") {
    const auto model = GeometryModel::flat(2, 2.0, 1.0 / 16, Layout::Planar);
    const auto cx =
        build_complex(model, 2.0, uniform_time_grid(0.0, 0.375, 0.005));
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        const auto inst = random_instance(seed, cx, 0.4, 0.8);
        const auto field =
            solve_linear_parabolic(cx, inst.coeffs, inst.u0, inst.forcing(),
                                   BoundaryKind::Neumann, 0.0, 0.375);
        CHECK(check_conclusion(field) <= 1e-8);
    }
}

TEST_CASE("pure heat preserves a constant subsolution") {
    const auto cx = build_complex(GeometryModel::flat(2, 2.0, 1.0 / 16), 2.0,
                                  uniform_time_grid(0.0, 0.375, 0.005));
    CoefficientData zero;
    zero.edge_drift.assign(cx.edges.size(), 0.0);
    zero.potential.assign(cx.cell_count(), 0.0);
    const auto field = solve_linear_parabolic(
        cx, zero, std::vector<double>(cx.cell_count(), -1.0), nullptr,
        BoundaryKind::Neumann, 0.0, 0.375);
    CHECK(check_conclusion(field) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("energy estimate is exact for genuine subsolutions") {
    const auto cx = build_complex(GeometryModel::flat(2, 2.0, 1.0 / 32), 2.0,
                                  uniform_time_grid(0.0, 0.375, 0.005));
    const auto inst = random_instance(3, cx, 0.4, 0.8);
    const auto field =
        solve_linear_parabolic(cx, inst.coeffs, inst.u0, inst.forcing(),
                               BoundaryKind::Neumann, 0.0, 0.375);
    const auto cert = still_cert(0.375);
    const auto cut = build_cutoff(cx, cert, inst.coeffs, 1.0, 1.0);
    const auto rep = energy_inequality_check(cx, field, cut);
    CHECK(rep.state_max == 0.0);
    CHECK(rep.grad_max == 0.0);
    CHECK(rep.annulus == 0.0);
    CHECK(rep.initial == 0.0);
    CHECK(rep.margin <= 0.0);
}

TEST_CASE("energy estimate bounds a seeded positive bump") {
    // a solution with positive data supported far inside B_R; the initial
    // energy rides on the right-hand side
    const auto cx = build_complex(GeometryModel::flat(2, 3.5, 1.0 / 64), 3.5,
                                  uniform_time_grid(0.0, 0.1, 0.002));
    CoefficientData zero;
    zero.edge_drift.assign(cx.edges.size(), 0.0);
    zero.potential.assign(cx.cell_count(), 0.0);
    std::vector<double> u0(cx.cell_count());
    for (std::size_t i = 0; i < cx.cell_count(); ++i) {
        const double r = cx.position[i][0];
        u0[i] = std::exp(-40.0 * r * r);
    }
    const auto field = solve_linear_parabolic(cx, zero, u0, nullptr,
                                              BoundaryKind::Neumann, 0.0, 0.1);
    const auto cut =
        build_cutoff(cx, still_cert(0.1), zero, 1.0, 2.5);
    const auto rep = energy_inequality_check(cx, field, cut);
    CHECK(rep.initial > 0.0);
    CHECK(rep.state_max > 0.0);
    CHECK(rep.margin <= 1.0 * cx.spacing * rep.scale);
    CHECK_THROWS_AS(
        energy_inequality_check(
            cx, field, build_cutoff(cx, still_cert(1.0), zero, 1.0, 2.5)),
        MaxPrinError);  // eta beyond the trajectory horizon
}

TEST_CASE("growth integral matches the closed form and is monotone") {
    const auto cx = build_complex(GeometryModel::flat(2, 1.0, 1.0 / 128), 1.0,
                                  uniform_time_grid(0.0, 1.0, 0.25));
    SpaceTimeField ones;
    ones.times = cx.times;
    ones.values.assign(cx.time_count(),
                       std::vector<double>(cx.cell_count(), 1.0));
    const double got = growth_condition_value(cx, ones, 1.0);
    const double want = M_PI * (1.0 - std::exp(-1.0));
    CHECK(got == doctest::Approx(want).epsilon(1e-3));
    CHECK(growth_condition_value(cx, ones, 2.0) < got);

    SpaceTimeField neg = ones;
    for (auto& row : neg.values)
        for (double& v : row) v = -1.0;
    CHECK(growth_condition_value(cx, neg, 1.0) == 0.0);
}

TEST_CASE("certified evolving geometry keeps the conclusion") {
    const auto model = GeometryModel::conformal(
        [](double x, double y) {
            const double r2 = x * x + y * y;
            return 0.1 * std::exp(-r2) * cubic_ramp(2.0 * (std::sqrt(r2) - 1.0));
        },
        2.4, 1.0 / 16);
    const auto back = reverse(evolve_forward(model, 0.1));
    const auto cert = certify(back);
    const auto cx =
        build_complex(back, 2.2, uniform_time_grid(0.0, 0.1, 0.0025));
    for (std::uint64_t seed : {1, 4, 7}) {
        const auto inst = random_instance(seed, cx, 0.4, 0.8);
        const auto field =
            solve_linear_parabolic(cx, inst.coeffs, inst.u0, inst.forcing(),
                                   BoundaryKind::Neumann, 0.0, 0.1);
        CHECK(check_conclusion(field) <= 1e-8);
        const auto cut = build_cutoff(cx, cert, inst.coeffs, 2.0, 1.0);
        REQUIRE(cut.eta <= 0.1);
        const auto rep = energy_inequality_check(cx, field, cut);
        CHECK(rep.margin <= 0.0);
        const auto res = cutoff_residuals(cx, cut);
        CHECK(res.grad_phi_t <=
              2.0 * cert.distance_factor + 0.1);
    }
}
