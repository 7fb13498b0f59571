#include <cmath>
#include <vector>

#include "doctest.h"
#include "ricci/flow.hpp"
#include "ricci/numerics.hpp"

using namespace ricci;

namespace {

// cut off beyond |x| = 1.5 so the metric is exactly flat near the rim
GeometryModel bump_model(double extent = 4.0, double h = 1.0 / 8,
                         double amp = 0.1) {
    return GeometryModel::conformal(
        [amp](double x, double y) {
            const double r = std::sqrt(x * x + y * y);
            return amp * std::exp(-r * r) * cubic_ramp(2.0 * (r - 1.0));
        },
        extent, h);
}

}  // namespace

TEST_CASE("flat initial data is a fixed point of the flow") {
    const auto model = GeometryModel::conformal(
        [](double, double) { return 0.0; }, 2.0, 1.0 / 8);
    const auto f = evolve_forward(model, 0.1);
    for (const auto& slice : f.w)
        for (double v : slice) CHECK(std::abs(v) <= 1e-12);
    CHECK(f.sup_rm() <= 1e-10);
}

TEST_CASE("round solution shrinks linearly and reverses to 1+t") {
    const auto model = GeometryModel::sphere(M_SQRT2, 1.0 / 16);
    const auto f = evolve_forward(model, 0.5);
    for (std::size_t m = 0; m < f.times.size(); ++m)
        CHECK(f.scale[m] == doctest::Approx(1.0 - f.times[m]).epsilon(1e-14));

    const auto b = reverse(f);
    CHECK(b.direction == FlowDirection::Backward);
    // affine reparametrization of (1 + t): scale(t) = s_T (1 + t/s_T)
    const double sT = 1.0 - 0.5;
    for (std::size_t m = 0; m < b.times.size(); ++m)
        CHECK(b.scale[m] ==
              doctest::Approx(sT * (1.0 + b.times[m] / sT)).epsilon(1e-13));

    CHECK_THROWS_AS(evolve_forward(model, 1.0), FlowError);
}

TEST_CASE("reverse is an involution and keeps flat flows flat") {
    const auto f = evolve_forward(bump_model(), 0.05);
    const auto rr = reverse(reverse(f));
    REQUIRE(rr.times.size() == f.times.size());
    for (std::size_t m = 0; m < f.times.size(); ++m) {
        CHECK(rr.times[m] == doctest::Approx(f.times[m]).epsilon(1e-15));
        for (std::size_t i = 0; i < f.w[m].size(); ++i)
            CHECK(rr.w[m][i] == f.w[m][i]);
    }

    const auto flat = evolve_forward(
        GeometryModel::flat(2, 2.0, 1.0 / 8, Layout::Planar), 0.1);
    const auto rf = reverse(flat);
    for (const auto& slice : rf.w)
        for (double v : slice) CHECK(v == 0.0);
}

TEST_CASE("bump amplitude decays under the flow") {
    const auto f = evolve_forward(bump_model(), 0.1);
    double prev = 1e100;
    for (const auto& slice : f.w) {
        double sup = 0.0;
        for (double v : slice) sup = std::max(sup, std::abs(v));
        CHECK(sup <= prev + 1e-12);
        prev = sup;
    }
    CHECK(prev < 0.1);
}

TEST_CASE("flow keeps the exterior flat to solver tolerance") {
    const auto f = evolve_forward(bump_model(), 0.05);
    const auto& g = f.grid;
    const auto& last = f.w.back();
    for (int iy = 0; iy < g.per_side; ++iy)
        for (int ix = 0; ix < g.per_side; ++ix) {
            if (std::abs(g.x(ix)) < g.half_width - 1e-9 &&
                std::abs(g.y(iy)) < g.half_width - 1e-9)
                continue;
            CHECK(std::abs(last[g.index(ix, iy)]) <= 1e-10);
        }
}

TEST_CASE("grid refinement shrinks the flow error at second order") {
    const double T = 0.05;
    FlowOptions opts;
    opts.dt = 0.001;
    const auto coarse = evolve_forward(bump_model(2.0, 1.0 / 4), T, opts);
    const auto medium = evolve_forward(bump_model(2.0, 1.0 / 8), T, opts);
    const auto fine = evolve_forward(bump_model(2.0, 1.0 / 16), T, opts);

    auto err = [&](const FlowSolution& f) {
        double e = 0.0;
        for (int iy = 0; iy < f.grid.per_side; ++iy)
            for (int ix = 0; ix < f.grid.per_side; ++ix) {
                const double x = f.grid.x(ix), y = f.grid.y(iy);
                e = std::max(e, std::abs(f.w_at(x, y, T) - fine.w_at(x, y, T)));
            }
        return e;
    };
    CHECK(err(coarse) >= 3.0 * err(medium));
}

TEST_CASE("certificates carry the advertised constants") {
    const auto flat = evolve_forward(
        GeometryModel::flat(2, 2.0, 1.0 / 8, Layout::Planar), 0.1);
    const auto cf = certify(flat);
    CHECK(cf.k0 == 0.0);
    CHECK(cf.alpha3 == 0.0);
    CHECK(cf.metric_factor == 1.0);
    CHECK(cf.distance_factor == 1.0);
    CHECK(cf.volume_factor == 1.0);

    // alpha3 = 2 (n-1) k0 with n = 2, k0 = 1
    const auto round = FlowSolution::still(GeometryModel::sphere(1.0, 1.0 / 16));
    const auto cr = certify(round);
    CHECK(cr.k0 == 1.0);
    CHECK(cr.alpha3 == 2.0);

    const auto bump = evolve_forward(bump_model(), 0.1);
    const auto cb = certify(bump, 7, 3000);
    CHECK(cb.k0 > 0.0);
    CHECK(cb.alpha3 == doctest::Approx(2.0 * cb.k0));
    CHECK(cb.samples_checked == 3000);
    CHECK(cb.metric_factor == doctest::Approx(std::exp(cb.alpha3 * cb.T)));
}

TEST_CASE("volume element rate matches the curvature identity") {
    FlowOptions opts;
    opts.dt = 0.001;
    const auto flat = evolve_forward(
        GeometryModel::flat(2, 2.0, 1.0 / 8, Layout::Planar), 0.01, opts);
    CHECK(volume_element_rate_check(flat, 0.005).residual <= 1e-12);

    // round backward solution: total volume rate = volume/(1+t)
    const auto b = reverse(evolve_forward(
        GeometryModel::sphere(M_SQRT2, 1.0 / 16), 0.5, opts));
    const auto rc = volume_element_rate_check(b, 0.25);
    CHECK(rc.residual <= 1e-9);
    CHECK(rc.band_margin <= 1.0 + 1e-9);

    const auto bump = reverse(evolve_forward(bump_model(), 0.1, opts));
    const auto rb = volume_element_rate_check(bump, 0.05);
    CHECK(rb.residual <= 0.05);  // first-order stepping error
    CHECK(rb.band_margin <= 1.0 + 1e-6);

    CHECK_THROWS_AS(volume_element_rate_check(flat, 0.0), FlowError);
}

TEST_CASE("complexes built on a flow sample its conformal factor") {
    const auto f = evolve_forward(bump_model(), 0.1);
    const auto cx = build_complex(f, 1.0, {0.0, 0.05, 0.1});
    CHECK(cx.cell_count() > 0);
    const double h2 = f.model.spacing * f.model.spacing;
    for (std::size_t m = 0; m < cx.times.size(); ++m)
        for (std::size_t i = 0; i < cx.cell_count(); ++i) {
            const double expect = std::exp(
                2.0 * f.w_at(cx.position[i][0], cx.position[i][1],
                             cx.times[m])) * h2;
            CHECK(cx.volume[m][i] == doctest::Approx(expect).epsilon(1e-12));
        }
    CHECK_THROWS_AS(build_complex(f, 1.0, {0.0, 0.2}), GeometryError);
}
