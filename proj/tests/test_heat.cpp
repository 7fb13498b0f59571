#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ricci/flow.hpp"
#include "ricci/heat.hpp"
#include "ricci/numerics.hpp"
#include "ricci/oracles.hpp"

using namespace ricci;

namespace {

DiscreteComplex flat_disk(double h, double ball, std::vector<double> times) {
    return build_complex(GeometryModel::flat(2, 2.0, h), ball,
                         std::move(times));
}

double max_abs(const std::vector<std::vector<double>>& rows) {
    double m = 0.0;
    for (const auto& r : rows)
        for (double v : r) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

TEST_CASE("discrete delta has unit mass and local support") {
    const auto cx = flat_disk(1.0 / 16, 1.0, {0.0, 0.1});
    const auto u = discrete_delta(cx, 3, 0.0);
    double m = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) m += u[i] * cx.volume[0][i];
    CHECK(m == 1.0);

    const auto v = discrete_delta(cx, 5, 0.0);
    for (std::size_t i = 0; i < u.size(); ++i) CHECK(u[i] * v[i] == 0.0);

    CHECK_THROWS_AS(discrete_delta(cx, static_cast<int>(cx.cell_count()) - 1,
                                   0.0),
                    HeatError);
}

TEST_CASE("Neumann conjugate solves conserve mass to round-off") {
    const auto cx = flat_disk(1.0 / 32, 1.0, uniform_time_grid(0.0, 0.25, 0.002));
    const auto f = solve_conjugate_forward(cx, 0, 0.0, BoundaryKind::Neumann,
                                           0.25);
    for (double t : f.times)
        CHECK(std::abs(mass(cx, f, t) - 1.0) <= 1e-12);
}

TEST_CASE("mass conservation holds on the expanding round background") {
    const auto cx = build_complex(GeometryModel::sphere(M_SQRT2, 1.0 / 24),
                                  M_PI * M_SQRT2,
                                  uniform_time_grid(0.0, 1.0, 0.005));
    const auto f = solve_conjugate_forward(cx, 0, 0.0, BoundaryKind::Neumann,
                                           1.0);
    for (double t : f.times)
        CHECK(std::abs(mass(cx, f, t) - 1.0) <= 1e-12);
}

TEST_CASE("short-time kernel approaches the closed-form amplitude") {
    const double h = 1.0 / 64;
    const double tau = 4.0 * h * h;
    const auto cx =
        flat_disk(h, 1.0, uniform_time_grid(0.0, tau, tau / 400.0));
    SolveOptions opts;
    opts.theta = 0.5;
    const auto f =
        solve_conjugate_forward(cx, 0, 0.0, BoundaryKind::Neumann, tau, opts);
    const double expect = flat_heat_kernel(2, 0.0, tau);
    CHECK(f.values.back()[0] == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("Dirichlet mass leaks and stays below the Neumann solution") {
    const auto cx = flat_disk(1.0 / 32, 0.5, uniform_time_grid(0.0, 0.25, 0.002));
    const auto fd = solve_conjugate_forward(cx, 0, 0.0, BoundaryKind::Dirichlet,
                                            0.25);
    const auto fn = solve_conjugate_forward(cx, 0, 0.0, BoundaryKind::Neumann,
                                            0.25);
    double prev = 1.0;
    for (std::size_t m = 1; m < fd.times.size(); ++m) {
        const double md = mass(cx, fd, fd.times[m]);
        CHECK(md < prev);
        CHECK(md > 0.0);
        prev = md;
    }
    for (std::size_t m = 0; m < fd.times.size(); ++m)
        for (std::size_t i = 0; i < cx.cell_count(); ++i)
            CHECK(fd.values[m][i] <= fn.values[m][i] + 1e-10);
}

TEST_CASE("kernels stay non-negative") {
    const auto cx = flat_disk(1.0 / 32, 1.0, uniform_time_grid(0.0, 0.25, 0.002));
    for (auto bc : {BoundaryKind::Neumann, BoundaryKind::Dirichlet}) {
        const auto f = solve_conjugate_forward(cx, 0, 0.0, bc, 0.25);
        for (const auto& row : f.values)
            for (double v : row) CHECK(v >= 0.0);
    }
}

TEST_CASE("kernel symmetry on a static metric") {
    const auto cx = build_complex(
        GeometryModel::flat(2, 1.0, 1.0 / 8, Layout::Planar), 0.6,
        uniform_time_grid(0.0, 0.1, 0.001));
    const int x = cx.base_cell;
    int y = -1;
    for (std::size_t i = 0; i < cx.cell_count(); ++i)
        if (!cx.is_boundary[i] && cx.dist[0][i] > 0.2 && y < 0)
            y = static_cast<int>(i);
    REQUIRE(y >= 0);
    const auto fx = solve_conjugate_forward(cx, x, 0.0, BoundaryKind::Neumann,
                                            0.1);
    const auto fy = solve_conjugate_forward(cx, y, 0.0, BoundaryKind::Neumann,
                                            0.1);
    CHECK(fx.values.back()[y] ==
          doctest::Approx(fy.values.back()[x]).epsilon(1e-8));
}

TEST_CASE("constants are exact solutions with no coefficients") {
    const auto cx = flat_disk(1.0 / 16, 1.0, uniform_time_grid(0.0, 0.2, 0.01));
    CoefficientData coeffs;
    coeffs.edge_drift.assign(cx.edges.size(), 0.0);
    coeffs.potential.assign(cx.cell_count(), 0.0);
    const auto f = solve_linear_parabolic(
        cx, coeffs, std::vector<double>(cx.cell_count(), 2.5), nullptr,
        BoundaryKind::Neumann, 0.0, 0.2);
    for (const auto& row : f.values)
        for (double v : row) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("a constant potential grows the mean exponentially") {
    const double beta = 0.5, T = 0.5;
    const auto cx = flat_disk(1.0 / 16, 1.0, uniform_time_grid(0.0, T, 0.002));
    CoefficientData coeffs;
    coeffs.edge_drift.assign(cx.edges.size(), 0.0);
    coeffs.potential.assign(cx.cell_count(), beta);
    coeffs.alpha2 = beta;
    const auto f = solve_linear_parabolic(
        cx, coeffs, std::vector<double>(cx.cell_count(), 1.0), nullptr,
        BoundaryKind::Neumann, 0.0, T);
    const double total = cx.total_volume(0);
    CHECK(mass(cx, f, T) / total ==
          doctest::Approx(std::exp(beta * T)).epsilon(1e-3));
}

TEST_CASE("non-positive data and forcing keep the solution non-positive") {
    const auto cx = flat_disk(1.0 / 16, 1.0, uniform_time_grid(0.0, 0.3, 0.005));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(-1.0, 0.0);
    for (int trial = 0; trial < 3; ++trial) {
        CoefficientData coeffs;
        coeffs.alpha1 = 0.4;
        coeffs.alpha2 = 0.8;
        coeffs.edge_drift.resize(cx.edges.size());
        coeffs.potential.resize(cx.cell_count());
        std::uniform_real_distribution<double> da(-coeffs.alpha1, coeffs.alpha1);
        std::uniform_real_distribution<double> db(-coeffs.alpha2, coeffs.alpha2);
        for (auto& a : coeffs.edge_drift) a = da(rng);
        for (auto& b : coeffs.potential) b = db(rng);
        std::vector<double> u0(cx.cell_count());
        for (auto& u : u0) u = unif(rng);
        const auto f = solve_linear_parabolic(
            cx, coeffs, u0, [](int, double) { return -0.1; },
            BoundaryKind::Neumann, 0.0, 0.3);
        CHECK(max_abs(f.values) >= 0.0);
        for (const auto& row : f.values)
            for (double v : row) CHECK(v <= 1e-8);
    }
}

TEST_CASE("coefficient bounds are validated against the samples") {
    const auto cx = flat_disk(1.0 / 16, 1.0, {0.0, 0.1});
    CoefficientData coeffs;
    coeffs.edge_drift.assign(cx.edges.size(), 0.5);
    coeffs.potential.assign(cx.cell_count(), 0.0);
    coeffs.alpha1 = 0.1;  // below the actual sup
    CHECK_THROWS_AS(solve_linear_parabolic(cx, coeffs,
                                           std::vector<double>(cx.cell_count(),
                                                               0.0),
                                           nullptr, BoundaryKind::Neumann, 0.0,
                                           0.1),
                    HeatError);
}

TEST_CASE("partial masses reproduce the flat radial integral") {
    const double t = 0.02;
    const auto cx =
        flat_disk(1.0 / 64, 1.0, uniform_time_grid(0.0, t, t / 400.0));
    SolveOptions opts;
    opts.theta = 0.5;
    const auto f =
        solve_conjugate_forward(cx, 0, 0.0, BoundaryKind::Neumann, t, opts);
    const std::vector<double> radii{0.25, 0.4, 0.6, 2.0};
    const auto prof = mass_growth_profile(cx, f, radii, t);
    double prev = 0.0;
    for (const auto& [R, m] : prof) {
        CHECK(m >= prev);
        prev = m;
        if (R < 0.7) {
            const double expect = 1.0 - std::exp(-R * R / (4.0 * t));
            CHECK(m == doctest::Approx(expect).epsilon(0.01));
        }
    }
    CHECK(prof.back().second == doctest::Approx(mass(cx, f, t)).epsilon(1e-12));
}

TEST_CASE("implicit stepping converges at first order to the dense propagator") {
    const auto make = [](double dt) {
        return flat_disk(1.0 / 8, 0.4, uniform_time_grid(0.0, 0.1, dt));
    };
    const auto cx0 = make(0.01);
    REQUIRE(cx0.cell_count() <= 20);
    const auto exact =
        dense_heat_solve(cx0, BoundaryKind::Neumann,
                         discrete_delta(cx0, 0, 0.0), 0.1);
    auto err = [&](double dt) {
        const auto cx = make(dt);
        const auto f = solve_conjugate_forward(cx, 0, 0.0,
                                               BoundaryKind::Neumann, 0.1);
        double e = 0.0;
        for (std::size_t i = 0; i < exact.size(); ++i)
            e = std::max(e, std::abs(f.values.back()[i] - exact[i]));
        return e;
    };
    const double e1 = err(0.01), e2 = err(0.005);
    CHECK(e1 / e2 >= 1.8);  // first-order in the step
    CHECK(e2 < 0.05);
}
