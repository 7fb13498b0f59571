#include "ricci/heat.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>

#include "ricci/numerics.hpp"

namespace ricci {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

// Graph Laplacian matrix K with (K u)_i = sum_j w_ij (u_i - u_j).  Under
// Dirichlet conditions the boundary cells are clamped to zero: couplings
// into them are dropped while the interior diagonal keeps the full flux.
SpMat stiffness(const DiscreteComplex& cx, BoundaryKind bc) {
    const int n = static_cast<int>(cx.cell_count());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(4 * cx.edges.size() + n);
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, 0.0);
    const bool dirichlet = bc == BoundaryKind::Dirichlet;
    for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        const auto [i, j] = cx.edges[e];
        const double w = cx.conductance[e];
        const bool bi = dirichlet && cx.is_boundary[i];
        const bool bj = dirichlet && cx.is_boundary[j];
        if (bi && bj) continue;
        if (bi) {
            trip.emplace_back(j, j, w);
            continue;
        }
        if (bj) {
            trip.emplace_back(i, i, w);
            continue;
        }
        trip.emplace_back(i, i, w);
        trip.emplace_back(j, j, w);
        trip.emplace_back(i, j, -w);
        trip.emplace_back(j, i, -w);
    }
    SpMat K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

// Upwinded drift operator: (D u)_i = V_i (a . grad u)_i with non-negative
// off-diagonal entries (each edge contributes the one-sided difference from
// the upwind side only).
SpMat drift_operator(const DiscreteComplex& cx, const CoefficientData& coeffs,
                     std::size_t m, BoundaryKind bc) {
    const int n = static_cast<int>(cx.cell_count());
    std::vector<Eigen::Triplet<double>> trip;
    const bool dirichlet = bc == BoundaryKind::Dirichlet;
    const auto& V = cx.volume[m];
    for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        const auto [a, b] = cx.edges[e];
        const double len = cx.edge_length0[e];
        const double ad = coeffs.edge_drift[e];
        // at cell a the derivative toward b is active when a points a -> b
        if (!(dirichlet && cx.is_boundary[a]) && ad > 0.0) {
            const double c = V[a] * ad / len;
            if (!(dirichlet && cx.is_boundary[b])) trip.emplace_back(a, b, c);
            trip.emplace_back(a, a, -c);
        }
        if (!(dirichlet && cx.is_boundary[b]) && ad < 0.0) {
            const double c = -V[b] * ad / len;
            if (!(dirichlet && cx.is_boundary[a])) trip.emplace_back(b, a, c);
            trip.emplace_back(b, b, -c);
        }
    }
    SpMat D(n, n);
    D.setFromTriplets(trip.begin(), trip.end());
    return D;
}

Eigen::VectorXd to_vec(std::span<const double> v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(),
                                             static_cast<long>(v.size()));
}

// Solves the per-step systems, re-using the factorization while the matrix
// is unchanged (time-independent volumes and a uniform step).
class StepSolver {
public:
    explicit StepSolver(bool symmetric) : symmetric_(symmetric) {}

    Eigen::VectorXd solve(const SpMat& A, const Eigen::VectorXd& rhs,
                          double key, const SolveOptions& opts) {
        if (opts.iterative && symmetric_) {
            Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper> cg;
            cg.setTolerance(opts.lin_tol);
            cg.setMaxIterations(opts.max_cg_iter);
            cg.compute(A);
            Eigen::VectorXd x = cg.solve(rhs);
            if (cg.info() != Eigen::Success)
                throw HeatError("linear solve failed to converge");
            return x;
        }
        if (!have_key_ || key != key_) {
            if (symmetric_) {
                ldlt_.compute(A);
                if (ldlt_.info() != Eigen::Success)
                    throw HeatError("sparse Cholesky factorization failed");
            } else {
                lu_.compute(A);
                if (lu_.info() != Eigen::Success)
                    throw HeatError("sparse LU factorization failed");
            }
            have_key_ = true;
            key_ = key;
        }
        if (symmetric_) return ldlt_.solve(rhs);
        return lu_.solve(rhs);
    }

private:
    bool symmetric_;
    bool have_key_ = false;
    double key_ = 0.0;
    Eigen::SimplicialLDLT<SpMat> ldlt_;
    Eigen::SparseLU<SpMat> lu_;
};

void check_window(const DiscreteComplex& cx, std::size_t ms, std::size_t mT) {
    if (ms >= mT)
        throw HeatError("solve: start time must precede the final time");
    (void)cx;
}

}  // namespace

void CoefficientData::validate(const DiscreteComplex& cx) const {
    if (edge_drift.size() != cx.edges.size() ||
        potential.size() != cx.cell_count())
        throw HeatError("CoefficientData: size mismatch with the complex");
    double sa = 0.0, sb = 0.0;
    for (double a : edge_drift) sa = std::max(sa, std::abs(a));
    for (double b : potential) sb = std::max(sb, std::abs(b));
    if (sa > alpha1 + 1e-12 || sb > alpha2 + 1e-12)
        throw HeatError("CoefficientData: declared sups below the samples");
}

std::size_t SpaceTimeField::time_index(double t) const {
    for (std::size_t m = 0; m < times.size(); ++m)
        if (std::abs(times[m] - t) <= 1e-9 * std::max(1.0, std::abs(t)))
            return m;
    throw HeatError("field: time " + std::to_string(t) + " not stored");
}

std::vector<double> discrete_delta(const DiscreteComplex& cx, int y, double s) {
    if (y < 0 || static_cast<std::size_t>(y) >= cx.cell_count())
        throw HeatError("discrete_delta: cell out of range");
    if (cx.is_boundary[y])
        throw HeatError("discrete_delta: source on the boundary");
    const std::size_t m = cx.time_index(s);
    std::vector<double> u(cx.cell_count(), 0.0);
    u[y] = 1.0 / cx.volume[m][y];
    return u;
}

SpaceTimeField solve_conjugate_from(const DiscreteComplex& cx,
                                    std::vector<double> u0, double s,
                                    BoundaryKind bc, double T,
                                    const SolveOptions& opts) {
    const std::size_t ms = cx.time_index(s), mT = cx.time_index(T);
    check_window(cx, ms, mT);
    if (u0.size() != cx.cell_count())
        throw HeatError("solve: initial field size mismatch");
    const int n = static_cast<int>(cx.cell_count());
    if (bc == BoundaryKind::Dirichlet)
        for (int i = 0; i < n; ++i)
            if (cx.is_boundary[i]) u0[i] = 0.0;

    const SpMat K = stiffness(cx, bc);
    StepSolver solver(true);
    SpaceTimeField out;
    out.equation = EquationKind::ConjugateHeat;
    out.bc = bc;
    out.source_time = s;
    out.times.assign(cx.times.begin() + ms, cx.times.begin() + mT + 1);
    out.values.push_back(std::move(u0));

    Eigen::VectorXd u = to_vec(out.values[0]);
    for (std::size_t m = ms; m < mT; ++m) {
        const double dt = cx.times[m + 1] - cx.times[m];
        const auto& Vc = cx.volume[m];
        const auto& Vn = cx.volume[m + 1];
        // conservative update: V^{m+1} u^{m+1} - V^m u^m = -dt K u^{theta};
        // Neumann column sums vanish, so the total mass is carried exactly.
        SpMat A = (opts.theta * dt) * K;
        for (int i = 0; i < n; ++i) A.coeffRef(i, i) += Vn[i];
        Eigen::VectorXd rhs = to_vec(Vc).cwiseProduct(u);
        if (opts.theta < 1.0) rhs -= ((1.0 - opts.theta) * dt) * (K * u);
        const double key = cx.volumes_static ? dt : static_cast<double>(m) + 1e9;
        u = solver.solve(A, rhs, key, opts);
        out.values.emplace_back(u.data(), u.data() + n);
    }
    for (const auto& row : out.values)
        for (double v : row)
            if (!std::isfinite(v)) throw HeatError("solve: non-finite value");
    return out;
}

SpaceTimeField solve_conjugate_forward(const DiscreteComplex& cx, int y,
                                       double s, BoundaryKind bc, double T,
                                       const SolveOptions& opts) {
    SpaceTimeField f =
        solve_conjugate_from(cx, discrete_delta(cx, y, s), s, bc, T, opts);
    f.source_cell = y;
    return f;
}

SpaceTimeField solve_linear_parabolic(
    const DiscreteComplex& cx, const CoefficientData& coeffs,
    std::vector<double> u0, const std::function<double(int, double)>& forcing,
    BoundaryKind bc, double s, double T, const SolveOptions& opts) {
    coeffs.validate(cx);
    const std::size_t ms = cx.time_index(s), mT = cx.time_index(T);
    check_window(cx, ms, mT);
    if (u0.size() != cx.cell_count())
        throw HeatError("solve: initial field size mismatch");
    const int n = static_cast<int>(cx.cell_count());
    if (bc == BoundaryKind::Dirichlet)
        for (int i = 0; i < n; ++i)
            if (cx.is_boundary[i]) u0[i] = 0.0;

    const SpMat K = stiffness(cx, bc);
    const bool has_drift = coeffs.alpha1 > 0.0;
    StepSolver solver(!has_drift);
    SpaceTimeField out;
    out.equation = EquationKind::LinearParabolic;
    out.bc = bc;
    out.source_time = s;
    out.times.assign(cx.times.begin() + ms, cx.times.begin() + mT + 1);
    out.values.push_back(std::move(u0));

    Eigen::VectorXd u = to_vec(out.values[0]);
    for (std::size_t m = ms; m < mT; ++m) {
        const double dt = cx.times[m + 1] - cx.times[m];
        if (opts.theta * dt * coeffs.alpha2 > 0.9)
            throw HeatError(
                "solve_linear_parabolic: step too large for the potential "
                "bound (diagonal sign guard)");
        const auto& Vn = cx.volume[m + 1];
        // V (u' - u)/dt = -K u' + D u' + V b u' + V f, solved implicitly so
        // the step matrix keeps the M-matrix sign structure.
        SpMat A = (opts.theta * dt) * K;
        if (has_drift)
            A -= (opts.theta * dt) * drift_operator(cx, coeffs, m + 1, bc);
        for (int i = 0; i < n; ++i)
            A.coeffRef(i, i) +=
                Vn[i] * (1.0 - opts.theta * dt * coeffs.potential[i]);
        Eigen::VectorXd rhs = to_vec(Vn).cwiseProduct(u);
        if (opts.theta < 1.0) {
            Eigen::VectorXd ex = -(K * u);
            if (has_drift) ex += drift_operator(cx, coeffs, m, bc) * u;
            for (int i = 0; i < n; ++i)
                ex[i] += Vn[i] * coeffs.potential[i] * u[i];
            rhs += ((1.0 - opts.theta) * dt) * ex;
        }
        if (forcing) {
            const double tf = cx.times[m] + opts.theta * dt;
            for (int i = 0; i < n; ++i)
                if (!(bc == BoundaryKind::Dirichlet && cx.is_boundary[i]))
                    rhs[i] += dt * Vn[i] * forcing(i, tf);
        }
        if (bc == BoundaryKind::Dirichlet)
            for (int i = 0; i < n; ++i)
                if (cx.is_boundary[i]) rhs[i] = 0.0;
        const double key = cx.volumes_static ? dt : static_cast<double>(m) + 1e9;
        u = solver.solve(A, rhs, key, opts);
        out.values.emplace_back(u.data(), u.data() + n);
    }
    for (const auto& row : out.values)
        for (double v : row)
            if (!std::isfinite(v)) throw HeatError("solve: non-finite value");
    return out;
}

double mass(const DiscreteComplex& cx, const SpaceTimeField& field, double t) {
    const std::size_t mf = field.time_index(t);
    const std::size_t mc = cx.time_index(t);
    const auto& u = field.values[mf];
    const auto& V = cx.volume[mc];
    std::vector<double> terms(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) terms[i] = u[i] * V[i];
    return kahan_sum(terms);
}

std::vector<std::pair<double, double>> mass_growth_profile(
    const DiscreteComplex& cx, const SpaceTimeField& field,
    std::span<const double> radii, double t) {
    const std::size_t mf = field.time_index(t);
    const std::size_t mc = cx.time_index(t);
    const int center = field.source_cell >= 0 ? field.source_cell : cx.base_cell;
    const auto d = center == cx.base_cell ? distance_to_base(cx, t)
                                          : distance_from_cell(cx, center, t);
    const auto& u = field.values[mf];
    const auto& V = cx.volume[mc];
    std::vector<std::pair<double, double>> out;
    out.reserve(radii.size());
    for (double R : radii) {
        std::vector<double> terms;
        terms.reserve(u.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            if (d[i] <= R) terms.push_back(u[i] * V[i]);
        out.emplace_back(R, kahan_sum(terms));
    }
    return out;
}

}  // namespace ricci
