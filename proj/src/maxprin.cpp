#include "ricci/maxprin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>

#include "ricci/numerics.hpp"

namespace ricci {

double CutoffData::h(std::size_t cell, double t) const {
    if (t < -1e-12 || t > eta + 1e-12)
        throw MaxPrinError("cutoff weight evaluated outside [0, eta]");
    return -r0[cell] * r0[cell] / (4.0 * (2.0 * eta - t));
}

double CutoffData::h_time_derivative(std::size_t cell, double t) const {
    if (t < -1e-12 || t > eta + 1e-12)
        throw MaxPrinError("cutoff weight evaluated outside [0, eta]");
    const double d = 2.0 * eta - t;
    return -r0[cell] * r0[cell] / (4.0 * d * d);
}

CutoffData build_cutoff(const DiscreteComplex& cx, const FlowCertificate& cert,
                        const CoefficientData& coeffs, double lambda,
                        double R) {
    if (!(lambda > 0.0)) throw MaxPrinError("build_cutoff: lambda must be > 0");
    if (!(R >= 1.0)) throw MaxPrinError("build_cutoff: R must be >= 1");
    CutoffData cut;
    cut.lambda = lambda;
    cut.alpha3 = cert.alpha3;
    cut.T = cert.T;
    cut.R = R;
    cut.n = cert.n;
    cut.lambda1 = lambda * std::exp(cert.alpha3 * cert.T);
    const double cap = 1.0 / (8.0 * cut.lambda1);
    cut.eta = cert.alpha3 > 0.0
                  ? std::min(cap, std::log(9.0 / 8.0) / cert.alpha3)
                  : std::min(cap, cert.T);
    cut.C1 = 2.0 * coeffs.alpha2 + 4.0 * coeffs.alpha1 * coeffs.alpha1 +
             cut.n * cert.alpha3 / 2.0;
    cut.r0 = distance_to_base(cx, cx.times.front());
    cut.phiR.resize(cx.cell_count());
    for (std::size_t i = 0; i < cx.cell_count(); ++i)
        cut.phiR[i] = cubic_ramp(cut.r0[i] - R);
    // the window is short enough that the weight dominates the growth
    // term at t = 0 on every cell
    for (std::size_t i = 0; i < cx.cell_count(); ++i) {
        const double r2 = cut.r0[i] * cut.r0[i];
        if (cut.h(i, 0.0) > -cut.lambda1 * r2 + 1e-9 * (1.0 + r2))
            throw MaxPrinError("build_cutoff: weight fails to dominate");
    }
    return cut;
}

namespace {

constexpr double kPi = 3.14159265358979323846;

// bounded smooth field: three sinusoidal modes with amplitudes summing to 1
class SmoothField {
public:
    explicit SmoothField(std::mt19937_64& gen) {
        std::uniform_real_distribution<double> freq(0.3, 1.6);
        std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
        std::uniform_real_distribution<double> amp(0.3, 1.0);
        double total = 0.0;
        for (int m = 0; m < 3; ++m) {
            kx_[m] = freq(gen);
            ky_[m] = freq(gen);
            ph_[m] = phase(gen);
            c_[m] = amp(gen);
            total += c_[m];
        }
        for (int m = 0; m < 3; ++m) c_[m] /= total;
    }

    double operator()(double x, double y) const {
        double s = 0.0;
        for (int m = 0; m < 3; ++m)
            s += c_[m] * std::sin(kx_[m] * x + ky_[m] * y + ph_[m]);
        return s;
    }

private:
    std::array<double, 3> kx_, ky_, ph_, c_;
};

}  // namespace

std::function<double(int, double)> RandomInstance::forcing() const {
    return [s = slack](int i, double) { return s[i]; };
}

RandomInstance random_instance(std::uint64_t seed, const DiscreteComplex& cx,
                               double alpha1, double alpha2) {
    if (alpha1 < 0.0 || alpha2 < 0.0)
        throw MaxPrinError("random_instance: bounds must be non-negative");
    std::mt19937_64 gen(seed);
    const SmoothField fa1(gen), fa2(gen), fb(gen), fu(gen), ff(gen);
    std::uniform_real_distribution<double> frac(0.3, 1.0);
    const double amp_a = frac(gen), amp_b = frac(gen);
    std::uniform_real_distribution<double> uamp(0.5, 2.0);
    std::uniform_real_distribution<double> famp(0.1, 1.0);
    const double au = uamp(gen), af = famp(gen);

    RandomInstance inst;
    inst.coeffs.alpha1 = alpha1;
    inst.coeffs.alpha2 = alpha2;
    inst.coeffs.edge_drift.resize(cx.edges.size());
    const double ca = alpha1 * amp_a / std::sqrt(2.0);
    for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        const auto [a, b] = cx.edges[e];
        const double mx = 0.5 * (cx.position[a][0] + cx.position[b][0]);
        const double my = 0.5 * (cx.position[a][1] + cx.position[b][1]);
        double dx = cx.position[b][0] - cx.position[a][0];
        double dy = cx.position[b][1] - cx.position[a][1];
        const double len = std::hypot(dx, dy);
        dx /= len;
        dy /= len;
        inst.coeffs.edge_drift[e] =
            ca * (fa1(mx, my) * dx + fa2(mx, my) * dy);
    }
    inst.coeffs.potential.resize(cx.cell_count());
    inst.u0.resize(cx.cell_count());
    inst.slack.resize(cx.cell_count());
    const bool zero_u0 = seed % 5 == 0;
    const bool zero_slack = seed % 3 == 0;
    for (std::size_t i = 0; i < cx.cell_count(); ++i) {
        const double x = cx.position[i][0], y = cx.position[i][1];
        inst.coeffs.potential[i] = alpha2 * amp_b * fb(x, y);
        inst.u0[i] = zero_u0 ? 0.0
                             : -au * (0.05 + 0.475 * (1.0 + fu(x, y)));
        inst.slack[i] = zero_slack ? 0.0
                                   : -af * (0.05 + 0.475 * (1.0 + ff(x, y)));
    }
    inst.coeffs.validate(cx);
    return inst;
}

double check_conclusion(const SpaceTimeField& field) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& row : field.values)
        for (double v : row) worst = std::max(worst, v);
    return worst;
}

namespace {

double positive_part(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

EnergyReport energy_inequality_check(const DiscreteComplex& cx,
                                     const SpaceTimeField& field,
                                     const CutoffData& cut) {
    const double t0 = field.times.front();
    if (field.times.back() - t0 < cut.eta - 1e-9)
        throw MaxPrinError(
            "energy_inequality_check: window exceeds the trajectory horizon");
    // time nodes covering [0, eta] in trajectory-relative time
    std::vector<std::size_t> nodes;
    for (std::size_t m = 0; m < field.times.size(); ++m)
        if (field.times[m] - t0 <= cut.eta + 1e-12) nodes.push_back(m);

    EnergyReport rep;
    std::vector<double> state(nodes.size()), grad_rate(nodes.size()),
        ann_rate(nodes.size());
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const std::size_t m = nodes[j];
        const double tau = std::min(field.times[m] - t0, cut.eta);
        const std::size_t mc = cx.time_index(field.times[m]);
        const auto& u = field.values[m];
        const auto& V = cx.volume[mc];
        double st = 0.0, ann = 0.0;
        for (std::size_t i = 0; i < cx.cell_count(); ++i) {
            const double up = positive_part(u[i]);
            if (up == 0.0) continue;
            const double eh = std::exp(cut.h(i, tau));
            st += cut.phiR[i] * cut.phiR[i] * eh * up * up * V[i];
            if (cut.r0[i] > cut.R && cut.r0[i] <= cut.R + 1.0)
                ann += eh * up * up * V[i];
        }
        state[j] = std::exp(-cut.C1 * tau) * st;
        ann_rate[j] = ann;
        if (j == 0) rep.initial = st;
        double gr = 0.0;
        for (std::size_t e = 0; e < cx.edges.size(); ++e) {
            const auto [a, b] = cx.edges[e];
            const double d = positive_part(u[b]) - positive_part(u[a]);
            if (d == 0.0) continue;
            const double wa = cut.phiR[a] * cut.phiR[a] *
                              std::exp(cut.h(a, tau));
            const double wb = cut.phiR[b] * cut.phiR[b] *
                              std::exp(cut.h(b, tau));
            gr += cx.conductance[e] * d * d * 0.5 * (wa + wb);
        }
        grad_rate[j] = gr;
    }

    // cumulative trapezoids in trajectory time
    double grad_acc = 0.0, ann_acc = 0.0;
    const double gfac = std::exp(-cut.C1 * cut.eta) / 8.0;
    rep.margin = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        if (j > 0) {
            const double dt = std::min(field.times[nodes[j]] - t0, cut.eta) -
                              std::min(field.times[nodes[j - 1]] - t0, cut.eta);
            grad_acc += 0.5 * dt * (grad_rate[j - 1] + grad_rate[j]);
            ann_acc += 0.5 * dt * (ann_rate[j - 1] + ann_rate[j]);
        }
        rep.state_max = std::max(rep.state_max, state[j]);
        rep.grad_max = std::max(rep.grad_max, gfac * grad_acc);
        rep.annulus = 32.0 * std::exp(cut.alpha3 * cut.T) * ann_acc;
        const double lhs = state[j] + gfac * grad_acc;
        rep.margin = std::max(rep.margin, lhs - (rep.annulus + rep.initial));
    }
    rep.scale = std::max({rep.state_max, rep.annulus, rep.initial, 1e-300});
    return rep;
}

double growth_condition_value(const DiscreteComplex& cx,
                              const SpaceTimeField& field, double lambda) {
    if (!(lambda > 0.0))
        throw MaxPrinError("growth_condition_value: lambda must be > 0");
    std::vector<double> slab(field.times.size(), 0.0);
    for (std::size_t m = 0; m < field.times.size(); ++m) {
        const std::size_t mc = cx.time_index(field.times[m]);
        const auto& rt = cx.dist[std::min(mc, cx.dist.size() - 1)];
        const auto& u = field.values[m];
        const auto& V = cx.volume[mc];
        double s = 0.0;
        for (std::size_t i = 0; i < cx.cell_count(); ++i) {
            const double up = positive_part(u[i]);
            if (up > 0.0) s += up * up * std::exp(-lambda * rt[i] * rt[i]) * V[i];
        }
        slab[m] = s;
    }
    double total = 0.0;
    for (std::size_t m = 1; m < field.times.size(); ++m)
        total += 0.5 * (field.times[m] - field.times[m - 1]) *
                 (slab[m] + slab[m - 1]);
    return total;
}

namespace {

// per-cell squared gradient magnitude of a cell field from the averaged
// one-sided edge slopes along each coordinate axis
std::vector<double> grad_sq(const DiscreteComplex& cx,
                            const std::vector<double>& f,
                            const std::vector<double>& lengths) {
    const std::size_t n = cx.cell_count();
    std::vector<double> sx(n, 0.0), sy(n, 0.0);
    std::vector<int> cxn(n, 0), cyn(n, 0);
    for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        const auto [a, b] = cx.edges[e];
        const double slope = (f[b] - f[a]) / lengths[e];
        const bool xaxis =
            std::abs(cx.position[b][0] - cx.position[a][0]) >
            std::abs(cx.position[b][1] - cx.position[a][1]);
        if (xaxis) {
            sx[a] += slope;
            sx[b] += slope;
            ++cxn[a];
            ++cxn[b];
        } else {
            sy[a] += slope;
            sy[b] += slope;
            ++cyn[a];
            ++cyn[b];
        }
    }
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double gx = cxn[i] ? sx[i] / cxn[i] : 0.0;
        const double gy = cyn[i] ? sy[i] / cyn[i] : 0.0;
        out[i] = gx * gx + gy * gy;
    }
    return out;
}

}  // namespace

CutoffResiduals cutoff_residuals(const DiscreteComplex& cx,
                                 const CutoffData& cut) {
    CutoffResiduals res;
    res.damped = -std::numeric_limits<double>::infinity();
    const double damp = std::exp(-cut.alpha3 * cut.eta);
    // sample cells: rays through the base on which the stencil distance is
    // a faithful sampling of the metric distance (all cells when radial;
    // the axes and diagonals of a planar grid, away from its anisotropy)
    std::vector<char> sampled(cx.cell_count(), 1);
    if (cx.layout == Layout::Planar) {
        const double bx = cx.position[cx.base_cell][0];
        const double by = cx.position[cx.base_cell][1];
        for (std::size_t i = 0; i < cx.cell_count(); ++i) {
            const double dx = std::abs(cx.position[i][0] - bx);
            const double dy = std::abs(cx.position[i][1] - by);
            sampled[i] = dx < 1e-9 || dy < 1e-9 || std::abs(dx - dy) < 1e-9;
        }
    }
    for (double frac : {0.0, 0.5, 0.99}) {
        const double tau = frac * cut.eta;
        std::vector<double> hv(cx.cell_count());
        for (std::size_t i = 0; i < cx.cell_count(); ++i)
            hv[i] = cut.h(i, tau);
        const auto g2 = grad_sq(cx, hv, cx.edge_length0);
        for (std::size_t i = 0; i < cx.cell_count(); ++i) {
            if (cx.is_boundary[i] || !sampled[i]) continue;
            const double ht = cut.h_time_derivative(i, tau);
            res.eikonal = std::max(res.eikonal, std::abs(ht + g2[i]));
            res.damped = std::max(res.damped, ht + damp * g2[i]);
        }
    }
    for (std::size_t e = 0; e < cx.edges.size(); ++e) {
        const auto [a, b] = cx.edges[e];
        res.grad_phi0 = std::max(res.grad_phi0,
                                 std::abs(cut.phiR[b] - cut.phiR[a]) /
                                     cx.edge_length0[e]);
    }
    // lengths under g(t) recovered from the volume scaling (dim 2 families
    // evolve; higher-dimensional radial complexes are static)
    const auto& V0 = cx.volume[0];
    for (std::size_t m = 0; m < cx.time_count(); ++m) {
        const auto& V = cx.volume[m];
        for (std::size_t e = 0; e < cx.edges.size(); ++e) {
            const auto [a, b] = cx.edges[e];
            const double fac =
                std::pow(V[a] * V[b] / (V0[a] * V0[b]), 0.25);
            res.grad_phi_t =
                std::max(res.grad_phi_t, std::abs(cut.phiR[b] - cut.phiR[a]) /
                                             (cx.edge_length0[e] * fac));
        }
        if (cx.volumes_static) break;
    }
    return res;
}

}  // namespace ricci
