#include "ricci/numerics.hpp"

#include <array>

namespace ricci {

namespace {

// 16-point Gauss-Legendre nodes/weights on [-1,1].
constexpr std::array<double, 8> kNodes = {
    0.0950125098376374401853193, 0.2816035507792589132304605,
    0.4580167776572273863424194, 0.6178762444026437484466718,
    0.7554044083550030338951012, 0.8656312023878317438804679,
    0.9445750230732325760779884, 0.9894009349916499325961542};
constexpr std::array<double, 8> kWeights = {
    0.1894506104550684962853967, 0.1826034150449235888667637,
    0.1691565193950025381893121, 0.1495959888165767320815017,
    0.1246289712555338720524763, 0.0951585116824927848099251,
    0.0622535239386478928628438, 0.0271524594117540948517806};

double gl16(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
        s += kWeights[i] * (f(c - hw * kNodes[i]) + f(c + hw * kNodes[i]));
    }
    return s * hw;
}

}  // namespace

double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels) {
    if (panels < 1) throw std::invalid_argument("integrate_gl: panels < 1");
    const double w = (b - a) / panels;
    double s = 0.0;
    for (int p = 0; p < panels; ++p) {
        s += gl16(f, a + p * w, a + (p + 1) * w);
    }
    return s;
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol) {
    double prev = integrate_gl(f, a, b, 1);
    for (int panels = 2; panels <= 4096; panels *= 2) {
        const double cur = integrate_gl(f, a, b, panels);
        const double scale = std::max({std::abs(cur), std::abs(prev), 1e-300});
        if (std::abs(cur - prev) <= rel_tol * scale) return cur;
        prev = cur;
    }
    return prev;
}

std::vector<double> uniform_time_grid(double t0, double t1, double dt) {
    if (!(t1 > t0) || !(dt > 0.0))
        throw std::invalid_argument("uniform_time_grid: bad bounds or step");
    const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt - 1e-12)));
    std::vector<double> g(n + 1);
    for (int i = 0; i <= n; ++i) g[i] = t0 + (t1 - t0) * i / n;
    g.back() = t1;
    return g;
}

std::vector<double> graded_time_grid(double t0, double t1, double dt0,
                                     double dt_max, double growth) {
    if (!(t1 > t0) || !(dt0 > 0.0) || !(growth >= 1.0) || !(dt_max >= dt0))
        throw std::invalid_argument("graded_time_grid: bad parameters");
    std::vector<double> g{t0};
    double dt = dt0;
    double t = t0;
    while (t < t1 - 1e-15 * (t1 - t0)) {
        t = std::min(t + dt, t1);
        g.push_back(t);
        dt = std::min(dt * growth, dt_max);
    }
    g.back() = t1;
    return g;
}

}  // namespace ricci
