#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ricci {

/// Compensated (Kahan) summation; used wherever a sum feeds a tight
/// conservation tolerance.
inline double kahan_sum(std::span<const double> xs) {
    double s = 0.0, c = 0.0;
    for (double x : xs) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

/// Cubic ramp: 1 on (-inf,0], 0 on [1,inf), slope within [-1.5, 0].
inline double cubic_ramp(double x) {
    if (x <= 0.0) return 1.0;
    if (x >= 1.0) return 0.0;
    return 1.0 - x * x * (3.0 - 2.0 * x);
}

/// Composite 16-point Gauss-Legendre quadrature over [a,b] with `panels`
/// equal panels.
double integrate_gl(const std::function<double(double)>& f, double a, double b,
                    int panels);

/// Panel-doubling quadrature until two successive refinements agree to
/// `rel_tol` (relative to the magnitude of the result).
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double rel_tol);

/// Uniform time grid t0 < ... < t1 with step at most `dt` (last step snapped).
std::vector<double> uniform_time_grid(double t0, double t1, double dt);

/// Geometrically graded grid: first step `dt0`, growth factor `growth`,
/// step capped at `dt_max`.  Used for kernel solves that need resolution
/// near the initial delta.
std::vector<double> graded_time_grid(double t0, double t1, double dt0,
                                     double dt_max, double growth);

}  // namespace ricci
