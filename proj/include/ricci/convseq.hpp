#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "ricci/flow.hpp"
#include "ricci/geometry.hpp"
#include "ricci/green.hpp"

namespace ricci {

/// A one-parameter family of conformal initial data converging to a limit:
/// member k starts from (w_limit + eps_k psi) flattened outside radius A_k,
/// on the identity chart of a common grid.
struct SequenceSpec {
    GeometryModel limit;       // conformal plane model of the limit flow
    ScalarField2d psi_pert;    // perturbation profile
    double eps0 = 0.5;         // first amplitude
    double eps_decay = 0.5;    // eps_k = eps0 * eps_decay^(k-1), strictly down
    double A0 = 1.0;           // first flattening radius
    double A_step = 0.25;      // A_k = A0 + (k-1) A_step, strictly up
    double alpha = 0.5;        // common flow horizon
    double probe_radius = 0.0; // chart-norm compact (default 0.8 A0)
    double curvature_bound = 0.0;  // common sup |Rm| cap; 0 = measure only
};

struct FlowSequence {
    FlowSolution limit;                // forward flow over [0, alpha]
    std::vector<FlowSolution> members;
    std::vector<double> eps;
    std::vector<double> cutoffs;
    std::vector<double> chart_c0;      // sup |w_k - w_limit| on the compact
    std::vector<double> chart_c2;      // with first/second differences added
    double curvature_bound = 0.0;      // the common bound actually in force
    double metric_ratio = 0.0;         // measured uniform-equivalence constant
};

/// Forward-solves the limit and `count` members and certifies the common
/// curvature bound; throws if a member escapes a configured bound.
FlowSequence build_sequence(const SequenceSpec& spec, int count,
                            const FlowOptions& opts = {});

/// Backward kernels with delta end-data, realized as forward conjugate
/// heat solves on the time-reversed member flows.
struct KernelSequence {
    GreenRecord limit;
    std::vector<GreenRecord> members;
    double alpha = 0.0;
};

KernelSequence solve_sequence_kernels(const FlowSequence& seq, double ball,
                                      const GreenOptions& opts = {});

struct SequenceRow {
    int k = 0;
    double delta = 0.0;  // sup |u_k - u_limit| on the probe compact x window
    double ratio = 0.0;  // delta_k / delta_{k-1}; 0 on the first row
};

/// Uniform-convergence table on the compact of radius `probe_radius` and
/// the time window [tau_lo, tau_hi] (measured from the delta end).
std::vector<SequenceRow> compare_on_compact(const KernelSequence& ks,
                                            double probe_radius,
                                            double tau_lo, double tau_hi);

struct WeakIdentityRow {
    double t = 0.0;      // real (negative) time of the sample
    double lhs = 0.0;    // |sum u psi dV - psi(base)|
    double bound = 0.0;  // |t| max |Lap psi| over the support x window
};

/// Distributional end-condition check: pairing the kernel against a test
/// function stays within |t| sup |Lap psi| of psi at the basepoint.
/// `t1` < 0 bounds the window; psi must vanish on the boundary cells.
std::vector<WeakIdentityRow> weak_identity_check(const GreenRecord& rec,
                                                 const ScalarField2d& psi,
                                                 double t1);

class ConvSeqError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
