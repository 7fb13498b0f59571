#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ricci/config.hpp"
#include "ricci/report.hpp"

namespace ricci {

struct SuiteOptions {
    std::uint64_t seed = 1;
    int jobs = 1;
    double tol_scale = 1.0;  // multiplies every tolerance (smoke runs)
    std::string out_dir;     // where failing trajectories are dumped ("" = off)
};

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double required = 0.0;
    bool lower_bound = false;  // pass iff measured >= required
    bool pass = false;
};

struct SuiteResult {
    std::string suite;
    std::vector<CheckResult> checks;
    std::vector<std::pair<std::string, Csv>> artifacts;

    bool pass() const;
};

/// The bundled desk-scale suites, one per acceptance criterion:
/// mass, oracle, green, maxprin, gaussian, volume, convseq, certify.
std::vector<std::string> suite_names();

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts = {});

/// Config-driven single experiment.  `experiment.kind` selects one of
/// maxprin | green | gaussian | convseq | oracle; the geometry / solver /
/// suite sections override the bundled parameters.  Unknown keys and
/// non-positive numeric parameters are rejected before any computation.
SuiteResult run_experiment(const Config& cfg, const SuiteOptions& opts = {});

class SuiteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ricci
