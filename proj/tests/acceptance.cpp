// Acceptance harness: runs the eight bundled verification suites and
// prints exactly one verdict line per criterion.  Exit status 0 iff all
// criteria pass.
#include <cstdio>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "ricci/suites.hpp"

using namespace ricci;

namespace {

struct Criterion {
    const char* suite;
    const char* label;
};

const std::vector<Criterion> kCriteria = {
    {"mass", "mass conservation of adjoint solves on all geometries"},
    {"oracle", "agreement with the free-space kernel and dense propagator"},
    {"green", "nested-ball kernel monotonicity, domination, convergence"},
    {"maxprin", "seeded non-positivity, energy estimate, exact constants"},
    {"gaussian", "Gaussian bound fit windows, held-out bound, majorant"},
    {"volume", "ball-volume comparison ratios and closed forms"},
    {"convseq", "kernel convergence along a perturbed metric sequence"},
    {"certify", "flow certificates: arithmetic and band checks"},
};

}  // namespace

int main() {
    SuiteOptions opts;
    opts.jobs = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
    int failures = 0;
    for (std::size_t i = 0; i < kCriteria.size(); ++i) {
        const auto& cr = kCriteria[i];
        bool pass = false;
        std::string detail;
        try {
            const auto res = run_suite(cr.suite, opts);
            pass = res.pass();
            for (const auto& c : res.checks)
                if (!c.pass)
                    detail += "\n    failed: " + c.name + " (measured " +
                              format_g17(c.measured) +
                              (c.lower_bound ? " >= " : " <= ") +
                              format_g17(c.required) + ")";
        } catch (const std::exception& e) {
            detail = std::string("\n    threw: ") + e.what();
        }
        std::printf("%s criterion %zu (%s): %s%s\n", pass ? "PASS" : "FAIL",
                    i + 1, cr.suite, cr.label, detail.c_str());
        std::fflush(stdout);
        if (!pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
