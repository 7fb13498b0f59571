#include <string>

#include "doctest.h"
#include "ricci/config.hpp"
#include "ricci/suites.hpp"

using namespace ricci;

TEST_CASE("suite registry lists eight suites and rejects strangers") {
    const auto names = suite_names();
    CHECK(names.size() == 8);
    CHECK_THROWS_AS(run_suite("frobnicate"), SuiteError);
}

TEST_CASE("oracle experiment runs from a config") {
    const auto cfg = parse_config(
        "[experiment]\n"
        "kind = \"oracle\"\n"
        "[geometry]\n"
        "model = \"flat\"\n"
        "extent = 2.0\n"
        "spacing = 0.03125\n"
        "[suite]\n"
        "horizon = 0.1\n"
        "rel_tol = 0.05\n");
    const auto res = run_experiment(cfg);
    CHECK(res.suite == "oracle");
    CHECK(res.pass());
    REQUIRE(!res.artifacts.empty());
    CHECK(res.artifacts[0].second.columns ==
          std::vector<std::string>{"tau", "sup_rel_err"});
}

TEST_CASE("green experiment produces one convergence row per radius") {
    const auto cfg = parse_config(
        "[experiment]\n"
        "kind = \"green\"\n"
        "[geometry]\n"
        "model = \"flat\"\n"
        "extent = 2.2\n"
        "spacing = 0.03125\n"
        "[solver]\n"
        "dt = 0.005\n"
        "[suite]\n"
        "ks = [1, 1.5, 2]\n"
        "horizon = 0.25\n");
    const auto res = run_experiment(cfg);
    CHECK(res.suite == "green");
    REQUIRE(res.artifacts.size() == 1);
    CHECK(res.artifacts[0].second.rows.size() == 3);
    for (const auto& c : res.checks) CHECK(c.pass);
}

TEST_CASE("experiment configs are validated before any solve") {
    CHECK_THROWS_AS(
        run_experiment(parse_config("[experiment]\nkind = \"nope\"\n")),
        ConfigError);
    CHECK_THROWS_AS(run_experiment(parse_config(
                        "[experiment]\nkind = \"green\"\n"
                        "[geometry]\nmodel = \"flat\"\nspacing = -0.1\n")),
                    ConfigError);
    CHECK_THROWS_AS(run_experiment(parse_config(
                        "[experiment]\nkind = \"green\"\n"
                        "[geometry]\nmodel = \"flat\"\n"
                        "[suite]\ntypo = 1\n")),
                    ConfigError);
    // oracle needs a flat radial model, not a bump
    CHECK_THROWS_AS(run_experiment(parse_config(
                        "[experiment]\nkind = \"oracle\"\n"
                        "[geometry]\nmodel = \"bump\"\n")),
                    ConfigError);
}

TEST_CASE("tolerance scaling loosens upper bounds") {
    const auto cfg = parse_config(
        "[experiment]\n"
        "kind = \"oracle\"\n"
        "[geometry]\n"
        "model = \"flat\"\n"
        "extent = 2.0\n"
        "spacing = 0.0625\n"
        "[suite]\n"
        "horizon = 0.1\n"
        "rel_tol = 0.0001\n");  // far too tight for this coarse grid
    SuiteOptions strict;
    const auto tight = run_experiment(cfg, strict);
    CHECK(!tight.pass());
    SuiteOptions loose;
    loose.tol_scale = 1000.0;
    const auto ok = run_experiment(cfg, loose);
    CHECK(ok.checks[0].pass);
}
