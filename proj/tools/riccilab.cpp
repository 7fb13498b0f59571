#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ricci/config.hpp"
#include "ricci/report.hpp"
#include "ricci/suites.hpp"

namespace fs = std::filesystem;
using namespace ricci;

namespace {

std::string default_out_root() {
    if (const char* env = std::getenv("RICCILAB_OUT")) return env;
    return "artifacts";
}

std::string check_line(const CheckResult& c) {
    std::ostringstream out;
    out << (c.pass ? "  pass  " : "  FAIL  ") << c.name << "  (measured "
        << format_g17(c.measured) << (c.lower_bound ? " >= " : " <= ")
        << format_g17(c.required) << ")";
    return out.str();
}

/// Writes the suite artifacts and manifest under dir; returns the manifest.
Manifest emit(const SuiteResult& res, const fs::path& dir,
              const std::string& cfg_hash, double wall_seconds) {
    fs::create_directories(dir);
    Manifest m;
    m["suite"] = res.suite;
    m["config_hash"] = cfg_hash;
    m["artifact_version"] = 1;
    m["wall_clock_seconds"] = wall_seconds;
    m["pass"] = res.pass();
    Manifest checks = Manifest::array();
    for (const auto& c : res.checks) {
        Manifest j;
        j["name"] = c.name;
        j["measured"] = format_g17(c.measured);
        j["required"] = format_g17(c.required);
        j["kind"] = c.lower_bound ? "lower" : "upper";
        j["pass"] = c.pass;
        checks.push_back(std::move(j));
    }
    m["checks"] = std::move(checks);
    Manifest files = Manifest::array();
    for (const auto& [name, csv] : res.artifacts) {
        const std::string fname = name + ".csv";
        write_csv(dir / fname, csv);
        files.push_back(fname);
    }
    files.push_back("manifest.json");
    m["files"] = std::move(files);
    write_manifest(dir / "manifest.json", m);
    return m;
}

int run_one_suite(const std::string& name, const SuiteOptions& opts,
                  const fs::path& out_dir, const std::string& cfg_hash) {
    const auto t0 = std::chrono::steady_clock::now();
    SuiteOptions o = opts;
    o.out_dir = out_dir.string();
    fs::create_directories(out_dir);
    const auto res = run_suite(name, o);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    emit(res, out_dir, cfg_hash, wall);
    std::printf("[%s] %s  (%.1fs)\n", res.pass() ? "pass" : "FAIL",
                name.c_str(), wall);
    for (const auto& c : res.checks)
        std::puts(check_line(c).c_str());
    return res.pass() ? 0 : 1;
}

/// The bundled suites realize the checks of specific results; `verify`
/// prints which suite covers which claim.
const char* suite_topic(const std::string& name) {
    if (name == "mass") return "conservation identity of the adjoint solves";
    if (name == "oracle") return "agreement with closed-form and dense references";
    if (name == "green") return "exhaustion limit of Dirichlet/Neumann kernels";
    if (name == "maxprin") return "non-positivity and localized energy estimate";
    if (name == "gaussian") return "pointwise Gaussian upper bound and majorant";
    if (name == "volume") return "ball-volume comparison ratios";
    if (name == "convseq") return "kernel convergence along a metric sequence";
    if (name == "certify") return "curvature and velocity band certificates";
    return "";
}

int cmd_verify(const std::string& which, const SuiteOptions& opts,
               const fs::path& out_root) {
    std::vector<std::string> names;
    if (which == "all")
        names = suite_names();
    else
        names = {which};
    std::printf("%-10s %s\n", "suite", "covers");
    std::printf("%-10s %s\n", "-----", "------");
    for (const auto& n : names)
        std::printf("%-10s %s\n", n.c_str(), suite_topic(n));
    std::printf("\n");
    int rc = 0;
    for (const auto& n : names)
        rc |= run_one_suite(n, opts, out_root / n, config_hash("verify " + n));
    return rc;
}

int cmd_run(const std::string& config_path, const SuiteOptions& opts,
            const fs::path& out_root) {
    std::ifstream in(config_path);
    if (!in) {
        std::fprintf(stderr, "cannot open config '%s'\n", config_path.c_str());
        return 2;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto cfg = parse_config(text);

    const auto t0 = std::chrono::steady_clock::now();
    SuiteOptions o = opts;
    fs::path dir = out_root;
    if (cfg.has("experiment.out_dir")) dir = cfg.text("experiment.out_dir");
    o.out_dir = dir.string();
    fs::create_directories(dir);
    const auto res = run_experiment(cfg, o);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    emit(res, dir, config_hash(text), wall);
    std::printf("[%s] %s  (%.1fs)\n", res.pass() ? "pass" : "FAIL",
                res.suite.c_str(), wall);
    for (const auto& c : res.checks)
        std::puts(check_line(c).c_str());
    return res.pass() ? 0 : 1;
}

int cmd_report(const std::string& dir_path) {
    const fs::path dir(dir_path);
    const auto m = read_manifest(dir / "manifest.json");
    std::printf("suite: %s\nconfig hash: %s\npass: %s\n\n",
                m.at("suite").get<std::string>().c_str(),
                m.at("config_hash").get<std::string>().c_str(),
                m.at("pass").get<bool>() ? "true" : "false");
    Csv verdicts;
    verdicts.columns = {"check", "measured", "bound", "required", "verdict"};
    for (const auto& c : m.at("checks")) {
        verdicts.rows.push_back(
            {c.at("name").get<std::string>(),
             c.at("measured").get<std::string>(),
             c.at("kind").get<std::string>() == "lower" ? ">=" : "<=",
             c.at("required").get<std::string>(),
             c.at("pass").get<bool>() ? "pass" : "FAIL"});
    }
    std::fputs(render_table(verdicts).c_str(), stdout);
    for (const auto& f : m.at("files")) {
        const std::string name = f.get<std::string>();
        if (name.size() < 4 || name.substr(name.size() - 4) != ".csv")
            continue;
        const auto csv = read_csv(dir / name);
        std::printf("\n%s\n", name.c_str());
        std::fputs(render_table(csv).c_str(), stdout);
        // plot-ready columnar files: one whitespace-free column per file
        for (std::size_t c = 0; c < csv.columns.size(); ++c) {
            std::ofstream col(dir / (name.substr(0, name.size() - 4) + "." +
                                     csv.columns[c] + ".col"),
                              std::ios::binary);
            for (const auto& row : csv.rows) col << row[c] << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conjugate-heat kernel verification runner"};
    app.require_subcommand(1);

    SuiteOptions opts;
    std::string out_root = default_out_root();
    app.add_option("--jobs", opts.jobs, "parallel jobs within a suite");
    app.add_option("--seed", opts.seed, "base seed override");
    app.add_option("--tol-scale", opts.tol_scale,
                   "global tolerance multiplier for coarse smoke runs");
    app.add_option("--out", out_root, "output root directory");

    std::string config_path;
    auto* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("--config", config_path, "experiment config file")
        ->required();

    std::string suite = "all";
    auto* verify =
        app.add_subcommand("verify", "run the bundled acceptance suites");
    verify->add_option("suite", suite, "suite name or 'all'");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "render artifact tables");
    report->add_option("dir", report_dir, "artifact directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, opts, out_root);
        if (verify->parsed()) {
            if (suite != "all") {
                const auto names = suite_names();
                bool known = false;
                for (const auto& n : names) known |= (n == suite);
                if (!known) {
                    std::fprintf(stderr, "unknown suite '%s'\n", suite.c_str());
                    return 2;
                }
            }
            return cmd_verify(suite, opts, fs::path(out_root));
        }
        if (report->parsed()) return cmd_report(report_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
