// Command-line front end of the verification harness.
#include "diffext/verify.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace diffext::verify;

    SuiteConfig cfg;
    cfg.fixtures_dir = DIFFEXT_FIXTURE_DIR;
    std::string report_path, csv_path, fixture_out;
    bool timings = false, quiet = false, list = false;

    CLI::App app{"Randomized, seeded verification of the diffext invariants"};
    app.add_option("--suite", cfg.suites, "Comma-separated suite names, or all")->delimiter(',');
    app.add_option("--dim", cfg.dim, "Torus dimension N")->capture_default_str();
    app.add_option("--degree", cfg.degree, "Fourier degree D")->capture_default_str();
    app.add_option("--trials", cfg.trials, "Random trials per check")->capture_default_str();
    app.add_option("--seed", cfg.seed, "Master seed")->capture_default_str();
    app.add_option("--tol-alg", cfg.tolerances.algebraic, "Budget for algebraic identities")->capture_default_str();
    app.add_option("--tol-comp", cfg.tolerances.composition, "Budget for identities through composition")
        ->capture_default_str();
    app.add_option("--circle-degree", cfg.circle_degree, "Degree of the circle grid")->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker threads, 0 for all cores")->capture_default_str();
    app.add_option("--fixtures", cfg.fixtures_dir, "Directory holding golden.json")->capture_default_str();
    app.add_option("--report", report_path, "JSON report path");
    app.add_option("--csv", csv_path, "CSV table path");
    app.add_option("--make-fixtures", fixture_out, "Regenerate the golden fixtures into this directory and exit");
    app.add_flag("--timings", timings, "Add wall times to the JSON (breaks byte-for-byte reproducibility)");
    app.add_flag("--quiet", quiet, "No summary table on stdout");
    app.add_flag("--list", list, "Print the suites and their checks and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        if (list) {
            for (const auto& s : suite_names()) std::cout << s << '\n';
            for (const auto& c : expected_checks()) std::cout << "  " << c << '\n';
            return 0;
        }
        if (!fixture_out.empty()) {
            for (const auto& f : make_fixtures(fixture_out)) std::cout << f.name << " = " << f.value << '\n';
            return 0;
        }
        const Report report = run_suite(cfg);
        if (!report_path.empty()) write_file(report_path, to_json(report, timings));
        if (!csv_path.empty()) write_file(csv_path, to_csv(report));
        if (!quiet) std::cout << to_text(report);
        return report.all_pass() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "verify: " << e.what() << '\n';
        return 2;
    }
}
