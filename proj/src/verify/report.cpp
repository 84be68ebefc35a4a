#include "diffext/verify.hpp"

#include "diffext/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

namespace diffext::verify {

using nlohmann::ordered_json;

namespace {

constexpr const char* library_version = "1.0.0";

double number_or_inf(const ordered_json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", x);
    return buf;
}

}  // namespace

std::string to_json(const Report& report, bool with_timings) {
    const auto& c = report.config;
    ordered_json cfg{
        {"dim", c.dim},
        {"degree", c.degree},
        {"oversample", c.oversample},
        {"trials", c.trials},
        {"seed", c.seed},
        {"suites", c.suites},
        {"circle_degree", c.circle_degree},
        {"jacobian_cap", c.jacobian_cap},
        {"tolerances",
         {{"algebraic", c.tolerances.algebraic},
          {"oracle", c.tolerances.oracle},
          {"finite_difference", c.tolerances.finite_difference},
          {"composition", c.tolerances.composition},
          {"exact", c.tolerances.exact}}},
    };
    ordered_json checks = ordered_json::array();
    for (const auto& r : report.checks) {
        ordered_json j{
            {"id", r.id},
            {"anchor", r.anchor},
            {"inputs_digest", r.inputs_digest},
            {"trials", r.trials},
            {"residual", r.residual},
            {"tolerance", r.tolerance},
            {"pass", r.pass},
            {"diagnostics", r.diagnostics},
        };
        if (with_timings) j["wall_seconds"] = r.wall_seconds;
        checks.push_back(std::move(j));
    }
    ordered_json constants = ordered_json::object();
    for (const auto& [k, v] : report.constants) constants[k] = v;
    ordered_json out{
        {"schema_version", Report::schema_version},
        {"environment",
         {{"library", "diffext"},
          {"version", library_version},
          {"compiler", __VERSION__},
          {"cplusplus", static_cast<long>(__cplusplus)}}},
        {"config", std::move(cfg)},
        {"all_pass", report.all_pass()},
        {"checks", std::move(checks)},
        {"constants", std::move(constants)},
    };
    return out.dump(2) + "\n";
}

Report from_json(const std::string& text) {
    const auto j = ordered_json::parse(text);
    if (j.at("schema_version").get<int>() != Report::schema_version)
        throw ShapeError("verify report: unsupported schema version");
    Report r;
    const auto& c = j.at("config");
    auto& cfg = r.config;
    cfg.dim = c.at("dim").get<int>();
    cfg.degree = c.at("degree").get<int>();
    cfg.oversample = c.at("oversample").get<int>();
    cfg.trials = c.at("trials").get<int>();
    cfg.seed = c.at("seed").get<std::uint64_t>();
    cfg.suites = c.at("suites").get<std::vector<std::string>>();
    cfg.circle_degree = c.at("circle_degree").get<int>();
    cfg.jacobian_cap = c.at("jacobian_cap").get<double>();
    const auto& t = c.at("tolerances");
    cfg.tolerances.algebraic = t.at("algebraic").get<double>();
    cfg.tolerances.oracle = t.at("oracle").get<double>();
    cfg.tolerances.finite_difference = t.at("finite_difference").get<double>();
    cfg.tolerances.composition = t.at("composition").get<double>();
    cfg.tolerances.exact = t.at("exact").get<double>();
    for (const auto& x : j.at("checks")) {
        CheckRecord rec;
        rec.id = x.at("id").get<std::string>();
        rec.anchor = x.at("anchor").get<std::string>();
        rec.inputs_digest = x.at("inputs_digest").get<std::string>();
        rec.trials = x.at("trials").get<int>();
        rec.residual = number_or_inf(x.at("residual"));
        rec.tolerance = x.at("tolerance").get<double>();
        rec.pass = x.at("pass").get<bool>();
        rec.diagnostics = x.at("diagnostics").get<std::string>();
        r.checks.push_back(std::move(rec));
    }
    for (const auto& [k, v] : j.at("constants").items()) r.constants[k] = v.get<double>();
    return r;
}

std::string to_csv(const Report& report) {
    std::ostringstream out;
    out << "id,anchor,inputs_digest,trials,residual,tolerance,pass,diagnostics\n";
    out.precision(17);
    for (const auto& r : report.checks)
        out << csv_field(r.id) << ',' << csv_field(r.anchor) << ',' << r.inputs_digest << ',' << r.trials << ','
            << r.residual << ',' << r.tolerance << ',' << (r.pass ? "true" : "false") << ','
            << csv_field(r.diagnostics) << '\n';
    return out.str();
}

std::string to_text(const Report& report) {
    std::ostringstream out;
    std::size_t width = 5;
    for (const auto& r : report.checks) width = std::max(width, r.id.size());
    char line[512];
    std::snprintf(line, sizeof line, "%-*s  %6s  %10s  %10s  %8s  %s\n", int(width), "check", "trials", "residual",
                  "tolerance", "time[s]", "result");
    out << line;
    int passed = 0;
    for (const auto& r : report.checks) {
        std::snprintf(line, sizeof line, "%-*s  %6d  %10s  %10s  %8.2f  %s\n", int(width), r.id.c_str(), r.trials,
                      sci(r.residual).c_str(), sci(r.tolerance).c_str(), r.wall_seconds, r.pass ? "pass" : "FAIL");
        out << line;
        if (!r.pass) out << "    " << r.diagnostics << '\n';
        passed += r.pass;
    }
    for (const auto& [k, v] : report.constants) out << k << " = " << v << '\n';
    out << passed << '/' << report.checks.size() << " checks passed\n";
    return out.str();
}

double reference_virasoro_bott(int points) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double sum = 0.0;
    for (int p = 0; p < points; ++p) {
        const double t = (p + 0.5) / points;
        const double gt = t + 0.07 * std::cos(two_pi * t);
        const double g1 = 1.0 - 0.07 * two_pi * std::sin(two_pi * t);
        const double g2 = -0.07 * two_pi * two_pi * std::cos(two_pi * t);
        const double f1 = 1.0 + 0.1 * two_pi * std::cos(two_pi * gt);
        sum += std::log(f1) * g2 / g1;
    }
    return sum / points;
}

std::vector<Fixture> make_fixtures(const std::string& dir) {
    constexpr int points = 1 << 16;
    const double fine = reference_virasoro_bott(points);
    const double coarse = reference_virasoro_bott(points / 2);
    Fixture vb{"virasoro-bott-reference",
               fine,
               {{"F", "t + 0.1 sin(2 pi t)"},
                {"G", "t + 0.07 cos(2 pi t)"},
                {"oracle", "midpoint quadrature of ln F'(G(t)) G''(t) / G'(t) with closed-form derivatives"},
                {"points", std::to_string(points)},
                {"halved_points_difference", sci(std::abs(fine - coarse))}}};
    std::vector<Fixture> fixtures{vb};

    ordered_json arr = ordered_json::array();
    for (const auto& f : fixtures) {
        ordered_json prov = ordered_json::object();
        for (const auto& [k, v] : f.provenance) prov[k] = v;
        arr.push_back({{"name", f.name}, {"value", f.value}, {"provenance", std::move(prov)}});
    }
    std::filesystem::create_directories(dir);
    const auto path = std::filesystem::path(dir) / "golden.json";
    std::ofstream out(path);
    if (!out) throw DomainError("make_fixtures: cannot write " + path.string());
    out << ordered_json{{"schema_version", 1}, {"fixtures", std::move(arr)}}.dump(2) << '\n';
    return fixtures;
}

std::vector<Fixture> load_fixtures(const std::string& dir) {
    std::ifstream in(std::filesystem::path(dir) / "golden.json");
    if (!in) return {};
    const auto j = ordered_json::parse(in);
    std::vector<Fixture> out;
    for (const auto& x : j.at("fixtures")) {
        Fixture f;
        f.name = x.at("name").get<std::string>();
        f.value = x.at("value").get<double>();
        for (const auto& [k, v] : x.at("provenance").items()) f.provenance[k] = v.get<std::string>();
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace diffext::verify
