#pragma once

#include "diffext/config.hpp"
#include "diffext/diffeo.hpp"
#include "diffext/gauge.hpp"

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace diffext::verify {

struct SuiteConfig {
    int dim = 2;
    int degree = 12;
    int oversample = 2;
    int trials = 25;
    std::uint64_t seed = 1;
    Tolerances tolerances{};
    /// Suite names, or {"all"}.
    std::vector<std::string> suites{"all"};
    /// Degree of the circle grid used by the one-dimensional suites.
    int circle_degree = 32;
    /// Generated diffeos are rescaled so that max |F^J - I| stays below this.
    double jacobian_cap = 0.12;
    /// Worker threads for the trials of one check; 0 picks the hardware concurrency.
    int threads = 0;
    /// Where the golden fixtures are read from.
    std::string fixtures_dir;
};

/// Throws DomainError on an unusable configuration.
void validate(const SuiteConfig& cfg);

struct CheckRecord {
    std::string id;
    std::string anchor;
    std::string inputs_digest;  // FNV-1a over the coefficients of every generated input
    int trials = 0;
    double residual = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    std::string diagnostics;
    double wall_seconds = 0.0;
};

struct Report {
    static constexpr int schema_version = 1;
    SuiteConfig config;
    std::vector<CheckRecord> checks;  // sorted by id
    std::map<std::string, double> constants;

    bool all_pass() const;
};

/// Every suite name, in registry order.
const std::vector<std::string>& suite_names();
/// The static list of check ids the registry must produce, one per invariant.
const std::vector<std::string>& expected_checks();

/// Runs the selected suites. Failures inside a trial become failed checks; the run continues.
Report run_suite(const SuiteConfig& cfg);

/// Wall times are left out unless asked for, so that equal seeds give byte-identical files.
std::string to_json(const Report& report, bool with_timings = false);
/// Inverse of to_json (wall times and the environment stanza are not read back).
Report from_json(const std::string& text);
std::string to_csv(const Report& report);
std::string to_text(const Report& report);

// ---------------------------------------------------------------------------
// Seeded generators

/// splitmix64 over (seed, check id, trial); independent of the thread that runs the trial.
std::uint64_t trial_seed(std::uint64_t seed, const std::string& check, int trial);

class Generator {
public:
    explicit Generator(std::uint64_t seed) : rng_(seed) {}

    /// Modes with |r_j| <= max_degree, coefficients amplitude * N(0,1) / (1 + |r|)^2.
    /// A negative max_degree means degree / 4 (at least 1).
    FourierScalar scalar(const GridSpec& spec, double amplitude, int max_degree = -1);
    VectorField vector(const GridSpec& spec, double amplitude, int max_degree = -1);
    /// sum_j d psi_ij / dx_j d/dx_i with psi antisymmetric.
    VectorField divergence_free(const GridSpec& spec, double amplitude, int max_degree = -1);
    /// x + f(x) with max |f^J| rescaled to a random fraction of `cap` in [cap/2, cap]; default degree / 6.
    /// Rejection sampling against the regularity certificate, at most 50 attempts.
    Diffeo diffeo(const GridSpec& spec, double cap, int max_degree = -1);
    /// x_axis -> x_axis + a(x) with a independent of x_axis, so det F^J = 1.
    Diffeo shear(const GridSpec& spec, double cap, int axis, int max_degree = -1);
    /// I + m(x) with max |m| rescaled to `cap`, checked invertible. A negative max_degree means degree / 6.
    GaugeMap gauge(const GridSpec& spec, double cap, int max_degree = -1);
    /// sign * exp(u) with u band-limited; the sign is drawn.
    LoopPos loop(const GridSpec& spec, double amplitude, int max_degree = -1);

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    std::mt19937_64& engine() { return rng_; }

private:
    std::mt19937_64 rng_;
};

/// Running FNV-1a 64 digest of generated inputs.
class Digest {
public:
    void add(const FourierScalar& a);
    void add(const Diffeo& f);
    void add(const VectorField& v);
    void add(const MatrixField& m);
    void add(const LoopPos& f);
    void add(double x);
    void merge(const Digest& other) { add_bytes(&other.state_, sizeof(state_)); }
    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    void add_bytes(const void* data, std::size_t n);
    std::uint64_t state_ = 0xcbf29ce484222325ull;
};

// ---------------------------------------------------------------------------
// Golden fixtures

struct Fixture {
    std::string name;
    double value = 0.0;
    std::map<std::string, std::string> provenance;
};

/// Dense midpoint quadrature of int ln F'(G(t)) d ln G'(t) for the reference pair
/// F = t + 0.1 sin(2 pi t), G = t + 0.07 cos(2 pi t), with closed-form derivatives.
double reference_virasoro_bott(int points);
/// Runs the independent oracles at elevated resolution and writes dir/golden.json.
std::vector<Fixture> make_fixtures(const std::string& dir);
/// Empty when the file is missing.
std::vector<Fixture> load_fixtures(const std::string& dir);

}  // namespace diffext::verify
