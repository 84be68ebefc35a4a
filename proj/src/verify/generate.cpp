#include "diffext/verify.hpp"

#include "diffext/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace diffext::verify {

namespace {

constexpr int max_attempts = 50;

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

int resolve_degree(const GridSpec& spec, int max_degree) {
    if (max_degree < 0) max_degree = std::max(1, spec.degree() / 4);
    return std::min(max_degree, spec.degree());
}

// Coefficient cube with the decay policy; modes touching `frozen_axis` are left at zero.
FourierScalar draw(std::mt19937_64& rng, const GridSpec& spec, double amplitude, int max_degree, int frozen_axis = -1) {
    const int deg = resolve_degree(spec, max_degree);
    std::normal_distribution<double> normal;
    std::vector<Complex> c(spec.mode_count());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto mode = mode_of(spec, i);
        bool keep = true;
        double norm2 = 0.0;
        for (int j = 0; j < spec.dim(); ++j) {
            if (std::abs(mode[j]) > deg || (j == frozen_axis && mode[j] != 0)) keep = false;
            norm2 += double(mode[j]) * mode[j];
        }
        // draw even for skipped modes so the stream does not depend on the filter
        const double re = normal(rng), im = normal(rng);
        if (!keep || amplitude == 0.0) continue;
        const double decay = 1.0 / ((1.0 + std::sqrt(norm2)) * (1.0 + std::sqrt(norm2)));
        c[i] = amplitude * decay * Complex(re, norm2 == 0.0 ? 0.0 : im);
    }
    return FourierScalar::from_coeffs(spec, std::move(c));
}

double max_sup(const MatrixField& m) {
    double s = 0.0;
    for (const auto& e : m.entries()) s = std::max(s, sup_norm(e));
    return s;
}

MatrixField displacement_jacobian(const std::vector<FourierScalar>& f) {
    const GridSpec& spec = f[0].spec();
    std::vector<FourierScalar> entries;
    for (int i = 0; i < spec.dim(); ++i)
        for (int j = 0; j < spec.dim(); ++j) entries.push_back(differentiate(f[i], j));
    return MatrixField::from_entries(spec, std::move(entries));
}

[[noreturn]] void exhausted(const char* what, const std::string& last) {
    throw DomainError(std::string(what) + ": no admissible sample in 50 attempts, use a smaller amplitude (" + last + ")");
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, const std::string& check, int trial) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : check) h = (h ^ ch) * 0x100000001b3ull;
    return splitmix(splitmix(seed ^ h) + static_cast<std::uint64_t>(trial));
}

FourierScalar Generator::scalar(const GridSpec& spec, double amplitude, int max_degree) {
    return draw(rng_, spec, amplitude, max_degree);
}

VectorField Generator::vector(const GridSpec& spec, double amplitude, int max_degree) {
    std::vector<FourierScalar> c;
    for (int i = 0; i < spec.dim(); ++i) c.push_back(scalar(spec, amplitude, max_degree));
    return VectorField::from_components(std::move(c));
}

VectorField Generator::divergence_free(const GridSpec& spec, double amplitude, int max_degree) {
    const int n = spec.dim();
    if (n < 2) return VectorField::constant(spec, {amplitude});
    std::vector<FourierScalar> c(n, FourierScalar(spec));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const auto psi = scalar(spec, amplitude, max_degree);
            // psi_ij = psi, psi_ji = -psi
            c[i] = c[i] + differentiate(psi, j);
            c[j] = c[j] - differentiate(psi, i);
        }
    return VectorField::from_components(std::move(c));
}

Diffeo Generator::diffeo(const GridSpec& spec, double cap, int max_degree) {
    if (cap == 0.0) return Diffeo::identity(spec);
    if (max_degree < 0) max_degree = std::max(1, spec.degree() / 6);
    std::string last;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<FourierScalar> f;
        for (int i = 0; i < spec.dim(); ++i) f.push_back(scalar(spec, 1.0, max_degree));
        const double s = max_sup(displacement_jacobian(f));
        const double target = cap * uniform(0.5, 1.0);
        if (s == 0.0) continue;
        for (auto& fi : f) fi = (target / s) * fi;
        try {
            return Diffeo::from_displacement(std::move(f));
        } catch (const DomainError& e) {
            last = e.what();
        }
    }
    exhausted("diffeo", last);
}

Diffeo Generator::shear(const GridSpec& spec, double cap, int axis, int max_degree) {
    if (axis < 0 || axis >= spec.dim()) throw ShapeError("shear: axis out of range");
    if (cap == 0.0 || spec.dim() == 1) return Diffeo::identity(spec);
    if (max_degree < 0) max_degree = std::max(1, spec.degree() / 6);
    std::string last;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<FourierScalar> f(spec.dim(), FourierScalar(spec));
        f[axis] = draw(rng_, spec, 1.0, max_degree, axis);
        const double s = max_sup(displacement_jacobian(f));
        if (s == 0.0) continue;
        f[axis] = (cap * uniform(0.5, 1.0) / s) * f[axis];
        try {
            return Diffeo::from_displacement(std::move(f));
        } catch (const DomainError& e) {
            last = e.what();
        }
    }
    exhausted("shear", last);
}

GaugeMap Generator::gauge(const GridSpec& spec, double cap, int max_degree) {
    if (cap == 0.0) return GaugeMap::identity(spec);
    if (max_degree < 0) max_degree = std::max(1, spec.degree() / 6);
    std::string last;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<FourierScalar> e;
        for (int k = 0; k < spec.dim() * spec.dim(); ++k) e.push_back(scalar(spec, 1.0, max_degree));
        const auto m = MatrixField::from_entries(spec, std::move(e));
        const double s = max_sup(m);
        if (s == 0.0) continue;
        try {
            return GaugeMap::make(MatrixField::identity(spec) + (cap / s) * m);
        } catch (const DomainError& err) {
            last = err.what();
        }
    }
    exhausted("gauge", last);
}

LoopPos Generator::loop(const GridSpec& spec, double amplitude, int max_degree) {
    auto u = scalar(spec, amplitude, max_degree);
    return LoopPos(std::move(u), integer(0, 1) == 0 ? 1 : -1);
}

void Digest::add_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) state_ = (state_ ^ p[i]) * 0x100000001b3ull;
}

void Digest::add(double x) { add_bytes(&x, sizeof x); }

void Digest::add(const FourierScalar& a) {
    for (const auto& c : a.coeffs()) {
        add(c.real());
        add(c.imag());
    }
}

void Digest::add(const Diffeo& f) {
    for (int w : f.winding()) add_bytes(&w, sizeof w);
    for (const auto& d : f.displacement()) add(d);
}

void Digest::add(const VectorField& v) {
    for (const auto& c : v.components()) add(c);
}

void Digest::add(const MatrixField& m) {
    for (const auto& e : m.entries()) add(e);
}

void Digest::add(const LoopPos& f) {
    add(f.logval());
    add(static_cast<double>(f.sign()));
}

std::string Digest::hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(state_));
    return buf;
}

}  // namespace diffext::verify
