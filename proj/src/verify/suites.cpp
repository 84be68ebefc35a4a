#include "diffext/verify.hpp"

#include "diffext/cocycles.hpp"
#include "diffext/errors.hpp"
#include "diffext/heisenberg.hpp"

#include <boost/rational.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <set>
#include <thread>

namespace diffext::verify {

namespace {

// Budgets pinned per check; only the algebraic and composition ones are configurable.
constexpr double agreement_tol = 1e-9;
constexpr double quadrature_tol = 1e-8;
constexpr double trivial_tol = 1e-9;
constexpr double heisenberg_chain_tol = 1e-8;
constexpr double delta_tol = 1e-8;
constexpr double bridge_tol = 1e-3;
// max |g - I| of generated gauge maps; their inverses stay resolvable at degree D
constexpr double gauge_cap = 0.15;
constexpr int homotopy_panels = 512;
constexpr int quadrature_points = 2048;
constexpr double two_pi = 2.0 * std::numbers::pi;

struct Outcome {
    double residual = 0.0;
    Digest digest;
    // reference and measured values for proportionality checks
    std::vector<double> x, y;
};

enum class Aggregate { max_residual, proportional };

struct Check {
    std::string id;
    std::string anchor;
    double tolerance;
    int trials;
    std::function<Outcome(Generator&)> trial;
    Aggregate aggregate = Aggregate::max_residual;
};

using SuiteBuilder = std::function<std::vector<Check>(const SuiteConfig&)>;

std::vector<double> flatten(const KForm& form) {
    std::vector<double> out;
    for (const auto& c : form.components())
        for (const auto& z : c.coeffs()) {
            out.push_back(z.real());
            out.push_back(z.imag());
        }
    return out;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

GridSpec base_spec(const SuiteConfig& cfg) { return GridSpec(cfg.dim, cfg.degree, cfg.oversample); }
GridSpec circle_spec(const SuiteConfig& cfg) { return GridSpec(1, cfg.circle_degree, cfg.oversample); }

// a(t), a'(t), a''(t) by direct summation over the modes of a circle field.
std::array<double, 3> circle_eval(const FourierScalar& a, double t) {
    const int d = a.spec().degree();
    std::array<double, 3> out{};
    for (int r = -d; r <= d; ++r) {
        const Complex term = a.coeff({r}) * std::polar(1.0, two_pi * r * t);
        const double w = two_pi * r;
        out[0] += term.real();
        out[1] += (Complex(0.0, w) * term).real();
        out[2] += (-w * w * term).real();
    }
    return out;
}

double quadrature_virasoro_bott(const Diffeo& f, const Diffeo& g, int points) {
    double sum = 0.0;
    for (int p = 0; p < points; ++p) {
        const double t = (p + 0.5) / points;
        const auto gv = circle_eval(g.displacement()[0], t);
        const double gt = t + gv[0], g1 = 1.0 + gv[1], g2 = gv[2];
        const double f1 = 1.0 + circle_eval(f.displacement()[0], gt)[1];
        sum += std::log(std::abs(f1)) * g2 / g1;
    }
    return sum / points;
}

// ---------------------------------------------------------------------------

std::vector<Check> chain_rule(const SuiteConfig& cfg) {
    const GridSpec spec = base_spec(cfg);
    const double cap = cfg.jacobian_cap, tol = cfg.tolerances.composition;
    return {
        {"chain-rule/jacobian", "chain rule (FG)^J = F^J(G) G^J", tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.diffeo(spec, cap), g = gen.diffeo(spec, cap);
             o.digest.add(f);
             o.digest.add(g);
             o.residual = sup_distance(jacobian(compose(f, g)), act_on_matrix(jacobian(f), g) * jacobian(g));
             return o;
         }},
        {"chain-rule/inverse", "Newton inverse composes to the identity", tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.diffeo(spec, cap);
             o.digest.add(f);
             o.residual = std::max(sup_distance(compose(f, inverse(f)), Diffeo::identity(spec)),
                                   sup_distance(compose(inverse(f), f), Diffeo::identity(spec)));
             return o;
         }},
        {"chain-rule/associativity", "composition is associative", tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.diffeo(spec, cap), g = gen.diffeo(spec, cap), h = gen.diffeo(spec, cap);
             for (const auto* d : {&f, &g, &h}) o.digest.add(*d);
             o.residual = sup_distance(compose(compose(f, g), h), compose(f, compose(g, h)));
             return o;
         }},
    };
}

std::vector<Check> forms(const SuiteConfig& cfg) {
    const GridSpec spec = base_spec(cfg);
    const double cap = cfg.jacobian_cap, alg = cfg.tolerances.algebraic, comp = cfg.tolerances.composition;
    auto one_form = [spec](Generator& gen, Digest& dg) {
        std::vector<FourierScalar> c;
        for (int i = 0; i < spec.dim(); ++i) {
            c.push_back(gen.scalar(spec, 1.0));
            dg.add(c.back());
        }
        return KForm::one_form(std::move(c));
    };
    return {
        {"forms/dd-zero", "d o d = 0 (relative to |d alpha|)", cfg.tolerances.exact, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto a = gen.scalar(spec, 1.0);
             o.digest.add(a);
             const auto alpha = one_form(gen, o.digest);
             const double scale = std::max(exterior_d(alpha).max_abs_coeff(), 1.0);
             o.residual = std::max(exterior_d(exterior_d(KForm::scalar(a))).max_abs_coeff(),
                                   exterior_d(exterior_d(alpha)).max_abs_coeff()) / scale;
             return o;
         }},
        {"forms/leibniz", "d(a ^ b) = da ^ b + (-1)^k a ^ db", alg, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto a = KForm::scalar(gen.scalar(spec, 1.0));
             o.digest.add(a.components()[0]);
             const auto b = one_form(gen, o.digest), c = one_form(gen, o.digest);
             const double r0 = coeff_distance(exterior_d(wedge(a, b)), wedge(exterior_d(a), b) + wedge(a, exterior_d(b)));
             const double r1 = coeff_distance(exterior_d(wedge(b, c)), wedge(exterior_d(b), c) - wedge(b, exterior_d(c)));
             o.residual = std::max(r0, r1);
             return o;
         }},
        {"forms/pullback-d", "pullback commutes with d", comp, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.diffeo(spec, cap);
             o.digest.add(f);
             const auto alpha = one_form(gen, o.digest);
             o.residual = coeff_distance(pullback_form(exterior_d(alpha), f), exterior_d(pullback_form(alpha, f)));
             return o;
         }},
        {"forms/bracket-jacobi", "Jacobi identity for the bracket of vector fields", alg, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto u = gen.vector(spec, 1.0), v = gen.vector(spec, 1.0), w = gen.vector(spec, 1.0);
             for (const auto* x : {&u, &v, &w}) o.digest.add(*x);
             const auto j = lie_bracket(lie_bracket(u, v), w) + lie_bracket(lie_bracket(v, w), u) +
                            lie_bracket(lie_bracket(w, u), v);
             o.residual = j.max_abs_coeff();
             return o;
         }},
        {"forms/lie-d", "Lie derivative commutes with d", alg, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto v = gen.vector(spec, 1.0);
             o.digest.add(v);
             const auto alpha = one_form(gen, o.digest);
             o.residual = coeff_distance(lie_derivative(v, exterior_d(alpha)), exterior_d(lie_derivative(v, alpha)));
             return o;
         }},
    };
}

std::vector<Check> gauge_cocycle(const SuiteConfig& cfg) {
    const GridSpec spec = base_spec(cfg);
    const double cap = cfg.jacobian_cap;
    return {
        {"gauge-cocycle/central-law", "central cocycle law of Tr(f^-1 df ^ dg g^-1)", cfg.tolerances.algebraic,
         cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.gauge(spec, gauge_cap), g = gen.gauge(spec, gauge_cap), h = gen.gauge(spec, gauge_cap);
             for (const auto* m : {&f, &g, &h}) o.digest.add(m->matrix());
             const auto lhs = gauge_cocycle_gl(f, g) + gauge_cocycle_gl(gauge_multiply(f, g), h);
             const auto rhs = gauge_cocycle_gl(f, gauge_multiply(g, h)) + gauge_cocycle_gl(g, h);
             o.residual = coeff_distance(lhs, rhs);
             return o;
         }},
        {"gauge-cocycle/diff-invariance", "c(f(H), g(H)) = H^* c(f, g)", cfg.tolerances.composition, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.gauge(spec, gauge_cap), g = gen.gauge(spec, gauge_cap);
             const auto h = gen.diffeo(spec, cap);
             o.digest.add(f.matrix());
             o.digest.add(g.matrix());
             o.digest.add(h);
             o.residual = coeff_distance(gauge_cocycle_gl(act_on_gauge(f, h), act_on_gauge(g, h)),
                                         pullback_form(gauge_cocycle_gl(f, g), h));
             return o;
         }},
    };
}

std::vector<Check> pullback_cocycles(const SuiteConfig& cfg) {
    const GridSpec spec = base_spec(cfg), circle = circle_spec(cfg);
    const double cap = cfg.jacobian_cap, tol = cfg.tolerances.composition;
    auto triple = [cap](Generator& gen, const GridSpec& s, Digest& dg) {
        std::array<Diffeo, 3> d{gen.diffeo(s, cap), gen.diffeo(s, cap), gen.diffeo(s, cap)};
        for (const auto& x : d) dg.add(x);
        return d;
    };
    return {
        {"pullback-cocycles/gauge", "abelian cocycle law, Jacobian pulled back to the gauge cocycle", tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto [f, g, h] = triple(gen, spec, o.digest);
             const auto lhs = pullback_form(gauge_group_cocycle(f, g), h) + gauge_group_cocycle(compose(f, g), h);
             const auto rhs = gauge_group_cocycle(f, compose(g, h)) + gauge_group_cocycle(g, h);
             o.residual = coeff_distance(lhs, rhs);
             return o;
         }},
        {"pullback-cocycles/virasoro-bott", "cocycle law, circle Jacobian pulled back to the Heisenberg cocycle", tol,
         cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto [f, g, h] = triple(gen, circle, o.digest);
             const double lhs = heisenberg_group_cocycle(f, g) + heisenberg_group_cocycle(compose(f, g), h);
             const double rhs = heisenberg_group_cocycle(f, compose(g, h)) + heisenberg_group_cocycle(g, h);
             o.residual = std::abs(lhs - rhs);
             return o;
         }},
        {"pullback-cocycles/volume", "abelian cocycle law, volume crossed homomorphism pulled back", tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto density = gen.scalar(spec, 0.2, 1);
             o.digest.add(density);
             const KForm omega = scale(pointwise_unary(density, UnaryFn::exp), standard_volume(spec));
             const auto [f, g, h] = triple(gen, spec, o.digest);
             const auto lhs = act_on_class(volume_cocycle(f, g, omega), h) + volume_cocycle(compose(f, g), h, omega);
             const auto rhs = volume_cocycle(f, compose(g, h), omega) + volume_cocycle(g, h, omega);
             o.residual = coeff_distance(lhs, rhs);
             return o;
         }},
    };
}

std::vector<Check> virasoro_bott_suite(const SuiteConfig& cfg) {
    const GridSpec circle = circle_spec(cfg);
    const double cap = cfg.jacobian_cap;
    const std::string fixtures = cfg.fixtures_dir;
    return {
        {"virasoro-bott/heisenberg-agreement", "B(F, G) = C(F'(G), G')", agreement_tol, 2 * cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.diffeo(circle, cap), g = gen.diffeo(circle, cap);
             o.digest.add(f);
             o.digest.add(g);
             o.residual = std::abs(virasoro_bott(f, g) - heisenberg_group_cocycle(f, g));
             return o;
         }},
        {"virasoro-bott/quadrature", "B(F, G) against dense midpoint quadrature", quadrature_tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.diffeo(circle, cap), g = gen.diffeo(circle, cap);
             o.digest.add(f);
             o.digest.add(g);
             o.residual = std::abs(virasoro_bott(f, g) - quadrature_virasoro_bott(f, g, quadrature_points));
             return o;
         }},
        {"virasoro-bott/golden", "B(t + 0.1 sin, t + 0.07 cos) against the stored fixture", quadrature_tol, 1,
         [=](Generator&) {
             Outcome o;
             const auto stored = load_fixtures(fixtures);
             const auto it = std::find_if(stored.begin(), stored.end(),
                                          [](const Fixture& x) { return x.name == "virasoro-bott-reference"; });
             if (it == stored.end())
                 throw DomainError("fixture virasoro-bott-reference not found in '" + fixtures +
                                   "', generate it with --make-fixtures");
             const auto f = Diffeo::from_displacement({from_cos_sin(circle, {{-1, 0.1}})});
             const auto g = Diffeo::from_displacement({from_cos_sin(circle, {{1, 0.07}})});
             o.digest.add(f);
             o.digest.add(g);
             o.digest.add(it->value);
             o.residual = std::abs(virasoro_bott(f, g) - it->value);
             return o;
         }},
    };
}

std::vector<Check> heisenberg_chain(const SuiteConfig& cfg) {
    const GridSpec circle(1, 16, cfg.oversample);
    auto pair = [circle](Generator& gen, Digest& dg) {
        std::array<LoopPos, 2> p{gen.loop(circle, 0.5, 4), gen.loop(circle, 0.5, 4)};
        dg.add(p[0]);
        dg.add(p[1]);
        return p;
    };
    auto fourier = [](const LoopPos& f, const LoopPos& g) {
        return fourier_cocycle(to_cos_sin(f.logval()), to_cos_sin(g.logval()));
    };
    return {
        {"heisenberg-chain/homotopy-integral", "homotopy double integral = int ln|f| d ln|g|", heisenberg_chain_tol,
         cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto [f, g] = pair(gen, o.digest);
             o.residual = std::abs(homotopy_cocycle_oracle(f, g, homotopy_panels) - heisenberg_cocycle_circle(f, g));
             return o;
         }},
        {"heisenberg-chain/integral-fourier", "int ln|f| d ln|g| = pi sum j a_j b_-j", heisenberg_chain_tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto [f, g] = pair(gen, o.digest);
             o.residual = std::abs(heisenberg_cocycle_circle(f, g) - fourier(f, g));
             return o;
         }},
        {"heisenberg-chain/homotopy-fourier", "homotopy double integral = pi sum j a_j b_-j", heisenberg_chain_tol,
         cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto [f, g] = pair(gen, o.digest);
             o.residual = std::abs(homotopy_cocycle_oracle(f, g, homotopy_panels) - fourier(f, g));
             return o;
         }},
    };
}

using Rational = boost::rational<long long>;

BasicHeisenbergElement<Rational> random_rational(Generator& gen, Digest& dg) {
    auto q = [&] {
        const Rational r(gen.integer(-6, 6), gen.integer(1, 5));
        dg.add(boost::rational_cast<double>(r));
        return r;
    };
    BasicHeisenbergElement<Rational> e;
    e.central = q();
    e.zero_mode = q();
    for (int j = -4; j <= 4; ++j)
        if (j != 0) e.modes[j] = q();
    return e.normalize();
}

std::vector<Check> heisenberg_phi(const SuiteConfig& cfg) {
    const GridSpec circle(1, 8, cfg.oversample);
    return {
        {"heisenberg-phi/homomorphism", "phi(a b) = phi(a) phi(b)", cfg.tolerances.oracle, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const AnalyticElement a{gen.loop(circle, 1.0, 4), gen.uniform(-2.0, 2.0)};
             const AnalyticElement b{gen.loop(circle, 1.0, 4), gen.uniform(-2.0, 2.0)};
             o.digest.add(a.loop);
             o.digest.add(a.alpha);
             o.digest.add(b.loop);
             o.digest.add(b.alpha);
             const auto ab = analytic_multiply(a, b);
             o.residual = distance(phi_iso(ab.loop, ab.alpha), h_multiply(phi_iso(a.loop, a.alpha), phi_iso(b.loop, b.alpha)));
             return o;
         }},
        {"heisenberg-phi/exact-group-law", "associativity, inverses and cocycle law over the rationals (failures)", 0.0,
         cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto a = random_rational(gen, o.digest), b = random_rational(gen, o.digest),
                        c = random_rational(gen, o.digest);
             const BasicHeisenbergElement<Rational> id{};
             int failures = 0;
             failures += !(h_multiply(h_multiply(a, b), c) == h_multiply(a, h_multiply(b, c)));
             failures += !(h_multiply(a, h_inverse(a)) == id);
             failures += !(h_multiply(h_inverse(a), a) == id);
             failures += !(kappa(a, b) + kappa(h_multiply(a, b), c) == kappa(a, h_multiply(b, c)) + kappa(b, c));
             o.residual = failures;
             return o;
         }},
    };
}

std::vector<Check> lie_algebra_jacobi(const SuiteConfig& cfg) {
    std::vector<Check> out;
    const double tol = cfg.tolerances.composition;
    for (int n : {2, 3}) {
        // three dimensions at a reduced degree to keep the cost down; fields stay alias-free at degree / 4
        const GridSpec spec(n, n == 2 ? cfg.degree : std::min(cfg.degree, 8), cfg.oversample);
        const std::string suffix = "-n" + std::to_string(n);
        auto triple = [spec](Generator& gen, Digest& dg) {
            std::array<VectorField, 3> t{gen.vector(spec, 1.0), gen.vector(spec, 1.0), gen.vector(spec, 1.0)};
            for (const auto& x : t) dg.add(x);
            return t;
        };
        auto law = [&](const std::string& name, auto residual) {
            out.push_back({"lie-algebra-jacobi/" + name + suffix, "abelian Lie cocycle law for " + name, tol,
                           cfg.trials, [=](Generator& gen) {
                               Outcome o;
                               const auto [u, v, w] = triple(gen, o.digest);
                               o.residual = residual(u, v, w);
                               return o;
                           }});
        };
        law("tau1", [](const VectorField& u, const VectorField& v, const VectorField& w) {
            return lie_cocycle_defect([](const auto& a, const auto& b) { return tau1(a, b); }, u, v, w)
                .rep()
                .max_abs_coeff();
        });
        law("tau2", [](const VectorField& u, const VectorField& v, const VectorField& w) {
            return lie_cocycle_defect([](const auto& a, const auto& b) { return tau2(a, b); }, u, v, w)
                .rep()
                .max_abs_coeff();
        });
        law("dtau1", [](const VectorField& u, const VectorField& v, const VectorField& w) {
            return lie_cocycle_defect([](const auto& a, const auto& b) { return dtau(1, a, b); }, u, v, w)
                .max_abs_coeff();
        });
        law("dtau2", [](const VectorField& u, const VectorField& v, const VectorField& w) {
            return lie_cocycle_defect([](const auto& a, const auto& b) { return dtau(2, a, b); }, u, v, w)
                .max_abs_coeff();
        });
        out.push_back({"lie-algebra-jacobi/skew" + suffix, "skew-symmetry of tau1, tau2, dtau1, dtau2 (relative)",
                       cfg.tolerances.exact, cfg.trials, [=](Generator& gen) {
                           Outcome o;
                           const auto [v, w, unused] = triple(gen, o.digest);
                           const double scale = std::max(tau1_raw(v, w).max_abs_coeff(), 1.0);
                           const double r = std::max({(tau1(v, w) + tau1(w, v)).rep().max_abs_coeff(),
                                                      (tau2(v, w) + tau2(w, v)).rep().max_abs_coeff(),
                                                      (dtau(1, v, w) + dtau(1, w, v)).max_abs_coeff(),
                                                      (dtau(2, v, w) + dtau(2, w, v)).max_abs_coeff()});
                           o.residual = r / scale;
                           return o;
                       }});
    }
    return out;
}

std::vector<Check> trivialization(const SuiteConfig& cfg) {
    const GridSpec spec = base_spec(cfg);
    const double cap = cfg.jacobian_cap;
    auto preserving = [spec, cap](Generator& gen) {
        Diffeo d = Diffeo::identity(spec);
        for (int axis = 0; axis < spec.dim(); ++axis) d = compose(d, gen.shear(spec, cap, axis));
        return d;
    };
    return {
        {"trivialization/tau2-divergence-free", "tau2 vanishes when v is divergence-free", trivial_tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto v = gen.divergence_free(spec, 1.0), w = gen.vector(spec, 1.0);
             o.digest.add(v);
             o.digest.add(w);
             o.residual = std::max(tau2(v, w).rep().max_abs_coeff(), tau2(w, v).rep().max_abs_coeff());
             return o;
         }},
        {"trivialization/volume-preserving", "volume cocycle vanishes on volume-preserving pairs", trivial_tol,
         cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = preserving(gen), g = preserving(gen);
             o.digest.add(f);
             o.digest.add(g);
             o.residual = volume_cocycle(f, g, standard_volume(spec)).rep().max_abs_coeff();
             return o;
         }},
        {"trivialization/circle-tau", "tau1 = tau2 on the circle (relative)", cfg.tolerances.exact, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const GridSpec circle(1, 16, spec.oversample());
             const auto v = gen.vector(circle, 1.0), w = gen.vector(circle, 1.0);
             o.digest.add(v);
             o.digest.add(w);
             o.residual = coeff_distance(tau1(v, w), tau2(v, w)) / std::max(tau1_raw(v, w).max_abs_coeff(), 1.0);
             return o;
         }},
    };
}

std::vector<Check> volume_divergence_suite(const SuiteConfig& cfg) {
    const GridSpec spec = base_spec(cfg);
    const double cap = cfg.jacobian_cap;
    return {
        {"volume-divergence/div-cocycle-tau2", "div cocycle of the standard volume = tau2", trivial_tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto v = gen.vector(spec, 1.0), w = gen.vector(spec, 1.0);
             o.digest.add(v);
             o.digest.add(w);
             o.residual = coeff_distance(div_cocycle(v, w, standard_volume(spec)), tau2(v, w));
             return o;
         }},
        {"volume-divergence/delta-det", "delta(F) = det F^J for the standard volume", delta_tol, cfg.trials,
         [=](Generator& gen) {
             Outcome o;
             const auto f = gen.diffeo(spec, cap);
             o.digest.add(f);
             o.residual =
                 coeff_distance(volume_delta(f, standard_volume(spec)).values(), determinant_field(jacobian(f)));
             return o;
         }},
    };
}

std::vector<Check> lie_bridges(const SuiteConfig& cfg) {
    const int pairs = std::max(10, cfg.trials);
    const int oversample = cfg.oversample;
    return {
        {"lie-bridges/virasoro-bott", "mixed derivative of B is proportional to int v' dw'", bridge_tol, pairs,
         [=](Generator& gen) {
             Outcome o;
             const GridSpec circle(1, 16, oversample);
             const auto v = gen.vector(circle, 0.05, 3), w = gen.vector(circle, 0.05, 3);
             o.digest.add(v);
             o.digest.add(w);
             const auto b = [](const Diffeo& f, const Diffeo& g) { return virasoro_bott(f, g); };
             o.x = {integrate_mean(multiply(differentiate(v[0], 0), differentiate(differentiate(w[0], 0), 0)))};
             o.y = {lie_from_group(b, v, w, 1e-2)};
             return o;
         },
         Aggregate::proportional},
        {"lie-bridges/gauge-dtau1", "mixed derivative of the gauge group cocycle is proportional to dtau1", bridge_tol,
         pairs,
         [=](Generator& gen) {
             Outcome o;
             const GridSpec spec(2, 8, oversample);
             const auto v = gen.vector(spec, 0.05, 2), w = gen.vector(spec, 0.05, 2);
             o.digest.add(v);
             o.digest.add(w);
             const auto b = [](const Diffeo& f, const Diffeo& g) { return gauge_group_cocycle(f, g); };
             o.x = flatten(dtau(1, v, w));
             o.y = flatten(lie_from_group(b, v, w, 5e-3));
             return o;
         },
         Aggregate::proportional},
    };
}

const std::vector<std::pair<std::string, SuiteBuilder>>& registry() {
    static const std::vector<std::pair<std::string, SuiteBuilder>> r{
        {"chain-rule", chain_rule},
        {"forms", forms},
        {"gauge-cocycle", gauge_cocycle},
        {"pullback-cocycles", pullback_cocycles},
        {"virasoro-bott", virasoro_bott_suite},
        {"heisenberg-chain", heisenberg_chain},
        {"heisenberg-phi", heisenberg_phi},
        {"lie-algebra-jacobi", lie_algebra_jacobi},
        {"trivialization", trivialization},
        {"volume-divergence", volume_divergence_suite},
        {"lie-bridges", lie_bridges},
    };
    return r;
}

void cross_check_registry(const SuiteConfig& cfg) {
    std::vector<std::string> ids;
    for (const auto& [name, build] : registry())
        for (const auto& c : build(cfg)) ids.push_back(c.id);
    std::vector<std::string> expected = expected_checks();
    std::sort(ids.begin(), ids.end());
    std::sort(expected.begin(), expected.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw ConsistencyError("verify registry: duplicate check id");
    if (ids != expected) throw ConsistencyError("verify registry: check ids differ from the static list");
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, std::min(threads, count));
    if (threads == 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) body(i);
        });
}

CheckRecord run_check(const Check& check, const SuiteConfig& cfg, Report& report) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<Outcome> outcomes(check.trials);
    std::vector<std::string> errors(check.trials);
    const int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    parallel_for(check.trials, threads, [&](int i) {
        Generator gen(trial_seed(cfg.seed, check.id, i));
        try {
            outcomes[i] = check.trial(gen);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    CheckRecord rec;
    rec.id = check.id;
    rec.anchor = check.anchor;
    rec.trials = check.trials;
    rec.tolerance = check.tolerance;
    Digest digest;
    int failed_trials = 0;
    for (int i = 0; i < check.trials; ++i) {
        digest.merge(outcomes[i].digest);
        if (!errors[i].empty() && failed_trials++ == 0) rec.diagnostics = "trial " + std::to_string(i) + ": " + errors[i];
    }
    rec.inputs_digest = digest.hex();

    if (check.aggregate == Aggregate::proportional) {
        double xy = 0.0, xx = 0.0;
        for (int i = 0; i < check.trials; ++i) {
            if (!errors[i].empty()) continue;
            const auto& o = outcomes[i];
            for (std::size_t k = 0; k < o.x.size(); ++k) {
                xy += o.x[k] * o.y[k];
                xx += o.x[k] * o.x[k];
            }
        }
        const double k = xx > 0.0 ? xy / xx : 0.0;
        report.constants[check.id + "/k"] = k;
        for (int i = 0; i < check.trials; ++i) {
            if (!errors[i].empty()) continue;
            const auto& o = outcomes[i];
            std::vector<double> dev(o.x.size());
            for (std::size_t j = 0; j < o.x.size(); ++j) dev[j] = k * o.x[j] - o.y[j];
            rec.residual = std::max(rec.residual, max_abs(dev) / std::max(max_abs(o.y), 1e-300));
        }
    } else {
        for (int i = 0; i < check.trials; ++i)
            if (errors[i].empty()) rec.residual = std::max(rec.residual, outcomes[i].residual);
    }
    if (failed_trials > 1) rec.diagnostics += " (" + std::to_string(failed_trials) + " trials failed)";
    rec.pass = failed_trials == 0 && std::isfinite(rec.residual) && rec.residual <= rec.tolerance;
    if (!rec.pass && rec.diagnostics.empty()) rec.diagnostics = "residual above tolerance";
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

}  // namespace

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [name, build] : registry()) n.push_back(name);
        return n;
    }();
    return names;
}

const std::vector<std::string>& expected_checks() {
    static const std::vector<std::string> ids{
        "chain-rule/jacobian",
        "chain-rule/inverse",
        "chain-rule/associativity",
        "forms/dd-zero",
        "forms/leibniz",
        "forms/pullback-d",
        "forms/bracket-jacobi",
        "forms/lie-d",
        "gauge-cocycle/central-law",
        "gauge-cocycle/diff-invariance",
        "pullback-cocycles/gauge",
        "pullback-cocycles/virasoro-bott",
        "pullback-cocycles/volume",
        "virasoro-bott/heisenberg-agreement",
        "virasoro-bott/quadrature",
        "virasoro-bott/golden",
        "heisenberg-chain/homotopy-integral",
        "heisenberg-chain/integral-fourier",
        "heisenberg-chain/homotopy-fourier",
        "heisenberg-phi/homomorphism",
        "heisenberg-phi/exact-group-law",
        "lie-algebra-jacobi/tau1-n2",
        "lie-algebra-jacobi/tau2-n2",
        "lie-algebra-jacobi/dtau1-n2",
        "lie-algebra-jacobi/dtau2-n2",
        "lie-algebra-jacobi/skew-n2",
        "lie-algebra-jacobi/tau1-n3",
        "lie-algebra-jacobi/tau2-n3",
        "lie-algebra-jacobi/dtau1-n3",
        "lie-algebra-jacobi/dtau2-n3",
        "lie-algebra-jacobi/skew-n3",
        "trivialization/tau2-divergence-free",
        "trivialization/volume-preserving",
        "trivialization/circle-tau",
        "volume-divergence/div-cocycle-tau2",
        "volume-divergence/delta-det",
        "lie-bridges/virasoro-bott",
        "lie-bridges/gauge-dtau1",
    };
    return ids;
}

void validate(const SuiteConfig& cfg) {
    if (cfg.trials < 1) throw DomainError("verify: trials must be at least 1");
    if (cfg.dim < 1 || cfg.dim > 3) throw DomainError("verify: dim must be 1, 2 or 3");
    if (cfg.degree < 4) throw DomainError("verify: degree must be at least 4");
    if (cfg.circle_degree < 4) throw DomainError("verify: circle degree must be at least 4");
    if (cfg.oversample < 2) throw DomainError("verify: oversample must be at least 2");
    if (!(cfg.jacobian_cap > 0.0 && cfg.jacobian_cap <= 0.3))
        throw DomainError("verify: jacobian cap must lie in (0, 0.3]");
    const auto& t = cfg.tolerances;
    for (double x : {t.algebraic, t.oracle, t.finite_difference, t.composition, t.exact})
        if (!(x > 0.0)) throw DomainError("verify: tolerances must be positive");
    if (cfg.suites.empty()) throw DomainError("verify: no suite selected");
    for (const auto& s : cfg.suites)
        if (s != "all" && std::find(suite_names().begin(), suite_names().end(), s) == suite_names().end())
            throw DomainError("verify: unknown suite '" + s + "'");
}

bool Report::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

Report run_suite(const SuiteConfig& cfg) {
    validate(cfg);
    cross_check_registry(cfg);
    const std::set<std::string> chosen(cfg.suites.begin(), cfg.suites.end());
    Report report;
    report.config = cfg;
    for (const auto& [name, build] : registry()) {
        if (!chosen.contains("all") && !chosen.contains(name)) continue;
        for (const auto& check : build(cfg)) report.checks.push_back(run_check(check, cfg, report));
    }
    std::sort(report.checks.begin(), report.checks.end(),
              [](const CheckRecord& a, const CheckRecord& b) { return a.id < b.id; });
    return report;
}

}  // namespace diffext::verify
