#include "diffext/cocycles.hpp"
#include "diffext/errors.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <random>

using namespace diffext;
using oracle::two_pi;

namespace {

FourierScalar trig(const GridSpec& spec, bool cosine, int axis, int freq = 1) {
    return oracle::sampled(spec, [=](std::span<const double> x) {
        return cosine ? std::cos(two_pi * freq * x[axis]) : std::sin(two_pi * freq * x[axis]);
    });
}

VectorField random_field(const GridSpec& spec, std::mt19937_64& rng, double amplitude = 1.0, int max_degree = 2) {
    std::vector<FourierScalar> c;
    for (int i = 0; i < spec.dim(); ++i) c.push_back(oracle::random_field(spec, max_degree, amplitude, rng));
    return VectorField::from_components(std::move(c));
}

Diffeo near_identity(const GridSpec& spec, std::mt19937_64& rng, double amplitude = 0.02) {
    std::vector<FourierScalar> d;
    for (int i = 0; i < spec.dim(); ++i) d.push_back(oracle::random_field(spec, 2, amplitude, rng));
    return Diffeo::from_displacement(std::move(d));
}

}  // namespace

TEST_CASE("tau1 and tau2") {
    const GridSpec spec(2, 8);
    std::mt19937_64 rng(1);
    const auto v = random_field(spec, rng), w = random_field(spec, rng);
    const double scale = tau1_raw(v, w).max_abs_coeff();

    CHECK(tau1(v, v).rep().max_abs_coeff() < 1e-12 * scale);
    CHECK(tau2(v, v).rep().max_abs_coeff() < 1e-12 * scale);
    CHECK(coeff_distance(tau1(v, w), -tau1(w, v)) < 1e-12 * scale);
    CHECK(coeff_distance(tau2(v, w), -tau2(w, v)) < 1e-12 * scale);
    CHECK(tau1(VectorField::constant(spec, {1.0, 0.0}), w).rep().max_abs_coeff() == 0.0);

    SUBCASE("divergence-free fields kill tau2") {
        const auto free = VectorField::from_components({trig(spec, false, 1), FourierScalar(spec)});
        CHECK(tau2(free, w).rep().max_abs_coeff() < 1e-12);
        CHECK(dtau(2, free, w).max_abs_coeff() < 1e-10);
    }
    SUBCASE("one dimension: tau1 = tau2") {
        const GridSpec circle(1, 8);
        const auto a = random_field(circle, rng), b = random_field(circle, rng);
        CHECK(coeff_distance(tau1(a, b), tau2(a, b)) < 1e-12);
        CHECK(dtau(1, a, b).trivial());
    }
    SUBCASE("coordinate formulas") {
        const GridSpec sp(3, 8);
        const auto a = oracle::random_field(sp, 2, 1.0, rng), b = oracle::random_field(sp, 2, 1.0, rng);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                std::vector<FourierScalar> vc(3, FourierScalar(sp)), wc(3, FourierScalar(sp));
                vc[i] = a;
                wc[j] = b;
                const auto vf = VectorField::from_components(vc), wf = VectorField::from_components(wc);
                CHECK(coeff_distance(tau1_raw(vf, wf), tau1_coordinate(a, i, b, j)) < 1e-9);
                CHECK(coeff_distance(tau2_raw(vf, wf), tau2_coordinate(a, i, b, j)) < 1e-9);
            }
    }
    SUBCASE("invariant bilinear forms") {
        for (auto [alpha, beta] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {0.7, -1.3}}) {
            const auto paired = invariant_pairing(alpha, beta, vector_jacobian(v), exterior_d(vector_jacobian(w)));
            const auto direct = alpha * tau1_raw(v, w) + beta * tau2_raw(v, w);
            CHECK(coeff_distance(paired, direct) < 1e-10);
        }
    }
}

TEST_CASE("dtau") {
    const GridSpec spec(3, 8);
    std::mt19937_64 rng(2);
    const auto v = random_field(spec, rng), w = random_field(spec, rng);
    CHECK(dtau(1, v, v).max_abs_coeff() < 1e-10);
    CHECK(dtau(2, v, v).max_abs_coeff() < 1e-10);
    CHECK(coeff_distance(dtau(1, v, w), exterior_d(tau1_raw(v, w))) < 1e-9);
    CHECK(coeff_distance(dtau(2, v, w), exterior_d(tau2_raw(v, w))) < 1e-9);
    // d of the canonical representative agrees, since the removed part is exact
    CHECK(coeff_distance(dtau(1, v, w), exterior_d(tau1(v, w).rep())) < 1e-9);
    CHECK_THROWS_AS(dtau(3, v, w), ShapeError);
}

TEST_CASE("Lie algebra cocycle law") {
    std::mt19937_64 rng(3);
    for (int n : {2, 3}) {
        const GridSpec spec(n, 8);
        const auto u = random_field(spec, rng), v = random_field(spec, rng), w = random_field(spec, rng);
        const auto c1 = [](const VectorField& a, const VectorField& b) { return tau1(a, b); };
        const auto c2 = [](const VectorField& a, const VectorField& b) { return tau2(a, b); };
        const auto d1 = [](const VectorField& a, const VectorField& b) { return dtau(1, a, b); };
        const auto d2 = [](const VectorField& a, const VectorField& b) { return dtau(2, a, b); };
        const double scale = tau1_raw(u, v).max_abs_coeff();
        CHECK(lie_cocycle_defect(c1, u, v, w).rep().max_abs_coeff() < 1e-7 * scale);
        CHECK(lie_cocycle_defect(c2, u, v, w).rep().max_abs_coeff() < 1e-7 * scale);
        CHECK(lie_cocycle_defect(d1, u, v, w).max_abs_coeff() < 1e-7 * scale);
        CHECK(lie_cocycle_defect(d2, u, v, w).max_abs_coeff() < 1e-7 * scale);
        // the raw 1-form tau1 is not a cocycle before the quotient
        const auto raw = [](const VectorField& a, const VectorField& b) { return tau1_raw(a, b); };
        CHECK(lie_cocycle_defect(raw, u, v, w).max_abs_coeff() > 1e-3 * scale);
    }
}

TEST_CASE("group cocycles from crossed homomorphisms") {
    const GridSpec spec(2, 16);
    std::mt19937_64 rng(4);
    const auto id = Diffeo::identity(spec);
    const auto f = near_identity(spec, rng), g = near_identity(spec, rng), h = near_identity(spec, rng);
    const auto vol = standard_volume(spec);

    CHECK(gauge_group_cocycle(id, g).max_abs_coeff() < 1e-14);
    CHECK(gauge_group_cocycle(f, id).max_abs_coeff() < 1e-14);
    CHECK(volume_cocycle(id, g, vol).rep().max_abs_coeff() < 1e-14);
    CHECK(volume_cocycle(f, id, vol).rep().max_abs_coeff() < 1e-14);

    SUBCASE("gauge flavor") {
        const auto lhs = pullback_form(gauge_group_cocycle(f, g), h) + gauge_group_cocycle(compose(f, g), h);
        const auto rhs = gauge_group_cocycle(f, compose(g, h)) + gauge_group_cocycle(g, h);
        CHECK(coeff_distance(lhs, rhs) < 1e-7);
        CHECK(gauge_group_cocycle(f, g).max_abs_coeff() > 1e-3);
    }
    SUBCASE("volume flavor") {
        const KForm omega = scale(FourierScalar::constant(spec, 1.0) + 0.2 * trig(spec, true, 0), vol);
        for (const KForm* w : {&vol, &omega}) {
            const auto lhs = act_on_class(volume_cocycle(f, g, *w), h) + volume_cocycle(compose(f, g), h, *w);
            const auto rhs = volume_cocycle(f, compose(g, h), *w) + volume_cocycle(g, h, *w);
            CHECK(coeff_distance(lhs, rhs) < 1e-7);
        }
    }
    SUBCASE("circle flavor") {
        const GridSpec circle(1, 32);
        const auto a = near_identity(circle, rng), b = near_identity(circle, rng), c = near_identity(circle, rng);
        const double lhs = heisenberg_group_cocycle(a, b) + heisenberg_group_cocycle(compose(a, b), c);
        const double rhs = heisenberg_group_cocycle(a, compose(b, c)) + heisenberg_group_cocycle(b, c);
        CHECK(std::abs(lhs - rhs) < 1e-7);
    }
}

TEST_CASE("Virasoro-Bott cocycle") {
    const GridSpec circle(1, 32);
    const auto f = Diffeo::from_displacement({0.1 * trig(circle, false, 0)});
    const auto g = Diffeo::from_displacement({0.07 * trig(circle, true, 0)});
    const auto id = Diffeo::identity(circle);
    CHECK(std::abs(virasoro_bott(id, g)) < 1e-15);
    CHECK(std::abs(virasoro_bott(f, id)) < 1e-15);
    CHECK(std::abs(virasoro_bott(f, g) - heisenberg_group_cocycle(f, g)) < 1e-9);

    // midpoint quadrature of ln F'(G(t)) * G''(t) / G'(t) with closed forms
    const int m = 4096;
    double quad = 0.0;
    for (int p = 0; p < m; ++p) {
        const double t = (p + 0.5) / m;
        const double gt = t + 0.07 * std::cos(two_pi * t);
        const double g1 = 1.0 - 0.07 * two_pi * std::sin(two_pi * t);
        const double g2 = -0.07 * two_pi * two_pi * std::cos(two_pi * t);
        const double f1 = 1.0 + 0.1 * two_pi * std::cos(two_pi * gt);
        quad += std::log(f1) * g2 / g1 / m;
    }
    CHECK(std::abs(virasoro_bott(f, g) - quad) < 1e-9);
    CHECK(std::abs(quad) > 1e-3);

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        const auto a = near_identity(circle, rng), b = near_identity(circle, rng);
        CHECK(std::abs(virasoro_bott(a, b) - heisenberg_group_cocycle(a, b)) < 1e-9);
        // the volume cocycle on the circle integrates to the same number
        CHECK(std::abs(integrate_mean(volume_cocycle(a, b, standard_volume(circle)).rep().components()[0]) -
                       virasoro_bott(a, b)) < 1e-9);
    }
}

TEST_CASE("extension groups") {
    const GridSpec spec(2, 16);
    std::mt19937_64 rng(6);
    for (bool forms : {true, false}) {
        CAPTURE(forms);
        const auto e = forms ? extension_identity_form(spec) : extension_identity_class(spec);
        const auto ee = extension_multiply(e, e);
        CHECK(tail_distance(ee, e) < 1e-30);

        auto tail = [&](double s) -> std::variant<KForm, KClass> {
            const auto a = oracle::random_field(spec, 2, s, rng), b = oracle::random_field(spec, 2, s, rng);
            if (forms) return scale(a, KForm::basis(spec, {0, 1}));
            return project_K(KForm::one_form({a, b}));
        };
        const ExtensionElement x{Diffeo::identity(spec), tail(1.0)}, y{Diffeo::identity(spec), tail(1.0)};
        const auto xy = extension_multiply(x, y);
        const ExtensionElement sum{Diffeo::identity(spec),
                                   forms ? std::variant<KForm, KClass>(std::get<KForm>(x.tail) + std::get<KForm>(y.tail))
                                         : std::variant<KForm, KClass>(std::get<KClass>(x.tail) + std::get<KClass>(y.tail))};
        CHECK(tail_distance(xy, sum) < 1e-14);

        const ExtensionElement a{near_identity(spec, rng), tail(0.1)}, b{near_identity(spec, rng), tail(0.1)},
            c{near_identity(spec, rng), tail(0.1)};
        CHECK(tail_distance(extension_multiply(extension_multiply(a, b), c), extension_multiply(a, extension_multiply(b, c))) < 1e-7);
    }
    CHECK_THROWS_AS(extension_multiply(extension_identity_form(spec), extension_identity_class(spec)), ShapeError);
}

TEST_CASE("volume crossed homomorphism") {
    const GridSpec spec(2, 12);
    std::mt19937_64 rng(7);
    const auto vol = standard_volume(spec);
    CHECK(volume_delta(Diffeo::translation(spec, {0.3, 0.1}), vol).logval().max_abs_coeff() < 1e-15);

    const auto f = near_identity(spec, rng), g = near_identity(spec, rng);
    const auto det = determinant_field(jacobian(f));
    CHECK(coeff_distance(volume_delta(f, vol).values(), det) < 1e-10);

    const KForm omega = scale(FourierScalar::constant(spec, 1.0) + 0.2 * trig(spec, true, 0), vol);
    SUBCASE("ratio oracle on the grid") {
        // a(F(x)) det F^J(x) / a(x) with a and F evaluated term by term
        const auto delta = volume_delta(f, omega).values();
        const auto jac = jacobian(f);
        const auto grid = grid_points(spec);
        const auto got = grid_samples(delta);
        double worst = 0.0;
        for (std::size_t p = 0; p < grid.size(); p += 7) {
            const auto x = grid[p];
            const double y0 = x[0] + oracle::direct_eval(f.displacement()[0], x);
            const double d = oracle::direct_eval(jac(0, 0), x) * oracle::direct_eval(jac(1, 1), x) -
                             oracle::direct_eval(jac(0, 1), x) * oracle::direct_eval(jac(1, 0), x);
            const double expected = (1.0 + 0.2 * std::cos(two_pi * y0)) * d / (1.0 + 0.2 * std::cos(two_pi * x[0]));
            worst = std::max(worst, std::abs(got[p] - expected));
        }
        CHECK(worst < 1e-8);
    }
    SUBCASE("crossed homomorphism law") {
        for (const KForm* w : {&vol, &omega}) {
            const auto lhs = volume_delta(compose(f, g), *w).logval();
            const auto rhs = loop_multiply(act_on_loop(volume_delta(f, *w), g), volume_delta(g, *w)).logval();
            CHECK(sup_norm(lhs - rhs) < 1e-7);
        }
    }
    SUBCASE("volume-preserving maps") {
        // shears x0 + a(x1) and x1 + b(x0) preserve dx0 ^ dx1
        const auto s1 = Diffeo::from_displacement({0.05 * trig(spec, true, 1), FourierScalar(spec)});
        const auto s2 = Diffeo::from_displacement({FourierScalar(spec), 0.04 * trig(spec, false, 0, 2)});
        CHECK(volume_delta(s1, vol).logval().max_abs_coeff() < 1e-13);
        CHECK(volume_cocycle(s1, s2, vol).rep().max_abs_coeff() < 1e-12);
    }
    SUBCASE("standard volume reduces to log-determinants") {
        const auto u = pointwise_unary(act_on_scalar(determinant_field(jacobian(f)), g), UnaryFn::ln_abs);
        const auto v = pointwise_unary(determinant_field(jacobian(g)), UnaryFn::ln_abs);
        CHECK(coeff_distance(volume_cocycle(f, g, vol), project_K(scale(u, exterior_d(KForm::scalar(v))))) < 1e-9);
    }
    CHECK_THROWS_AS(volume_delta(f, scale(trig(spec, false, 0), vol)), DomainError);
    CHECK_THROWS_AS(volume_delta(f, KForm::basis(spec, {0})), ShapeError);
}

TEST_CASE("divergence cocycle") {
    const GridSpec spec(2, 8);
    std::mt19937_64 rng(8);
    const auto v = random_field(spec, rng), w = random_field(spec, rng);
    const auto vol = standard_volume(spec);
    CHECK(coeff_distance(div_cocycle(v, w, vol), tau2(v, w)) < 1e-12);
    CHECK(div_cocycle(v, v, vol).rep().max_abs_coeff() < 1e-11);
    const auto free = VectorField::from_components({trig(spec, false, 1), trig(spec, true, 0)});
    CHECK(div_cocycle(free, w, vol).rep().max_abs_coeff() < 1e-12);

    const GridSpec fine(2, 16);
    const KForm omega = scale(pointwise_unary(0.2 * trig(fine, true, 0), UnaryFn::exp), standard_volume(fine));
    const auto a = random_field(fine, rng), b = random_field(fine, rng);
    CHECK(div_cocycle(a, a, omega).rep().max_abs_coeff() < 1e-9);
    // div_omega(v) = div(v) + v . d ln(a)
    const auto expected = divergence(a) + directional(a, 0.2 * trig(fine, true, 0));
    CHECK(coeff_distance(volume_divergence(a, omega), expected) < 1e-9);
}

TEST_CASE("group to Lie algebra bridge") {
    std::mt19937_64 rng(9);
    const double h = 1e-2;
    SUBCASE("Virasoro-Bott gives a multiple of the Virasoro cocycle") {
        const GridSpec circle(1, 16);
        const auto b = [](const Diffeo& f, const Diffeo& g) { return virasoro_bott(f, g); };
        const auto v = random_field(circle, rng, 0.05);
        CHECK(std::abs(lie_from_group(b, v, v, h)) < 1e-12);
        std::vector<double> ratios;
        for (int trial = 0; trial < 4; ++trial) {
            const auto x = random_field(circle, rng, 0.05), y = random_field(circle, rng, 0.05);
            const double vir = integrate_mean(multiply(differentiate(x[0], 0), differentiate(differentiate(y[0], 0), 0)));
            const double delta = lie_from_group(b, x, y, h);
            CHECK(std::abs(delta - 2.0 * vir) <= 1e-4 * std::abs(vir));
        }
    }
    SUBCASE("the gauge group cocycle gives a multiple of dtau1") {
        const GridSpec spec(2, 8);
        const auto b = [](const Diffeo& f, const Diffeo& g) { return gauge_group_cocycle(f, g); };
        for (int trial = 0; trial < 2; ++trial) {
            const auto x = random_field(spec, rng, 0.05), y = random_field(spec, rng, 0.05);
            const auto d = dtau(1, x, y);
            CHECK(coeff_distance(lie_from_group(b, x, y, 5e-3), 2.0 * d) <= 1e-4 * d.max_abs_coeff());
        }
    }
}
