#include "diffext/diffeo.hpp"
#include "diffext/errors.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <boost/numeric/odeint.hpp>

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

Diffeo near_identity(const GridSpec& spec, double amplitude, std::mt19937_64& rng, int max_degree = 2) {
    std::vector<FourierScalar> d;
    for (int i = 0; i < spec.dim(); ++i) d.push_back(oracle::random_field(spec, max_degree, amplitude, rng));
    return Diffeo::from_displacement(std::move(d));
}

VectorField random_vector_field(const GridSpec& spec, double amplitude, std::mt19937_64& rng, int max_degree = 2) {
    std::vector<FourierScalar> c;
    for (int i = 0; i < spec.dim(); ++i) c.push_back(oracle::random_field(spec, max_degree, amplitude, rng));
    return VectorField::from_components(std::move(c));
}

// F(x) evaluated term by term, independent of the library's evaluator.
std::vector<double> direct_apply(const Diffeo& f, std::span<const double> x) {
    const int n = f.dim();
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
        y[i] = oracle::direct_eval(f.displacement()[i], x);
        for (int k = 0; k < n; ++k) y[i] += f.winding(i, k) * x[k];
    }
    return y;
}

double torus_gap(double a, double b) {
    const double d = a - b;
    return std::abs(d - std::round(d));
}

PointCloud random_points(int dim, std::size_t count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> c(count * dim);
    for (auto& x : c) x = u(rng);
    return PointCloud(dim, std::move(c));
}

}  // namespace

TEST_CASE("construction and regularity") {
    const GridSpec spec(2, 8);
    const auto id = Diffeo::identity(spec);
    CHECK(id.certificate().min_abs_det == doctest::Approx(1.0));
    CHECK(coeff_distance(jacobian(id), MatrixField::identity(spec)) == 0.0);
    // x + 0.3 sin(2 pi x0) e0 has d/dx0 = 1 + 0.6 pi cos, which changes sign
    CHECK_THROWS_AS(Diffeo::from_displacement({0.3 * trig(spec, false, 0), FourierScalar(spec)}), DomainError);
    CHECK_THROWS_AS(Diffeo::make({2, 0, 0, 1}, {FourierScalar(spec), FourierScalar(spec)}), DomainError);
    CHECK_THROWS_AS(Diffeo::from_displacement({FourierScalar(spec)}), ShapeError);
}

TEST_CASE("compose") {
    const GridSpec spec(2, 12);
    std::mt19937_64 rng(1);
    const auto g = near_identity(spec, 0.02, rng);
    const auto id = Diffeo::identity(spec);
    CHECK(coeff_distance(compose(id, g), g) < 1e-15);
    CHECK(coeff_distance(compose(g, id), g) < 1e-15);

    const auto t1 = Diffeo::translation(spec, {0.1, 0.25}), t2 = Diffeo::translation(spec, {0.3, -0.05});
    CHECK(coeff_distance(compose(t1, t2), Diffeo::translation(spec, {0.4, 0.2})) < 1e-15);

    SUBCASE("dense-grid composition oracle") {
        const auto f = near_identity(spec, 0.02, rng);
        const auto fg = compose(f, g);
        const auto pts = random_points(2, 50, rng);
        const auto got = apply(fg, pts);
        double worst = 0.0;
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const auto expected = direct_apply(f, direct_apply(g, pts[p]));
            for (int i = 0; i < 2; ++i) worst = std::max(worst, std::abs(got[p][i] - expected[i]));
        }
        CHECK(worst < 1e-9);
    }
    SUBCASE("associativity") {
        for (int trial = 0; trial < 3; ++trial) {
            const auto a = near_identity(spec, 0.02, rng), b = near_identity(spec, 0.02, rng),
                       c = near_identity(spec, 0.02, rng);
            CHECK(coeff_distance(compose(compose(a, b), c), compose(a, compose(b, c))) < 1e-7);
        }
    }
    SUBCASE("nontrivial winding") {
        const auto shear = Diffeo::make({1, 1, 0, 1}, {0.02 * trig(spec, true, 1), FourierScalar(spec)});
        const auto back = inverse(shear);
        CHECK(back.winding() == std::vector<int>{1, -1, 0, 1});
        CHECK(sup_distance(compose(shear, back), id) < 1e-10);
        CHECK(sup_distance(compose(back, shear), id) < 1e-10);
    }
}

TEST_CASE("inverse") {
    const GridSpec spec(2, 8);
    CHECK(coeff_distance(inverse(Diffeo::identity(spec)), Diffeo::identity(spec)) < 1e-15);
    CHECK(coeff_distance(inverse(Diffeo::translation(spec, {0.2, -0.7})), Diffeo::translation(spec, {-0.2, 0.7})) < 1e-14);

    SUBCASE("circle map against bisection") {
        // the inverse is not band-limited; its coefficients decay slowly enough to need a long series
        const GridSpec circle(1, 64);
        const auto f = Diffeo::from_displacement({0.1 * trig(circle, false, 0)});
        const auto g = inverse(f);
        CHECK(sup_distance(compose(f, g), Diffeo::identity(circle)) < 1e-8);
        // F is increasing on R, so the preimage of y is bracketed by [y - 0.2, y + 0.2]
        const auto pts = PointCloud(1, {0.0, 0.13, 0.5, 0.77, 0.91});
        const auto got = apply(g, pts);
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const double y = pts[p][0];
            double lo = y - 0.2, hi = y + 0.2;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                (mid + 0.1 * std::sin(two_pi * mid) < y ? lo : hi) = mid;
            }
            CHECK(torus_gap(got[p][0], 0.5 * (lo + hi)) < 1e-8);
        }
    }
    SUBCASE("random near-identity") {
        std::mt19937_64 rng(6);
        const GridSpec sp(2, 12);
        const auto f = near_identity(sp, 0.02, rng);
        CHECK(sup_distance(compose(f, inverse(f)), Diffeo::identity(sp)) < 1e-7);
    }
    SUBCASE("non-convergence is reported") {
        Thresholds t;
        t.newton_max_steps = 1;
        std::mt19937_64 rng(2);
        CHECK_THROWS_AS(inverse(near_identity(spec, 0.02, rng), t), ConvergenceError);
    }
}

TEST_CASE("jacobian and the chain rule") {
    const GridSpec circle(1, 8);
    const double eps = 0.1;
    const auto f = Diffeo::from_displacement({eps * trig(circle, false, 0)});
    const auto expected = FourierScalar::constant(circle, 1.0) + two_pi * eps * trig(circle, true, 0);
    CHECK(coeff_distance(jacobian(f)(0, 0), expected) < 1e-15);

    const GridSpec spec(2, 12);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 3; ++trial) {
        const auto a = near_identity(spec, 0.02, rng), b = near_identity(spec, 0.02, rng);
        const auto lhs = jacobian(compose(a, b));
        const auto rhs = act_on_matrix(jacobian(a), b) * jacobian(b);
        CHECK(sup_distance(lhs, rhs) < 1e-7);
    }
}

TEST_CASE("action on functions") {
    const GridSpec spec(2, 8);
    std::mt19937_64 rng(4);
    const auto a = oracle::random_field(spec, 3, 1.0, rng);
    CHECK(coeff_distance(act_on_scalar(a, Diffeo::identity(spec)), a) < 1e-14);
    const auto f = near_identity(spec, 0.02, rng);
    CHECK(coeff_distance(act_on_scalar(FourierScalar::constant(spec, 1.5), f), FourierScalar::constant(spec, 1.5)) < 1e-15);
    const auto shifted = act_on_scalar(trig(spec, false, 0), Diffeo::translation(spec, {0.25, 0.0}));
    CHECK(coeff_distance(shifted, trig(spec, true, 0)) < 1e-14);

    const GridSpec big(2, 12);
    const auto b = oracle::random_field(big, 2, 1.0, rng);
    const auto f1 = near_identity(big, 0.02, rng), g1 = near_identity(big, 0.02, rng);
    CHECK(sup_norm(act_on_scalar(act_on_scalar(b, f1), g1) - act_on_scalar(b, compose(f1, g1))) < 1e-7);
}

TEST_CASE("pullback of forms") {
    const GridSpec spec(2, 12);
    const double eps = 0.05;
    const auto f = Diffeo::from_displacement({eps * trig(spec, false, 0), FourierScalar(spec)});
    const auto pulled = pullback_form(KForm::basis(spec, {0}), f);
    const auto expected = FourierScalar::constant(spec, 1.0) + two_pi * eps * trig(spec, true, 0);
    CHECK(coeff_distance(pulled.component({0}), expected) < 1e-14);
    CHECK(pulled.component({1}).max_abs_coeff() < 1e-14);

    std::mt19937_64 rng(5);
    std::vector<FourierScalar> c{oracle::random_field(spec, 2, 1.0, rng), oracle::random_field(spec, 2, 1.0, rng)};
    const auto omega = KForm::one_form(c);
    CHECK(coeff_distance(pullback_form(omega, Diffeo::identity(spec)), omega) < 1e-14);

    const auto g = near_identity(spec, 0.02, rng), h = near_identity(spec, 0.02, rng);
    CHECK(coeff_distance(pullback_form(pullback_form(omega, g), h), pullback_form(omega, compose(g, h))) < 1e-7);
    CHECK(coeff_distance(exterior_d(pullback_form(omega, g)), pullback_form(exterior_d(omega), g)) < 1e-7);
    const auto scalar = KForm::scalar(c[0]);
    CHECK(coeff_distance(exterior_d(pullback_form(scalar, g)), pullback_form(exterior_d(scalar), g)) < 1e-7);
}

TEST_CASE("vector fields") {
    const GridSpec spec(2, 8);
    const auto d0 = VectorField::constant(spec, {1.0, 0.0}), d1 = VectorField::constant(spec, {0.0, 1.0});
    CHECK(lie_bracket(d0, d1).max_abs_coeff() == 0.0);
    const auto w = VectorField::from_components({FourierScalar(spec), trig(spec, false, 0)});
    const auto br = lie_bracket(d0, w);
    CHECK(br[0].max_abs_coeff() == 0.0);
    CHECK(coeff_distance(br[1], two_pi * trig(spec, true, 0)) < 1e-14);

    CHECK(divergence(d0).max_abs_coeff() == 0.0);
    CHECK(divergence(VectorField::from_components({trig(spec, false, 1), FourierScalar(spec)})).max_abs_coeff() < 1e-14);
    CHECK(coeff_distance(divergence(VectorField::from_components({trig(spec, false, 0), FourierScalar(spec)})),
                         two_pi * trig(spec, true, 0)) < 1e-14);

    SUBCASE("Jacobi identity") {
        const GridSpec sp(3, 8);
        std::mt19937_64 rng(7);
        for (int trial = 0; trial < 2; ++trial) {
            const auto u = random_vector_field(sp, 1.0, rng), v = random_vector_field(sp, 1.0, rng),
                       x = random_vector_field(sp, 1.0, rng);
            const auto j = lie_bracket(u, lie_bracket(v, x)) + lie_bracket(v, lie_bracket(x, u)) + lie_bracket(x, lie_bracket(u, v));
            CHECK(j.max_abs_coeff() <= 1e-8);
        }
    }
}

TEST_CASE("Lie derivative") {
    const GridSpec spec(2, 8);
    std::mt19937_64 rng(8);
    const auto a = oracle::random_field(spec, 3, 1.0, rng);
    const auto d0 = VectorField::constant(spec, {1.0, 0.0});
    const auto l = lie_derivative(d0, scale(a, KForm::basis(spec, {1})));
    CHECK(coeff_distance(l.component({1}), differentiate(a, 0)) < 1e-13);
    CHECK(l.component({0}).max_abs_coeff() == 0.0);

    const auto v = random_vector_field(spec, 1.0, rng);
    CHECK(coeff_distance(lie_derivative(v, KForm::scalar(a)).component({}), directional(v, a)) == 0.0);

    const GridSpec sp(3, 8);
    const auto u = random_vector_field(sp, 1.0, rng);
    for (int k = 0; k < 3; ++k) {
        std::vector<FourierScalar> c;
        for (std::size_t p = 0; p < multi_indices(3, k).size(); ++p) c.push_back(oracle::random_field(sp, 2, 1.0, rng));
        const auto form = KForm::from_components(sp, k, std::move(c));
        CHECK(coeff_distance(exterior_d(lie_derivative(u, form)), lie_derivative(u, exterior_d(form))) < 1e-7);
    }

    SUBCASE("derivative of the pullback along the flow") {
        const GridSpec s2(2, 12);
        const auto w = random_vector_field(s2, 0.1, rng);
        const auto omega = KForm::one_form({oracle::random_field(s2, 2, 1.0, rng), oracle::random_field(s2, 2, 1.0, rng)});
        const double h = 1e-3;
        const auto fd = (1.0 / (2.0 * h)) * (pullback_form(omega, flow(w, h)) - pullback_form(omega, flow(w, -h)));
        CHECK(coeff_distance(fd, lie_derivative(w, omega)) < 1e-4);
    }
}

TEST_CASE("flow") {
    const GridSpec spec(2, 8);
    const auto c = VectorField::constant(spec, {0.3, 0.0});
    CHECK(coeff_distance(flow(c, 0.5), Diffeo::translation(spec, {0.15, 0.0})) < 1e-14);
    std::mt19937_64 rng(9);
    const auto v = random_vector_field(spec, 0.1, rng);
    CHECK(coeff_distance(flow(v, 0.0), Diffeo::identity(spec)) == 0.0);

    SUBCASE("adaptive integrator oracle") {
        const GridSpec circle(1, 32);
        const auto s = VectorField::from_components({0.2 * trig(circle, false, 0)});
        const auto phi = flow(s, 0.1);
        using namespace boost::numeric::odeint;
        const auto pts = PointCloud(1, {0.0, 0.1, 0.3, 0.62, 0.85});
        const auto got = apply(phi, pts);
        for (std::size_t p = 0; p < pts.size(); ++p) {
            double x = pts[p][0];
            integrate_adaptive(make_controlled<runge_kutta_dopri5<double>>(1e-14, 1e-14),
                               [](const double& y, double& dy, double) { dy = 0.2 * std::sin(two_pi * y); }, x, 0.0,
                               0.1, 1e-3);
            CHECK(std::abs(got[p][0] - x) < 1e-8);
        }
    }
    SUBCASE("one-parameter group") {
        const GridSpec sp(2, 12);
        const auto w = random_vector_field(sp, 0.2, rng);
        CHECK(sup_distance(flow(w, 0.3), compose(flow(w, 0.1), flow(w, 0.2))) < 1e-6);
    }
    SUBCASE("jacobian at t = 0") {
        const GridSpec sp(2, 12);
        const auto w = random_vector_field(sp, 0.2, rng);
        const double h = 1e-4;
        const auto fd = (1.0 / (2.0 * h)) * (jacobian(flow(w, h)) - jacobian(flow(w, -h)));
        CHECK(sup_distance(fd, vector_jacobian(w)) < 1e-4);
    }
    SUBCASE("large times are rejected") {
        const auto big = VectorField::from_components({3.0 * trig(spec, false, 0), FourierScalar(spec)});
        CHECK_THROWS_AS(flow(big, 1.0), DomainError);
    }
}
