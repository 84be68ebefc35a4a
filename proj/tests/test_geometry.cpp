#include "diffext/errors.hpp"
#include "diffext/geometry.hpp"

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

KForm random_form(const GridSpec& spec, int degree, std::mt19937_64& rng, int max_degree = 3) {
    std::vector<FourierScalar> c;
    for (std::size_t i = 0; i < multi_indices(spec.dim(), degree).size(); ++i)
        c.push_back(oracle::random_field(spec, max_degree, 1.0, rng));
    return KForm::from_components(spec, degree, std::move(c));
}

MatrixField random_matrix(const GridSpec& spec, double amplitude, std::mt19937_64& rng) {
    std::vector<FourierScalar> e;
    for (int i = 0; i < spec.dim() * spec.dim(); ++i) e.push_back(oracle::random_field(spec, 2, amplitude, rng));
    return MatrixField::from_entries(spec, std::move(e));
}

}  // namespace

TEST_CASE("multi_indices") {
    CHECK(multi_indices(3, 2) == std::vector<std::vector<int>>{{0, 1}, {0, 2}, {1, 2}});
    CHECK(multi_indices(2, 0).size() == 1);
    CHECK(multi_indices(2, 3).empty());
}

TEST_CASE("wedge of basis forms") {
    const GridSpec spec(2, 4);
    const auto dx0 = KForm::basis(spec, {0}), dx1 = KForm::basis(spec, {1});
    const auto w01 = wedge(dx0, dx1), w10 = wedge(dx1, dx0);
    CHECK(w01.component({0, 1}).coeff({0, 0}).real() == doctest::Approx(1.0));
    CHECK(coeff_distance(w10, -w01) == 0.0);
    CHECK(wedge(dx0, dx0).max_abs_coeff() == 0.0);

    SUBCASE("a dx0 ^ a dx0 vanishes") {
        const auto a = scale(trig(spec, true, 0), dx0);
        CHECK(wedge(a, a).max_abs_coeff() == 0.0);
    }
    SUBCASE("products of cosines") {
        const auto c0 = trig(spec, true, 0), c1 = trig(spec, true, 1);
        const auto w = wedge(scale(c0, dx0), scale(c1, dx1));
        CHECK(coeff_distance(w.component({0, 1}), multiply(c0, c1)) < 1e-15);
    }
    SUBCASE("degree above the dimension is trivial") {
        const auto top = wedge(w01, dx0);
        CHECK(top.trivial());
        CHECK(top.components().empty());
    }
}

TEST_CASE("exterior derivative") {
    const GridSpec spec(2, 5);
    const auto s = trig(spec, false, 0);
    const auto ds = exterior_d(KForm::scalar(s));
    CHECK(coeff_distance(ds.component({0}), two_pi * trig(spec, true, 0)) < 1e-14);
    CHECK(ds.component({1}).max_abs_coeff() < 1e-14);

    // d(sin(2 pi x0) dx1) = 2 pi cos(2 pi x0) dx0 ^ dx1
    const auto d1 = exterior_d(scale(s, KForm::basis(spec, {1})));
    CHECK(coeff_distance(d1.component({0, 1}), two_pi * trig(spec, true, 0)) < 1e-14);
    // d(sin(2 pi x0) dx0) = 0
    CHECK(exterior_d(scale(s, KForm::basis(spec, {0}))).max_abs_coeff() < 1e-14);

    std::mt19937_64 rng(2);
    for (int n : {2, 3}) {
        const GridSpec sp(n, 4);
        for (int k = 0; k < n - 1; ++k) {
            const auto f = random_form(sp, k, rng);
            const auto dd = exterior_d(exterior_d(f));
            CHECK(dd.max_abs_coeff() <= 1e-12 * f.max_abs_coeff());
        }
    }
}

TEST_CASE("graded Leibniz rule") {
    const GridSpec spec(3, 8);
    std::mt19937_64 rng(8);
    for (int k : {0, 1}) {
        const auto a = random_form(spec, k, rng, 2);
        const auto b = random_form(spec, 1, rng, 2);
        const auto lhs = exterior_d(wedge(a, b));
        const double sign = k % 2 ? -1.0 : 1.0;
        const auto rhs = wedge(exterior_d(a), b) + sign * wedge(a, exterior_d(b));
        CHECK(coeff_distance(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("project_K") {
    const GridSpec spec(2, 4);
    const auto c0 = trig(spec, true, 0);
    // cos(2 pi x0) dx0 is exact
    CHECK(project_K(KForm::one_form({c0, FourierScalar(spec)})).rep().max_abs_coeff() < 1e-15);
    // cos(2 pi x0) dx1 and constants are already canonical
    const auto f = KForm::one_form({FourierScalar(spec), c0});
    CHECK(coeff_distance(project_K(f).rep(), f) < 1e-15);
    const auto g = KForm::one_form({FourierScalar::constant(spec, 2.0), FourierScalar::constant(spec, -1.0)});
    CHECK(coeff_distance(project_K(g).rep(), g) == 0.0);

    std::mt19937_64 rng(12);
    const auto h = random_form(spec, 1, rng);
    const auto p = project_K(h);
    CHECK(coeff_distance(project_K(p.rep()), p) < 1e-15);
    // the removed part is exact, so it differs from h by d of something: check d(h - rep) = 0
    CHECK(exterior_d(h - p.rep()).max_abs_coeff() < 1e-13);
    // adding an exact form does not change the class
    const auto u = oracle::random_field(spec, 3, 1.0, rng);
    CHECK(coeff_distance(project_K(h + exterior_d(KForm::scalar(u))), p) < 1e-13);
    CHECK_THROWS_AS(project_K(KForm::scalar(u)), ShapeError);
}

TEST_CASE("matrix fields") {
    const GridSpec spec(2, 8);
    CHECK(coeff_distance(trace_field(MatrixField::identity(spec)), FourierScalar::constant(spec, 2.0)) == 0.0);
    const auto c0 = trig(spec, true, 0), s1 = trig(spec, false, 1);
    CHECK(coeff_distance(trace_field(MatrixField::diagonal({c0, s1})), c0 + s1) == 0.0);

    SUBCASE("inverse of the identity") {
        const auto id = MatrixField::identity(spec);
        CHECK(coeff_distance(matrix_inverse_field(id), id) < 1e-15);
    }
    SUBCASE("inverse of diag(e^u, e^-u)") {
        const auto u = 0.2 * c0;
        const auto eu = pointwise_unary(u, UnaryFn::exp), emu = pointwise_unary(-u, UnaryFn::exp);
        const auto inv = matrix_inverse_field(MatrixField::diagonal({eu, emu}));
        CHECK(coeff_distance(inv, MatrixField::diagonal({emu, eu})) < 1e-12);
    }
    SUBCASE("Neumann series oracle") {
        std::mt19937_64 rng(31);
        const GridSpec sp(2, 12);
        const auto e = random_matrix(sp, 0.05, rng);
        const auto m = MatrixField::identity(sp) + e;
        // (I + E)^-1 = sum_k (-E)^k, computed by repeated truncated products
        auto term = MatrixField::identity(sp), acc = MatrixField::identity(sp);
        for (int k = 1; k < 30; ++k) {
            term = (-1.0) * (term * e);
            acc = acc + term;
        }
        const auto inv = matrix_inverse_field(m);
        CHECK(sup_distance(inv, acc) < 1e-8);
        CHECK(sup_distance(m * inv, MatrixField::identity(sp)) < 1e-8);
    }
    SUBCASE("near-singular input") {
        const auto m = MatrixField::diagonal({trig(spec, false, 0), FourierScalar::constant(spec, 1.0)});
        CHECK_THROWS_AS(matrix_inverse_field(m), DomainError);
        const auto cert = det_certificate(m);
        CHECK_FALSE(cert.constant_sign);
        CHECK(cert.min_abs_det < 0.1);
    }
    SUBCASE("determinant") {
        const auto d = determinant_field(MatrixField::diagonal({FourierScalar::constant(spec, 2.0), c0 + FourierScalar::constant(spec, 3.0)}));
        CHECK(coeff_distance(d, 2.0 * c0 + FourierScalar::constant(spec, 6.0)) < 1e-14);
    }
    CHECK_THROWS_AS(MatrixField::from_entries(spec, {c0}), ShapeError);
}

TEST_CASE("matrix wedge trace") {
    std::mt19937_64 rng(44);
    SUBCASE("constant matrices give zero") {
        const GridSpec spec(2, 4);
        const auto m = MatrixField::identity(spec) + MatrixField::diagonal({FourierScalar::constant(spec, 2.0), FourierScalar(spec)});
        CHECK(matrix_wedge_trace(exterior_d(m), exterior_d(m)).max_abs_coeff() == 0.0);
    }
    SUBCASE("one-dimensional case is a 2-form, hence trivial") {
        const GridSpec spec(1, 4);
        const auto m = random_matrix(spec, 1.0, rng);
        CHECK(matrix_wedge_trace(exterior_d(m), exterior_d(m)).trivial());
    }
    SUBCASE("Tr(a ^ b) = -Tr(b ^ a) for 1-forms") {
        const GridSpec spec(2, 8);
        const auto a = exterior_d(random_matrix(spec, 1.0, rng)), b = exterior_d(random_matrix(spec, 1.0, rng));
        CHECK(coeff_distance(matrix_wedge_trace(a, b), -matrix_wedge_trace(b, a)) < 1e-11);
    }
    SUBCASE("explicit entrywise sum") {
        const GridSpec spec(2, 8);
        const auto f = random_matrix(spec, 1.0, rng), g = random_matrix(spec, 1.0, rng);
        const auto a = f * exterior_d(g), b = exterior_d(f) * g;
        auto acc = KForm::zero(spec, 2);
        for (int i = 0; i < 2; ++i)
            for (int k = 0; k < 2; ++k) acc = acc + wedge(a(i, k), b(k, i));
        CHECK(coeff_distance(matrix_wedge_trace(a, b), acc) < 1e-12);
    }
}
