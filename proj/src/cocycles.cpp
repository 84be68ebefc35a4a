#include "diffext/cocycles.hpp"

#include "diffext/errors.hpp"

#include <cmath>
#include <limits>

namespace diffext {

namespace {

KForm d_of(const FourierScalar& a) { return exterior_d(KForm::scalar(a)); }

// The single coefficient of a top-degree form, checked to keep one sign.
const FourierScalar& top_coefficient(const KForm& omega, const char* what) {
    if (omega.degree() != omega.spec().dim()) throw ShapeError(std::string(what) + ": expected a top-degree form");
    return omega.components()[0];
}

}  // namespace

// ---------------------------------------------------------------------------
// Lie algebra side

KForm tau1_raw(const VectorField& v, const VectorField& w) {
    require_same_spec(v.spec(), w.spec(), "tau1");
    const int n = v.dim();
    // sum_{i,k} dv_i/dx_k d(dw_k/dx_i), one truncation per component
    std::vector<FourierScalar> comps;
    for (int m = 0; m < n; ++m) {
        std::vector<FourierScalar> lhs, rhs;
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                lhs.push_back(differentiate(v[i], k));
                rhs.push_back(differentiate(differentiate(w[k], i), m));
            }
        comps.push_back(multiply_sum(lhs, rhs));
    }
    return KForm::one_form(std::move(comps));
}

KForm tau2_raw(const VectorField& v, const VectorField& w) {
    require_same_spec(v.spec(), w.spec(), "tau2");
    return scale(divergence(v), d_of(divergence(w)));
}

KClass tau1(const VectorField& v, const VectorField& w) { return project_K(tau1_raw(v, w)); }
KClass tau2(const VectorField& v, const VectorField& w) { return project_K(tau2_raw(v, w)); }

KForm tau1_coordinate(const FourierScalar& v, int i, const FourierScalar& w, int j) {
    return scale(differentiate(v, j), d_of(differentiate(w, i)));
}

KForm tau2_coordinate(const FourierScalar& v, int i, const FourierScalar& w, int j) {
    return scale(differentiate(v, i), d_of(differentiate(w, j)));
}

KForm invariant_pairing(double alpha, double beta, const MatrixField& a, const FormMatrix& b) {
    require_same_spec(a.spec(), b.spec(), "invariant_pairing");
    if (b.degree() != 1) throw ShapeError("invariant_pairing: expected a matrix of 1-forms");
    const int n = a.size();
    FourierScalar trace_a(a.spec());
    for (int i = 0; i < n; ++i) trace_a = trace_a + a(i, i);
    std::vector<FourierScalar> comps;
    for (int m = 0; m < n; ++m) {
        std::vector<FourierScalar> lhs, rhs;
        FourierScalar trace_b(a.spec());
        for (int i = 0; i < n; ++i) {
            trace_b = trace_b + b(i, i).components()[m];
            for (int k = 0; k < n; ++k) {
                lhs.push_back(alpha * a(i, k));
                rhs.push_back(b(k, i).components()[m]);
            }
        }
        lhs.push_back(beta * trace_a);
        rhs.push_back(trace_b);
        comps.push_back(multiply_sum(lhs, rhs));
    }
    return KForm::one_form(std::move(comps));
}

KForm dtau(int which, const VectorField& v, const VectorField& w) {
    require_same_spec(v.spec(), w.spec(), "dtau");
    if (which == 1) return matrix_wedge_trace(exterior_d(vector_jacobian(v)), exterior_d(vector_jacobian(w)));
    if (which == 2) return wedge(d_of(divergence(v)), d_of(divergence(w)));
    throw ShapeError("dtau: which must be 1 or 2");
}

KClass lie_derivative(const VectorField& v, const KClass& c) { return project_K(lie_derivative(v, c.rep())); }

// ---------------------------------------------------------------------------
// Group side

GaugeMap jacobian_gauge(const Diffeo& f, const Thresholds& thresholds) {
    return GaugeMap::make(jacobian(f), thresholds);
}

LoopPos jacobian_loop(const Diffeo& f, const Thresholds& thresholds) {
    if (f.dim() != 1) throw ShapeError("jacobian_loop: needs the circle (dim 1)");
    return LoopPos::from_values(jacobian(f)(0, 0), thresholds);
}

KForm gauge_group_cocycle(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds) {
    return pullback_cocycle(
        [&](const GaugeMap& a, const GaugeMap& b) { return gauge_cocycle_gl(a, b, thresholds); },
        [&](const Diffeo& d) { return jacobian_gauge(d, thresholds); },
        [&](const GaugeMap& m, const Diffeo& d) { return act_on_gauge(m, d, thresholds); }, f, g);
}

double heisenberg_group_cocycle(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds) {
    return pullback_cocycle(heisenberg_cocycle_circle, [&](const Diffeo& d) { return jacobian_loop(d, thresholds); },
                            act_on_loop, f, g);
}

double virasoro_bott(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds) {
    require_same_spec(f.spec(), g.spec(), "virasoro_bott");
    if (f.dim() != 1) throw ShapeError("virasoro_bott: needs the circle (dim 1)");
    const auto u = pointwise_unary(act_on_scalar(jacobian(f)(0, 0), g), UnaryFn::ln_abs, thresholds);
    const auto v = pointwise_unary(jacobian(g)(0, 0), UnaryFn::ln_abs, thresholds);
    return integrate_mean(multiply(u, differentiate(v, 0)));
}

KClass act_on_class(const KClass& c, const Diffeo& f) { return project_K(pullback_form(c.rep(), f)); }

KForm standard_volume(const GridSpec& spec) {
    std::vector<int> all(spec.dim());
    for (int i = 0; i < spec.dim(); ++i) all[i] = i;
    return KForm::basis(spec, all);
}

LoopPos volume_delta(const Diffeo& f, const KForm& omega, const Thresholds& thresholds) {
    require_same_spec(f.spec(), omega.spec(), "volume_delta");
    const auto& a = top_coefficient(omega, "volume_delta");
    // omega(F) / omega = a(F) det(F^J) / a; a keeps one sign, so only det contributes a sign
    const LoopPos la = LoopPos::from_values(a, thresholds);
    const LoopPos det = LoopPos::from_values(determinant_field(jacobian(f)), thresholds);
    return LoopPos(act_on_scalar(la.logval(), f) + det.logval() - la.logval(), det.sign());
}

KClass volume_cocycle(const Diffeo& f, const Diffeo& g, const KForm& omega, const Thresholds& thresholds) {
    return pullback_cocycle(heisenberg_cocycle_form, [&](const Diffeo& d) { return volume_delta(d, omega, thresholds); },
                            act_on_loop, f, g);
}

FourierScalar volume_divergence(const VectorField& v, const KForm& omega, const Thresholds& thresholds) {
    const auto& a = top_coefficient(omega, "volume_divergence");
    return pointwise_divide(lie_derivative(v, omega).components()[0], a, thresholds);
}

KClass div_cocycle(const VectorField& v, const VectorField& w, const KForm& omega, const Thresholds& thresholds) {
    return project_K(scale(volume_divergence(v, omega, thresholds), d_of(volume_divergence(w, omega, thresholds))));
}

ExtensionElement extension_identity_form(const GridSpec& spec) {
    return {Diffeo::identity(spec), KForm::zero(spec, 2)};
}

ExtensionElement extension_identity_class(const GridSpec& spec) { return {Diffeo::identity(spec), KClass(spec)}; }

ExtensionElement extension_multiply(const ExtensionElement& x, const ExtensionElement& y, const KForm* omega,
                                    const Thresholds& thresholds) {
    if (x.tail.index() != y.tail.index()) throw ShapeError("extension_multiply: elements of different flavors");
    const Diffeo& f = x.base;
    const Diffeo& g = y.base;
    Diffeo base = compose(f, g, thresholds);
    if (const auto* a = std::get_if<KForm>(&x.tail)) {
        const auto& b = std::get<KForm>(y.tail);
        return {std::move(base), pullback_form(*a, g) + b + gauge_group_cocycle(f, g, thresholds)};
    }
    const auto& a = std::get<KClass>(x.tail);
    const auto& b = std::get<KClass>(y.tail);
    const KForm vol = omega ? *omega : standard_volume(f.spec());
    return {std::move(base), act_on_class(a, g) + b + volume_cocycle(f, g, vol, thresholds)};
}

double tail_distance(const ExtensionElement& a, const ExtensionElement& b) {
    if (a.tail.index() != b.tail.index() || a.base.winding() != b.base.winding())
        return std::numeric_limits<double>::infinity();
    if (const auto* x = std::get_if<KForm>(&a.tail)) return coeff_distance(*x, std::get<KForm>(b.tail));
    return coeff_distance(std::get<KClass>(a.tail), std::get<KClass>(b.tail));
}

}  // namespace diffext
