#pragma once

#include "diffext/config.hpp"
#include "diffext/diffeo.hpp"
#include "diffext/gauge.hpp"
#include "diffext/geometry.hpp"

#include <variant>

namespace diffext {

// ---------------------------------------------------------------------------
// Lie algebra side

/// Tr(v^J dw^J) as a 1-form, before passing to the quotient.
KForm tau1_raw(const VectorField& v, const VectorField& w);
/// Tr(v^J) Tr(dw^J) = div(v) d div(w) as a 1-form.
KForm tau2_raw(const VectorField& v, const VectorField& w);
KClass tau1(const VectorField& v, const VectorField& w);
KClass tau2(const VectorField& v, const VectorField& w);

/// tau1 on v d/dx_i, w d/dx_j in coordinates: dv/dx_j sum_k d^2 w / dx_i dx_k dx_k.
KForm tau1_coordinate(const FourierScalar& v, int i, const FourierScalar& w, int j);
/// tau2 on v d/dx_i, w d/dx_j in coordinates: dv/dx_i sum_k d^2 w / dx_j dx_k dx_k.
KForm tau2_coordinate(const FourierScalar& v, int i, const FourierScalar& w, int j);

/// (A | B) = alpha Tr(AB) + beta Tr(A) Tr(B) with A a matrix of functions and B a matrix of 1-forms.
KForm invariant_pairing(double alpha, double beta, const MatrixField& a, const FormMatrix& b);

/// Tr(dv^J ^ dw^J) for which = 1, Tr(dv^J) ^ Tr(dw^J) for which = 2.
KForm dtau(int which, const VectorField& v, const VectorField& w);

/// Lie derivative on the quotient, computed on the canonical representative.
KClass lie_derivative(const VectorField& v, const KClass& c);

/// c([u,v],w) + c([v,w],u) + c([w,u],v) - (u.c(v,w) + v.c(w,u) + w.c(u,v)); zero for a 2-cocycle.
template <class Cocycle>
auto lie_cocycle_defect(const Cocycle& c, const VectorField& u, const VectorField& v, const VectorField& w) {
    const auto brackets = c(lie_bracket(u, v), w) + c(lie_bracket(v, w), u) + c(lie_bracket(w, u), v);
    const auto actions = lie_derivative(u, c(v, w)) + lie_derivative(v, c(w, u)) + lie_derivative(w, c(u, v));
    return brackets - actions;
}

// ---------------------------------------------------------------------------
// Group side

/// b(d1, d2) = c(j(d1) acted on by d2, j(d2)) for a crossed homomorphism j into an invariant cocycle c.
template <class Cocycle, class Crossed, class Act>
auto pullback_cocycle(const Cocycle& c, const Crossed& j, const Act& act, const Diffeo& d1, const Diffeo& d2) {
    return c(act(j(d1), d2), j(d2));
}

/// F -> F^J as a gauge map.
GaugeMap jacobian_gauge(const Diffeo& f, const Thresholds& thresholds = default_thresholds);
/// F -> ln|F^J| on the circle.
LoopPos jacobian_loop(const Diffeo& f, const Thresholds& thresholds = default_thresholds);

/// Tr(f^-1 df ^ dg g^-1) with f = F^J(G), g = G^J.
KForm gauge_group_cocycle(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds = default_thresholds);
/// C(F^J(G), G^J) with the circle Heisenberg cocycle.
double heisenberg_group_cocycle(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds = default_thresholds);

/// int_0^1 ln|F'(G(t))| d ln|G'(t)|, composing F' with G before taking the logarithm.
double virasoro_bott(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds = default_thresholds);

/// Pullback of a class along F; well defined because pullback commutes with d.
KClass act_on_class(const KClass& c, const Diffeo& f);

/// The standard volume form dx_1 ^ ... ^ dx_N.
KForm standard_volume(const GridSpec& spec);
/// omega(F) / omega for a nowhere-vanishing top form omega, as sign * exp(log).
LoopPos volume_delta(const Diffeo& f, const KForm& omega, const Thresholds& thresholds = default_thresholds);
/// Class of ln|delta(F)(G)| d ln|delta(G)|.
KClass volume_cocycle(const Diffeo& f, const Diffeo& g, const KForm& omega,
                      const Thresholds& thresholds = default_thresholds);
/// (L_v omega) / omega.
FourierScalar volume_divergence(const VectorField& v, const KForm& omega,
                                const Thresholds& thresholds = default_thresholds);
/// Class of div_omega(v) d div_omega(w).
KClass div_cocycle(const VectorField& v, const VectorField& w, const KForm& omega,
                   const Thresholds& thresholds = default_thresholds);

/// An element of Diff(T^N) x Omega^2 (form tail) or Diff(T^N) x Omega^1/dOmega^0 (class tail).
struct ExtensionElement {
    Diffeo base;
    std::variant<KForm, KClass> tail;
};

ExtensionElement extension_identity_form(const GridSpec& spec);
ExtensionElement extension_identity_class(const GridSpec& spec);
/// (F, a)(G, b) = (FG, a(G) + b + c(F, G)). The form flavor uses the gauge group cocycle; the class
/// flavor uses volume_cocycle for `omega` (the standard volume when omitted).
ExtensionElement extension_multiply(const ExtensionElement& x, const ExtensionElement& y,
                                    const KForm* omega = nullptr, const Thresholds& thresholds = default_thresholds);
/// Max coefficient distance of the tails; infinity if the bases or flavors differ.
double tail_distance(const ExtensionElement& a, const ExtensionElement& b);

/// 1/(4h^2) [P(h,h) - P(h,-h) - P(-h,h) + P(-h,-h)] with P(t,s) = b(flow(v,t), flow(w,s)) - b(flow(w,s), flow(v,t)).
template <class GroupCocycle>
auto lie_from_group(const GroupCocycle& b, const VectorField& v, const VectorField& w, double h,
                    const Thresholds& thresholds = default_thresholds) {
    const Diffeo vp = flow(v, h, thresholds), vm = flow(v, -h, thresholds);
    const Diffeo wp = flow(w, h, thresholds), wm = flow(w, -h, thresholds);
    auto anti = [&](const Diffeo& f, const Diffeo& g) { return b(f, g) - b(g, f); };
    return (1.0 / (4.0 * h * h)) * (anti(vp, wp) - anti(vp, wm) - anti(vm, wp) + anti(vm, wm));
}

}  // namespace diffext
