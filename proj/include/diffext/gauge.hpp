#pragma once

#include "diffext/config.hpp"
#include "diffext/diffeo.hpp"
#include "diffext/geometry.hpp"
#include "diffext/spectral.hpp"

#include <map>

namespace diffext {

/// A map T^N -> GL_N(R) with a sampled invertibility certificate.
class GaugeMap {
public:
    /// Throws DomainError if |det| drops below thresholds.invertibility on the grid.
    static GaugeMap make(MatrixField m, const Thresholds& thresholds = default_thresholds);
    static GaugeMap identity(const GridSpec& spec);

    const GridSpec& spec() const { return matrix_.spec(); }
    const MatrixField& matrix() const { return matrix_; }
    const DetCertificate& certificate() const { return certificate_; }

private:
    GaugeMap(MatrixField m, DetCertificate c) : matrix_(std::move(m)), certificate_(std::move(c)) {}

    MatrixField matrix_;
    DetCertificate certificate_;
};

GaugeMap gauge_multiply(const GaugeMap& f, const GaugeMap& g, const Thresholds& thresholds = default_thresholds);
GaugeMap gauge_inverse(const GaugeMap& f, const Thresholds& thresholds = default_thresholds);
/// f(H(x)).
GaugeMap act_on_gauge(const GaugeMap& f, const Diffeo& h, const Thresholds& thresholds = default_thresholds);
/// Tr(f^-1 df ^ dg g^-1).
KForm gauge_cocycle_gl(const GaugeMap& f, const GaugeMap& g, const Thresholds& thresholds = default_thresholds);

/// A nowhere-vanishing function sign * exp(u) on a torus of any dimension (the circle when dim = 1).
class LoopPos {
public:
    explicit LoopPos(FourierScalar logval, int sign = 1);
    static LoopPos identity(const GridSpec& spec);
    /// ln|f| and the sign of f; f must keep one sign on the grid.
    static LoopPos from_values(const FourierScalar& f, const Thresholds& thresholds = default_thresholds);

    const GridSpec& spec() const { return logval_.spec(); }
    const FourierScalar& logval() const { return logval_; }
    int sign() const { return sign_; }
    /// sign * exp(u), refit.
    FourierScalar values() const;

private:
    FourierScalar logval_;
    int sign_;
};

LoopPos loop_multiply(const LoopPos& f, const LoopPos& g);
LoopPos loop_inverse(const LoopPos& f);
LoopPos act_on_loop(const LoopPos& f, const Diffeo& h);

/// Class of ln|f| d ln|g| in Omega^1 / d Omega^0.
KClass heisenberg_cocycle_form(const LoopPos& f, const LoopPos& g);
/// Integral over the circle of ln|f| d ln|g|.
double heisenberg_cocycle_circle(const LoopPos& f, const LoopPos& g);
/// Double integral over S^1 x [0,1] of f~^-1 df~ ^ dg~ g~^-1 for the contractions exp(tau ln|f|), exp(tau ln|g|),
/// oriented by dtau ^ dt. Trapezoid rule in tau with `steps` panels; the t-derivatives are spectral
/// derivatives of the sampled contraction on a grid finer than the one of f.
double homotopy_cocycle_oracle(const LoopPos& f, const LoopPos& g, int steps);

/// Circle coefficients in the convention x(t) = a_0/2 + sum_{j>0} a_j cos(2 pi j t) + a_{-j} sin(2 pi j t).
using ModeMap = std::map<int, double>;
/// Requires dim 1. Entries below `cutoff` in magnitude are dropped.
ModeMap to_cos_sin(const FourierScalar& x, double cutoff = 0.0);
/// Throws ShapeError when a mode exceeds the degree of `spec`.
FourierScalar from_cos_sin(const GridSpec& spec, const ModeMap& modes);

}  // namespace diffext
