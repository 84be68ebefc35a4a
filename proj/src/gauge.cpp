#include "diffext/gauge.hpp"

#include "diffext/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace diffext {

namespace {

DetCertificate checked_certificate(const MatrixField& m, const Thresholds& thresholds, const char* what) {
    auto cert = det_certificate(m);
    if (!cert.constant_sign || cert.min_abs_det < thresholds.invertibility) {
        std::ostringstream os;
        os << what << ": invertibility certificate failed, det reaches " << cert.det_at_worst << " (bound "
           << thresholds.invertibility << ")";
        throw DomainError(os.str());
    }
    return cert;
}

}  // namespace

// ---------------------------------------------------------------------------
// GaugeMap

GaugeMap GaugeMap::make(MatrixField m, const Thresholds& thresholds) {
    auto cert = checked_certificate(m, thresholds, "GaugeMap");
    return GaugeMap(std::move(m), std::move(cert));
}

GaugeMap GaugeMap::identity(const GridSpec& spec) { return make(MatrixField::identity(spec)); }

GaugeMap gauge_multiply(const GaugeMap& f, const GaugeMap& g, const Thresholds& thresholds) {
    return GaugeMap::make(f.matrix() * g.matrix(), thresholds);
}

GaugeMap gauge_inverse(const GaugeMap& f, const Thresholds& thresholds) {
    return GaugeMap::make(matrix_inverse_field(f.matrix(), thresholds), thresholds);
}

GaugeMap act_on_gauge(const GaugeMap& f, const Diffeo& h, const Thresholds& thresholds) {
    return GaugeMap::make(act_on_matrix(f.matrix(), h), thresholds);
}

KForm gauge_cocycle_gl(const GaugeMap& f, const GaugeMap& g, const Thresholds& thresholds) {
    require_same_spec(f.spec(), g.spec(), "gauge_cocycle_gl");
    const auto f_inv = matrix_inverse_field(f.matrix(), thresholds);
    const auto g_inv = matrix_inverse_field(g.matrix(), thresholds);
    return matrix_wedge_trace(f_inv * exterior_d(f.matrix()), exterior_d(g.matrix()) * g_inv);
}

// ---------------------------------------------------------------------------
// LoopPos

LoopPos::LoopPos(FourierScalar logval, int sign) : logval_(std::move(logval)), sign_(sign) {
    if (sign != 1 && sign != -1) throw ShapeError("LoopPos: sign must be +1 or -1");
}

LoopPos LoopPos::identity(const GridSpec& spec) { return LoopPos(FourierScalar(spec)); }

LoopPos LoopPos::from_values(const FourierScalar& f, const Thresholds& thresholds) {
    const auto samples = grid_samples(f);
    const bool negative = samples.front() < 0.0;
    for (double s : samples)
        if ((s < 0.0) != negative) throw DomainError("LoopPos::from_values: function changes sign");
    return LoopPos(pointwise_unary(f, UnaryFn::ln_abs, thresholds), negative ? -1 : 1);
}

FourierScalar LoopPos::values() const {
    const auto e = pointwise_unary(logval_, UnaryFn::exp);
    return sign_ > 0 ? e : -e;
}

LoopPos loop_multiply(const LoopPos& f, const LoopPos& g) {
    require_same_spec(f.spec(), g.spec(), "loop_multiply");
    return LoopPos(f.logval() + g.logval(), f.sign() * g.sign());
}

LoopPos loop_inverse(const LoopPos& f) { return LoopPos(-f.logval(), f.sign()); }

LoopPos act_on_loop(const LoopPos& f, const Diffeo& h) { return LoopPos(act_on_scalar(f.logval(), h), f.sign()); }

KClass heisenberg_cocycle_form(const LoopPos& f, const LoopPos& g) {
    require_same_spec(f.spec(), g.spec(), "heisenberg_cocycle_form");
    return project_K(scale(f.logval(), exterior_d(KForm::scalar(g.logval()))));
}

double heisenberg_cocycle_circle(const LoopPos& f, const LoopPos& g) {
    require_same_spec(f.spec(), g.spec(), "heisenberg_cocycle_circle");
    if (f.spec().dim() != 1) throw ShapeError("heisenberg_cocycle_circle: needs the circle (dim 1)");
    return integrate_mean(multiply(f.logval(), differentiate(g.logval(), 0)));
}

double homotopy_cocycle_oracle(const LoopPos& f, const LoopPos& g, int steps) {
    require_same_spec(f.spec(), g.spec(), "homotopy_cocycle_oracle");
    if (f.spec().dim() != 1) throw ShapeError("homotopy_cocycle_oracle: needs the circle (dim 1)");
    if (steps < 1) throw ShapeError("homotopy_cocycle_oracle: steps must be positive");
    // exp(tau u) is not band-limited, so the t-derivatives are taken on a finer grid
    const GridSpec dense(1, std::max(4 * f.spec().degree(), 64));
    const PointEvaluator eval(f.spec(), grid_points(dense));
    const auto u = eval(f.logval()), v = eval(g.logval());
    const std::size_t m = u.size();

    auto log_derivative = [&](const std::vector<double>& w, double tau) {
        std::vector<double> e(m);
        for (std::size_t p = 0; p < m; ++p) e[p] = std::exp(tau * w[p]);
        const auto de = grid_samples(differentiate(fit_from_samples(e, dense), 0));
        for (std::size_t p = 0; p < m; ++p) e[p] = de[p] / e[p];
        return e;
    };

    double total = 0.0;
    for (int k = 0; k <= steps; ++k) {
        const double tau = static_cast<double>(k) / steps;
        // f~^-1 df~ = u dtau + a dt and dg~ g~^-1 = v dtau + b dt, so the dtau ^ dt coefficient is u b - a v
        const auto a = log_derivative(u, tau), b = log_derivative(v, tau);
        double mean = 0.0;
        for (std::size_t p = 0; p < m; ++p) mean += u[p] * b[p] - a[p] * v[p];
        mean /= static_cast<double>(m);
        total += (k == 0 || k == steps ? 0.5 : 1.0) * mean;
    }
    return total / steps;
}

// ---------------------------------------------------------------------------
// cos/sin convention

ModeMap to_cos_sin(const FourierScalar& x, double cutoff) {
    if (x.spec().dim() != 1) throw ShapeError("to_cos_sin: needs the circle (dim 1)");
    ModeMap out;
    auto put = [&](int j, double value) {
        if (std::abs(value) > cutoff || (cutoff == 0.0 && value != 0.0)) out[j] = value;
    };
    put(0, 2.0 * x.coeff({0}).real());
    for (int j = 1; j <= x.spec().degree(); ++j) {
        const Complex c = x.coeff({j});
        put(j, 2.0 * c.real());
        put(-j, -2.0 * c.imag());
    }
    return out;
}

FourierScalar from_cos_sin(const GridSpec& spec, const ModeMap& modes) {
    if (spec.dim() != 1) throw ShapeError("from_cos_sin: needs the circle (dim 1)");
    std::vector<Complex> c(spec.mode_count());
    const int d = spec.degree();
    for (const auto& [j, value] : modes) {
        if (std::abs(j) > d) throw ShapeError("from_cos_sin: mode " + std::to_string(j) + " exceeds the degree");
        if (j == 0) {
            c[d] += 0.5 * value;
        } else if (j > 0) {
            c[d + j] += 0.5 * value;
            c[d - j] += 0.5 * value;
        } else {
            c[d - j] += Complex(0.0, -0.5 * value);
            c[d + j] += Complex(0.0, 0.5 * value);
        }
    }
    return FourierScalar::from_coeffs(spec, std::move(c));
}

}  // namespace diffext
