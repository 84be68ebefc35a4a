#include "diffext/diffeo.hpp"

#include "diffext/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace diffext {

namespace {

FourierScalar add_spill(const FourierScalar& a, double extra) {
    if (extra == 0.0) return a;
    return FourierScalar::from_coeffs(a.spec(), std::vector<Complex>(a.coeffs().begin(), a.coeffs().end()),
                                      a.spill() + extra);
}

std::vector<int> identity_winding(int n) {
    std::vector<int> a(static_cast<std::size_t>(n) * n, 0);
    for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i) * n + i] = 1;
    return a;
}

Eigen::MatrixXd winding_matrix(const std::vector<int>& w, int n) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = w[static_cast<std::size_t>(i) * n + k];
    return a;
}

std::vector<int> integer_inverse(const std::vector<int>& w, int n) {
    const Eigen::MatrixXd inv = winding_matrix(w, n).inverse();
    std::vector<int> out(w.size());
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(i) * n + k] = static_cast<int>(std::lround(inv(i, k)));
    return out;
}

std::vector<int> integer_product(const std::vector<int>& a, const std::vector<int>& b, int n) {
    std::vector<int> out(a.size(), 0);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j)
                out[static_cast<std::size_t>(i) * n + k] += a[static_cast<std::size_t>(i) * n + j] * b[static_cast<std::size_t>(j) * n + k];
    return out;
}

// Linear part A x of a point.
void apply_winding(const std::vector<int>& w, int n, std::span<const double> x, double* out) {
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += w[static_cast<std::size_t>(i) * n + k] * x[k];
        out[i] = s;
    }
}

// Samples every field at the images F(x_p) of the grid and refits.
std::vector<FourierScalar> compose_fields(std::span<const FourierScalar> fields, const Diffeo& f) {
    const GridSpec& spec = f.spec();
    const PointEvaluator eval(spec, apply(f, grid_points(spec)));
    std::vector<FourierScalar> out;
    out.reserve(fields.size());
    for (const auto& a : fields) {
        require_same_spec(a.spec(), spec, "composition");
        out.push_back(add_spill(fit_from_samples(eval(a), spec), a.spill() + f.spill()));
    }
    return out;
}

// Fits end_p - A x_p, the periodic part of a map known through the lifted images of the grid.
std::vector<FourierScalar> fit_displacement(const GridSpec& spec, const std::vector<int>& winding,
                                            const PointCloud& start, const std::vector<double>& end) {
    const int n = spec.dim();
    std::vector<std::vector<double>> disp(n, std::vector<double>(start.size()));
    std::vector<double> ax(n);
    for (std::size_t p = 0; p < start.size(); ++p) {
        apply_winding(winding, n, start[p], ax.data());
        for (int i = 0; i < n; ++i) disp[i][p] = end[p * n + i] - ax[i];
    }
    std::vector<FourierScalar> out;
    for (const auto& d : disp) out.push_back(fit_from_samples(d, spec));
    return out;
}

double wrap(double d) { return d - std::round(d); }

}  // namespace

// ---------------------------------------------------------------------------
// Diffeo

Diffeo::Diffeo(const GridSpec& spec, std::vector<int> winding, std::vector<FourierScalar> displacement,
               DetCertificate certificate)
    : spec_(spec), winding_(std::move(winding)), displacement_(std::move(displacement)),
      certificate_(std::move(certificate)) {}

Diffeo Diffeo::make(std::vector<int> winding, std::vector<FourierScalar> displacement, const Thresholds& thresholds) {
    if (displacement.empty()) throw ShapeError("Diffeo: empty displacement");
    const GridSpec spec = displacement.front().spec();
    const int n = spec.dim();
    if (static_cast<int>(displacement.size()) != n) throw ShapeError("Diffeo: displacement needs N components");
    if (winding.size() != static_cast<std::size_t>(n) * n) throw ShapeError("Diffeo: winding must be N x N");
    for (const auto& f : displacement) require_same_spec(f.spec(), spec, "Diffeo");
    const double det = winding_matrix(winding, n).determinant();
    if (std::abs(std::abs(det) - 1.0) > 1e-9) throw DomainError("Diffeo: winding matrix must have determinant +-1");

    Diffeo out(spec, std::move(winding), std::move(displacement), {});
    out.certificate_ = det_certificate(jacobian(out));
    if (!out.certificate_.constant_sign || out.certificate_.min_abs_det < thresholds.regularity) {
        std::ostringstream os;
        os << "Diffeo: regularity certificate failed, det(F^J) reaches " << out.certificate_.det_at_worst
           << (out.certificate_.constant_sign ? "" : " and changes sign") << " (bound " << thresholds.regularity << ")";
        throw DomainError(os.str());
    }
    return out;
}

Diffeo Diffeo::from_displacement(std::vector<FourierScalar> displacement, const Thresholds& thresholds) {
    if (displacement.empty()) throw ShapeError("Diffeo: empty displacement");
    const int n = displacement.front().spec().dim();
    return make(identity_winding(n), std::move(displacement), thresholds);
}

Diffeo Diffeo::identity(const GridSpec& spec) {
    return from_displacement(std::vector<FourierScalar>(spec.dim(), FourierScalar(spec)));
}

Diffeo Diffeo::translation(const GridSpec& spec, std::vector<double> shift) {
    if (static_cast<int>(shift.size()) != spec.dim()) throw ShapeError("Diffeo::translation: shift needs N entries");
    std::vector<FourierScalar> d;
    for (double c : shift) d.push_back(FourierScalar::constant(spec, c));
    return from_displacement(std::move(d));
}

double Diffeo::spill() const {
    double s = 0.0;
    for (const auto& f : displacement_) s += f.spill();
    return s;
}

PointCloud apply(const Diffeo& f, const PointCloud& points) {
    const int n = f.dim();
    if (points.dim() != n) throw ShapeError("apply: point dimension differs from the diffeomorphism");
    const PointEvaluator eval(f.spec(), points);
    std::vector<double> coords(points.size() * n);
    for (std::size_t p = 0; p < points.size(); ++p) apply_winding(f.winding(), n, points[p], coords.data() + p * n);
    for (int i = 0; i < n; ++i) {
        const auto v = eval(f.displacement()[i]);
        for (std::size_t p = 0; p < points.size(); ++p) coords[p * n + i] += v[p];
    }
    return PointCloud(n, std::move(coords));
}

Diffeo compose(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds) {
    require_same_spec(f.spec(), g.spec(), "compose");
    const int n = f.dim();
    // F(G(x)) = A_F A_G x + A_F g(x) + f(G(x))
    auto fg = compose_fields(f.displacement(), g);
    std::vector<FourierScalar> disp;
    for (int i = 0; i < n; ++i) {
        FourierScalar acc = fg[i];
        for (int k = 0; k < n; ++k)
            if (const int a = f.winding(i, k); a != 0) acc = acc + static_cast<double>(a) * g.displacement()[k];
        disp.push_back(std::move(acc));
    }
    return Diffeo::make(integer_product(f.winding(), g.winding(), n), std::move(disp), thresholds);
}

Diffeo inverse(const Diffeo& f, const Thresholds& thresholds) {
    const GridSpec& spec = f.spec();
    const int n = f.dim();
    const auto a_inv = integer_inverse(f.winding(), n);
    const Eigen::MatrixXd a = winding_matrix(f.winding(), n);
    std::vector<FourierScalar> partials;  // d f_i / d x_k, row-major
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) partials.push_back(differentiate(f.displacement()[i], k));

    const PointCloud targets = grid_points(spec);
    const std::size_t count = targets.size();
    std::vector<double> x(count * n);
    for (std::size_t p = 0; p < count; ++p) apply_winding(a_inv, n, targets[p], x.data() + p * n);

    std::vector<std::size_t> active(count);
    for (std::size_t p = 0; p < count; ++p) active[p] = p;
    for (int step = 0; step < thresholds.newton_max_steps && !active.empty(); ++step) {
        std::vector<double> coords;
        coords.reserve(active.size() * n);
        for (std::size_t p : active) coords.insert(coords.end(), x.begin() + p * n, x.begin() + (p + 1) * n);
        const PointCloud pts(n, coords);
        const PointEvaluator eval(spec, pts);
        std::vector<std::vector<double>> fv, jv;
        for (const auto& c : f.displacement()) fv.push_back(eval(c));
        for (const auto& c : partials) jv.push_back(eval(c));

        std::vector<std::size_t> still;
        Eigen::MatrixXd jac(n, n);
        Eigen::VectorXd res(n);
        for (std::size_t q = 0; q < active.size(); ++q) {
            const std::size_t p = active[q];
            const auto y = targets[p];
            for (int i = 0; i < n; ++i) {
                double s = fv[i][q] - y[i];
                for (int k = 0; k < n; ++k) {
                    s += a(i, k) * x[p * n + k];
                    jac(i, k) = a(i, k) + jv[static_cast<std::size_t>(i) * n + k][q];
                }
                res(i) = s;
            }
            const Eigen::VectorXd dx = jac.partialPivLu().solve(res);
            for (int i = 0; i < n; ++i) x[p * n + i] -= dx(i);
            if (!(dx.cwiseAbs().maxCoeff() <= 1e-13)) still.push_back(p);
        }
        active = std::move(still);
    }
    if (!active.empty()) {
        std::ostringstream os;
        os << "inverse: Newton iteration did not converge within " << thresholds.newton_max_steps << " steps at "
           << active.size() << " grid point(s), first at index " << active.front();
        throw ConvergenceError(os.str());
    }
    auto disp = fit_displacement(spec, a_inv, targets, x);
    for (auto& d : disp) d = add_spill(d, f.spill());
    return Diffeo::make(a_inv, std::move(disp), thresholds);
}

MatrixField jacobian(const Diffeo& f) {
    const int n = f.dim();
    std::vector<FourierScalar> e;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            auto d = differentiate(f.displacement()[i], k);
            if (const int a = f.winding(i, k); a != 0) d = d + FourierScalar::constant(f.spec(), a);
            e.push_back(std::move(d));
        }
    return MatrixField::from_entries(f.spec(), std::move(e));
}

FourierScalar act_on_scalar(const FourierScalar& a, const Diffeo& f) {
    return compose_fields(std::span<const FourierScalar>(&a, 1), f).front();
}

MatrixField act_on_matrix(const MatrixField& m, const Diffeo& f) {
    return MatrixField::from_entries(f.spec(), compose_fields(m.entries(), f));
}

KForm pullback_form(const KForm& form, const Diffeo& f) {
    require_same_spec(form.spec(), f.spec(), "pullback_form");
    if (form.trivial()) return form;
    if (form.degree() == 0) return KForm::scalar(act_on_scalar(form.components()[0], f));
    const int n = f.dim();
    const auto jac = jacobian(f);
    std::vector<KForm> d_f;
    for (int j = 0; j < n; ++j) {
        std::vector<FourierScalar> row;
        for (int k = 0; k < n; ++k) row.push_back(jac(j, k));
        d_f.push_back(KForm::one_form(std::move(row)));
    }
    const auto coeffs = compose_fields(form.components(), f);
    KForm acc = KForm::zero(f.spec(), form.degree());
    for (std::size_t p = 0; p < coeffs.size(); ++p) {
        std::vector<KForm> factors;
        for (int j : form.indices_at(p)) factors.push_back(d_f[j]);
        acc = acc + scale(coeffs[p], wedge_all(factors));
    }
    return acc;
}

double coeff_distance(const Diffeo& a, const Diffeo& b) {
    require_same_spec(a.spec(), b.spec(), "coeff_distance");
    if (a.winding() != b.winding()) return std::numeric_limits<double>::infinity();
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i) m = std::max(m, coeff_distance(a.displacement()[i], b.displacement()[i]));
    return m;
}

double sup_distance(const Diffeo& a, const Diffeo& b) {
    require_same_spec(a.spec(), b.spec(), "sup_distance");
    const auto grid = grid_points(a.spec());
    const auto pa = apply(a, grid), pb = apply(b, grid);
    double m = 0.0;
    for (std::size_t p = 0; p < grid.size(); ++p)
        for (int i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(wrap(pa[p][i] - pb[p][i])));
    return m;
}

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(const GridSpec& spec, std::vector<FourierScalar> components)
    : spec_(spec), components_(std::move(components)) {}

VectorField VectorField::from_components(std::vector<FourierScalar> components) {
    if (components.empty()) throw ShapeError("VectorField: no components");
    const GridSpec spec = components.front().spec();
    if (static_cast<int>(components.size()) != spec.dim()) throw ShapeError("VectorField: needs N components");
    for (const auto& c : components) require_same_spec(c.spec(), spec, "VectorField");
    return VectorField(spec, std::move(components));
}

VectorField VectorField::constant(const GridSpec& spec, std::vector<double> values) {
    if (static_cast<int>(values.size()) != spec.dim()) throw ShapeError("VectorField::constant: needs N values");
    std::vector<FourierScalar> c;
    for (double v : values) c.push_back(FourierScalar::constant(spec, v));
    return VectorField(spec, std::move(c));
}

VectorField VectorField::zero(const GridSpec& spec) {
    return VectorField(spec, std::vector<FourierScalar>(spec.dim(), FourierScalar(spec)));
}

double VectorField::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_abs_coeff());
    return m;
}

VectorField VectorField::operator-() const { return (-1.0) * *this; }

VectorField operator+(const VectorField& a, const VectorField& b) {
    require_same_spec(a.spec_, b.spec_, "VectorField +");
    auto c = a.components_;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = c[i] + b.components_[i];
    return VectorField(a.spec_, std::move(c));
}

VectorField operator-(const VectorField& a, const VectorField& b) { return a + (-b); }

VectorField operator*(double s, const VectorField& a) {
    auto c = a.components_;
    for (auto& x : c) x = s * x;
    return VectorField(a.spec_, std::move(c));
}

FourierScalar directional(const VectorField& v, const FourierScalar& a) {
    require_same_spec(v.spec(), a.spec(), "directional");
    std::vector<FourierScalar> grads;
    for (int j = 0; j < v.dim(); ++j) grads.push_back(differentiate(a, j));
    return multiply_sum(v.components(), grads);
}

VectorField lie_bracket(const VectorField& v, const VectorField& w) {
    require_same_spec(v.spec(), w.spec(), "lie_bracket");
    const int n = v.dim();
    std::vector<FourierScalar> out;
    for (int i = 0; i < n; ++i) {
        std::vector<FourierScalar> lhs, rhs;
        for (int j = 0; j < n; ++j) {
            lhs.push_back(v[j]);
            rhs.push_back(differentiate(w[i], j));
            lhs.push_back(-w[j]);
            rhs.push_back(differentiate(v[i], j));
        }
        out.push_back(multiply_sum(lhs, rhs));
    }
    return VectorField::from_components(std::move(out));
}

KForm lie_derivative(const VectorField& v, const KForm& form) {
    require_same_spec(v.spec(), form.spec(), "lie_derivative");
    if (form.trivial()) return form;
    const int n = v.dim();
    const int k = form.degree();
    const std::size_t slots = form.components().size();
    std::vector<std::vector<FourierScalar>> dv(n);
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < n; ++m) dv[i].push_back(differentiate(v[i], m));

    std::vector<std::vector<FourierScalar>> lhs(slots), rhs(slots);
    std::vector<int> replaced(k);
    for (std::size_t p = 0; p < slots; ++p) {
        const auto& a = form.components()[p];
        // (v . a) dx_I
        for (int j = 0; j < n; ++j) {
            lhs[p].push_back(v[j]);
            rhs[p].push_back(differentiate(a, j));
        }
        // a dx_{i1} ^ ... ^ dv_{ir} ^ ... ^ dx_{ik}
        const auto& idx = form.indices_at(p);
        for (int r = 0; r < k; ++r)
            for (int m = 0; m < n; ++m) {
                replaced = idx;
                replaced[r] = m;
                int inversions = 0;
                bool repeated = false;
                for (int s = 0; s < k; ++s)
                    for (int t = s + 1; t < k; ++t) {
                        if (replaced[s] == replaced[t]) repeated = true;
                        if (replaced[s] > replaced[t]) ++inversions;
                    }
                if (repeated) continue;
                std::sort(replaced.begin(), replaced.end());
                const std::size_t out = multi_index_position(n, replaced);
                lhs[out].push_back(inversions % 2 ? -a : a);
                rhs[out].push_back(dv[idx[r]][m]);
            }
    }
    std::vector<FourierScalar> comps;
    for (std::size_t p = 0; p < slots; ++p) comps.push_back(multiply_sum(lhs[p], rhs[p]));
    return KForm::from_components(form.spec(), k, std::move(comps));
}

Diffeo flow(const VectorField& v, double t, const Thresholds& thresholds) {
    const GridSpec& spec = v.spec();
    const int n = v.dim();
    const PointCloud start = grid_points(spec);
    const std::size_t count = start.size();
    std::vector<double> x = start.coords();
    const int steps = thresholds.flow_steps;
    const double h = t / steps;

    auto velocity = [&](const std::vector<double>& at) {
        const PointEvaluator eval(spec, PointCloud(n, at));
        std::vector<double> out(at.size());
        for (int i = 0; i < n; ++i) {
            const auto vi = eval(v[i]);
            for (std::size_t p = 0; p < count; ++p) out[p * n + i] = vi[p];
        }
        return out;
    };
    std::vector<double> tmp(x.size());
    for (int s = 0; s < steps && t != 0.0; ++s) {
        const auto k1 = velocity(x);
        for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + 0.5 * h * k1[q];
        const auto k2 = velocity(tmp);
        for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + 0.5 * h * k2[q];
        const auto k3 = velocity(tmp);
        for (std::size_t q = 0; q < x.size(); ++q) tmp[q] = x[q] + h * k3[q];
        const auto k4 = velocity(tmp);
        for (std::size_t q = 0; q < x.size(); ++q) x[q] += h / 6.0 * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
    }
    const auto winding = identity_winding(n);
    auto disp = fit_displacement(spec, winding, start, x);
    try {
        return Diffeo::make(winding, std::move(disp), thresholds);
    } catch (const DomainError& e) {
        throw DomainError(std::string("flow: result is not regular, try a smaller t: ") + e.what());
    }
}

FourierScalar divergence(const VectorField& v) {
    FourierScalar acc(v.spec());
    for (int i = 0; i < v.dim(); ++i) acc = acc + differentiate(v[i], i);
    return acc;
}

MatrixField vector_jacobian(const VectorField& v) {
    std::vector<FourierScalar> e;
    for (int i = 0; i < v.dim(); ++i)
        for (int k = 0; k < v.dim(); ++k) e.push_back(differentiate(v[i], k));
    return MatrixField::from_entries(v.spec(), std::move(e));
}

double coeff_distance(const VectorField& a, const VectorField& b) {
    require_same_spec(a.spec(), b.spec(), "coeff_distance");
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i) m = std::max(m, coeff_distance(a[i], b[i]));
    return m;
}

}  // namespace diffext
