#include "diffext/geometry.hpp"

#include "diffext/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace diffext {

namespace {

std::size_t position_of(int n, int k, std::span<const int> indices) {
    if (static_cast<int>(indices.size()) != k) throw std::out_of_range("KForm: multi-index length differs from degree");
    const auto& list = multi_indices(n, k);
    for (std::size_t p = 0; p < list.size(); ++p)
        if (std::equal(list[p].begin(), list[p].end(), indices.begin(), indices.end())) return p;
    throw std::out_of_range("KForm: multi-index is not strictly increasing or out of range");
}

// Merges two increasing index lists. Returns the sign of the sorting permutation, or 0 on overlap.
int merge_sign(const std::vector<int>& a, const std::vector<int>& b, std::vector<int>& merged) {
    merged.clear();
    int inversions = 0;
    for (int x : a)
        for (int y : b) {
            if (x == y) return 0;
            if (x > y) ++inversions;
        }
    merged.insert(merged.end(), a.begin(), a.end());
    merged.insert(merged.end(), b.begin(), b.end());
    std::sort(merged.begin(), merged.end());
    return inversions % 2 ? -1 : 1;
}

// Collects signed coefficient products per output component, then truncates each sum once.
class ProductTerms {
public:
    ProductTerms(const GridSpec& spec, int degree)
        : spec_(spec), degree_(degree), terms_(multi_indices(spec.dim(), degree).size()) {}

    void add_wedge(const KForm& a, const KForm& b) {
        std::vector<int> merged;
        for (std::size_t pa = 0; pa < a.components().size(); ++pa)
            for (std::size_t pb = 0; pb < b.components().size(); ++pb) {
                const int sign = merge_sign(a.indices_at(pa), b.indices_at(pb), merged);
                if (sign == 0) continue;
                const std::size_t out = position_of(spec_.dim(), degree_, merged);
                terms_[out].push_back({intern(a.components()[pa]), intern(b.components()[pb]), double(sign)});
            }
    }

    // Every distinct factor is sampled once, whatever the number of output components it feeds.
    KForm finish() const {
        std::vector<std::vector<double>> samples;
        samples.reserve(factors_.size());
        for (const auto& f : factors_) samples.push_back(grid_samples(f));
        std::vector<FourierScalar> comps;
        comps.reserve(terms_.size());
        for (const auto& list : terms_) {
            if (list.empty()) {
                comps.emplace_back(spec_);
                continue;
            }
            std::vector<double> acc(spec_.point_count(), 0.0);
            double spill = 0.0;
            for (const auto& t : list) {
                const auto& sa = samples[t.lhs];
                const auto& sb = samples[t.rhs];
                for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t.sign * sa[i] * sb[i];
                spill += factors_[t.lhs].spill() + factors_[t.rhs].spill();
            }
            const auto fit = fit_from_samples(acc, spec_);
            comps.push_back(FourierScalar::from_coeffs(spec_, {fit.coeffs().begin(), fit.coeffs().end()},
                                                       fit.spill() + spill));
        }
        return KForm::from_components(spec_, degree_, std::move(comps));
    }

private:
    struct Term {
        std::size_t lhs, rhs;
        double sign;
    };

    std::size_t intern(const FourierScalar& x) {
        for (std::size_t i = 0; i < factors_.size(); ++i)
            if (std::equal(x.coeffs().begin(), x.coeffs().end(), factors_[i].coeffs().begin())) return i;
        factors_.push_back(x);
        return factors_.size() - 1;
    }

    GridSpec spec_;
    int degree_;
    std::vector<FourierScalar> factors_;
    std::vector<std::vector<Term>> terms_;
};

std::vector<double> point_coords(const GridSpec& spec, std::size_t flat) {
    const int m = spec.points_per_axis();
    std::vector<double> x(spec.dim());
    for (int j = spec.dim() - 1; j >= 0; --j) {
        x[j] = static_cast<double>(flat % m) / m;
        flat /= m;
    }
    return x;
}

std::string format_point(const std::vector<double>& x) {
    std::ostringstream os;
    os << '(';
    for (std::size_t j = 0; j < x.size(); ++j) os << (j ? ", " : "") << x[j];
    os << ')';
    return os.str();
}

std::vector<std::vector<double>> entry_samples(const MatrixField& m) {
    std::vector<std::vector<double>> out;
    out.reserve(m.entries().size());
    for (const auto& e : m.entries()) out.push_back(grid_samples(e));
    return out;
}

Eigen::MatrixXd matrix_at(const std::vector<std::vector<double>>& samples, int n, std::size_t point) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) a(i, k) = samples[static_cast<std::size_t>(i) * n + k][point];
    return a;
}

}  // namespace

const std::vector<std::vector<int>>& multi_indices(int n, int k) {
    static std::mutex guard;
    static std::map<std::pair<int, int>, std::vector<std::vector<int>>> cache;
    std::lock_guard lock(guard);
    auto [it, inserted] = cache.try_emplace({n, k});
    if (inserted && k >= 0 && k <= n) {
        std::vector<int> current(k);
        for (int i = 0; i < k; ++i) current[i] = i;
        while (true) {
            it->second.push_back(current);
            int pos = k - 1;
            while (pos >= 0 && current[pos] == n - k + pos) --pos;
            if (pos < 0) break;
            ++current[pos];
            for (int i = pos + 1; i < k; ++i) current[i] = current[i - 1] + 1;
        }
    }
    return it->second;
}

std::size_t multi_index_position(int n, std::span<const int> indices) {
    return position_of(n, static_cast<int>(indices.size()), indices);
}

// ---------------------------------------------------------------------------
// KForm

KForm::KForm(const GridSpec& spec, int degree, std::vector<FourierScalar> components)
    : spec_(spec), degree_(degree), components_(std::move(components)) {}

KForm KForm::zero(const GridSpec& spec, int degree) {
    if (degree < 0) throw ShapeError("KForm: negative degree");
    return KForm(spec, degree, std::vector<FourierScalar>(multi_indices(spec.dim(), degree).size(), FourierScalar(spec)));
}

KForm KForm::scalar(FourierScalar a) {
    const GridSpec spec = a.spec();
    return KForm(spec, 0, {std::move(a)});
}

KForm KForm::one_form(std::vector<FourierScalar> components) {
    if (components.empty()) throw ShapeError("KForm::one_form: no components");
    const GridSpec spec = components.front().spec();
    return from_components(spec, 1, std::move(components));
}

KForm KForm::from_components(const GridSpec& spec, int degree, std::vector<FourierScalar> components) {
    if (degree < 0) throw ShapeError("KForm: negative degree");
    if (components.size() != multi_indices(spec.dim(), degree).size())
        throw ShapeError("KForm: component count does not match the degree");
    for (const auto& c : components) require_same_spec(c.spec(), spec, "KForm");
    return KForm(spec, degree, std::move(components));
}

KForm KForm::basis(const GridSpec& spec, std::vector<int> indices) {
    KForm out = zero(spec, static_cast<int>(indices.size()));
    out.components_[position_of(spec.dim(), out.degree_, indices)] = FourierScalar::constant(spec, 1.0);
    return out;
}

const FourierScalar& KForm::component(std::span<const int> indices) const {
    if (static_cast<int>(indices.size()) != degree_) throw ShapeError("KForm::component: index length differs from degree");
    return components_[position_of(spec_.dim(), degree_, indices)];
}

const std::vector<int>& KForm::indices_at(std::size_t position) const {
    return multi_indices(spec_.dim(), degree_).at(position);
}

double KForm::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : components_) m = std::max(m, c.max_abs_coeff());
    return m;
}

double KForm::spill() const {
    double s = 0.0;
    for (const auto& c : components_) s += c.spill();
    return s;
}

KForm KForm::operator-() const {
    auto comps = components_;
    for (auto& c : comps) c = -c;
    return KForm(spec_, degree_, std::move(comps));
}

KForm operator+(const KForm& a, const KForm& b) {
    require_same_spec(a.spec_, b.spec_, "KForm +");
    if (a.degree_ != b.degree_) throw ShapeError("KForm +: degrees differ");
    auto comps = a.components_;
    for (std::size_t i = 0; i < comps.size(); ++i) comps[i] = comps[i] + b.components_[i];
    return KForm(a.spec_, a.degree_, std::move(comps));
}

KForm operator-(const KForm& a, const KForm& b) { return a + (-b); }

KForm operator*(double s, const KForm& a) {
    auto comps = a.components_;
    for (auto& c : comps) c = s * c;
    return KForm(a.spec_, a.degree_, std::move(comps));
}

KForm scale(const FourierScalar& a, const KForm& form) {
    require_same_spec(a.spec(), form.spec(), "scale");
    std::vector<FourierScalar> comps;
    comps.reserve(form.components().size());
    for (const auto& c : form.components()) comps.push_back(multiply(a, c));
    return KForm::from_components(form.spec(), form.degree(), std::move(comps));
}

KForm wedge(const KForm& a, const KForm& b) {
    require_same_spec(a.spec(), b.spec(), "wedge");
    const int degree = a.degree() + b.degree();
    if (degree > a.spec().dim()) return KForm::zero(a.spec(), degree);
    ProductTerms terms(a.spec(), degree);
    terms.add_wedge(a, b);
    return terms.finish();
}

KForm wedge_all(std::span<const KForm> forms) {
    if (forms.empty()) throw ShapeError("wedge_all: empty list");
    KForm acc = forms.front();
    for (std::size_t i = 1; i < forms.size(); ++i) acc = wedge(acc, forms[i]);
    return acc;
}

KForm exterior_d(const KForm& form) {
    const GridSpec& spec = form.spec();
    const int degree = form.degree() + 1;
    KForm out = KForm::zero(spec, degree);
    if (degree > spec.dim()) return out;
    std::vector<FourierScalar> comps(out.components().begin(), out.components().end());
    std::vector<int> merged;
    for (std::size_t p = 0; p < form.components().size(); ++p) {
        const auto& idx = form.indices_at(p);
        for (int axis = 0; axis < spec.dim(); ++axis) {
            const int sign = merge_sign({axis}, idx, merged);
            if (sign == 0) continue;
            const auto deriv = differentiate(form.components()[p], axis);
            auto& slot = comps[position_of(spec.dim(), degree, merged)];
            slot = sign > 0 ? slot + deriv : slot - deriv;
        }
    }
    return KForm::from_components(spec, degree, std::move(comps));
}

double coeff_distance(const KForm& a, const KForm& b) {
    require_same_spec(a.spec(), b.spec(), "coeff_distance");
    if (a.degree() != b.degree()) throw ShapeError("coeff_distance: degrees differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.components().size(); ++i)
        m = std::max(m, coeff_distance(a.components()[i], b.components()[i]));
    return m;
}

// ---------------------------------------------------------------------------
// KClass

KClass::KClass(const GridSpec& spec) : rep_(KForm::zero(spec, 1)) {}

KClass KClass::operator-() const { return KClass(-rep_); }
KClass operator+(const KClass& a, const KClass& b) { return KClass(a.rep_ + b.rep_); }
KClass operator-(const KClass& a, const KClass& b) { return KClass(a.rep_ - b.rep_); }
KClass operator*(double s, const KClass& a) { return KClass(s * a.rep_); }

KClass project_K(const KForm& form) {
    if (form.degree() != 1) throw ShapeError("project_K: expected a 1-form");
    const GridSpec& spec = form.spec();
    const int n = spec.dim();
    std::vector<std::vector<Complex>> c;
    for (const auto& comp : form.components()) c.emplace_back(comp.coeffs().begin(), comp.coeffs().end());
    const std::size_t count = spec.mode_count();
    for (std::size_t i = 0; i < count; ++i) {
        const auto r = mode_of(spec, i);
        double rr = 0.0;
        Complex rc{};
        for (int j = 0; j < n; ++j) {
            rr += static_cast<double>(r[j]) * r[j];
            rc += static_cast<double>(r[j]) * c[j][i];
        }
        if (rr == 0.0) continue;
        const Complex s = rc / rr;
        for (int j = 0; j < n; ++j) c[j][i] -= s * static_cast<double>(r[j]);
    }
    std::vector<FourierScalar> comps;
    for (int j = 0; j < n; ++j) comps.push_back(FourierScalar::from_coeffs(spec, std::move(c[j]), form.components()[j].spill()));
    return KClass(KForm::from_components(spec, 1, std::move(comps)));
}

double coeff_distance(const KClass& a, const KClass& b) { return coeff_distance(a.rep(), b.rep()); }

// ---------------------------------------------------------------------------
// MatrixField

MatrixField::MatrixField(const GridSpec& spec, std::vector<FourierScalar> entries)
    : spec_(spec), entries_(std::move(entries)) {}

MatrixField MatrixField::zero(const GridSpec& spec) {
    return MatrixField(spec, std::vector<FourierScalar>(spec.dim() * spec.dim(), FourierScalar(spec)));
}

MatrixField MatrixField::identity(const GridSpec& spec) {
    auto m = zero(spec);
    for (int i = 0; i < spec.dim(); ++i) m.entries_[i * spec.dim() + i] = FourierScalar::constant(spec, 1.0);
    return m;
}

MatrixField MatrixField::diagonal(std::vector<FourierScalar> diag) {
    if (diag.empty()) throw ShapeError("MatrixField::diagonal: empty");
    const GridSpec spec = diag.front().spec();
    if (static_cast<int>(diag.size()) != spec.dim()) throw ShapeError("MatrixField::diagonal: size must equal dim");
    auto m = zero(spec);
    for (int i = 0; i < spec.dim(); ++i) {
        require_same_spec(diag[i].spec(), spec, "MatrixField");
        m.entries_[i * spec.dim() + i] = std::move(diag[i]);
    }
    return m;
}

MatrixField MatrixField::from_entries(const GridSpec& spec, std::vector<FourierScalar> entries) {
    if (entries.size() != static_cast<std::size_t>(spec.dim() * spec.dim()))
        throw ShapeError("MatrixField: expected N*N entries");
    for (const auto& e : entries) require_same_spec(e.spec(), spec, "MatrixField");
    return MatrixField(spec, std::move(entries));
}

double MatrixField::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& e : entries_) m = std::max(m, e.max_abs_coeff());
    return m;
}

MatrixField operator+(const MatrixField& a, const MatrixField& b) {
    require_same_spec(a.spec_, b.spec_, "MatrixField +");
    auto e = a.entries_;
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = e[i] + b.entries_[i];
    return MatrixField(a.spec_, std::move(e));
}

MatrixField operator-(const MatrixField& a, const MatrixField& b) { return a + (-1.0) * b; }

MatrixField operator*(double s, const MatrixField& a) {
    auto e = a.entries_;
    for (auto& x : e) x = s * x;
    return MatrixField(a.spec_, std::move(e));
}

MatrixField operator*(const MatrixField& a, const MatrixField& b) {
    require_same_spec(a.spec_, b.spec_, "MatrixField *");
    const int n = a.size();
    std::vector<FourierScalar> out;
    out.reserve(a.entries_.size());
    std::vector<FourierScalar> lhs, rhs;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            lhs.clear();
            rhs.clear();
            for (int j = 0; j < n; ++j) {
                lhs.push_back(a(i, j));
                rhs.push_back(b(j, k));
            }
            out.push_back(multiply_sum(lhs, rhs));
        }
    return MatrixField(a.spec_, std::move(out));
}

FourierScalar trace_field(const MatrixField& m) {
    FourierScalar acc(m.spec());
    for (int i = 0; i < m.size(); ++i) acc = acc + m(i, i);
    return acc;
}

MatrixField matrix_inverse_field(const MatrixField& m, const Thresholds& thresholds) {
    const GridSpec& spec = m.spec();
    const int n = m.size();
    const auto samples = entry_samples(m);
    std::vector<std::vector<double>> inv(samples.size(), std::vector<double>(spec.point_count()));
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        const Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix_at(samples, n, p));
        const double det = lu.determinant();
        if (!(std::abs(det) >= thresholds.invertibility)) {
            std::ostringstream os;
            os << "matrix_inverse_field: near-singular matrix at " << format_point(point_coords(spec, p))
               << ", det = " << det;
            throw DomainError(os.str());
        }
        const Eigen::MatrixXd x = lu.inverse();
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) inv[static_cast<std::size_t>(i) * n + k][p] = x(i, k);
    }
    double inherited = 0.0;
    for (const auto& e : m.entries()) inherited += e.spill();
    std::vector<FourierScalar> entries;
    for (const auto& s : inv) {
        auto fit = fit_from_samples(s, spec);
        entries.push_back(FourierScalar::from_coeffs(spec, std::vector<Complex>(fit.coeffs().begin(), fit.coeffs().end()),
                                                     fit.spill() + inherited));
    }
    return MatrixField::from_entries(spec, std::move(entries));
}

FourierScalar determinant_field(const MatrixField& m) {
    const GridSpec& spec = m.spec();
    const auto samples = entry_samples(m);
    std::vector<double> det(spec.point_count());
    for (std::size_t p = 0; p < det.size(); ++p) det[p] = matrix_at(samples, m.size(), p).determinant();
    return fit_from_samples(det, spec);
}

DetCertificate det_certificate(const MatrixField& m) {
    const GridSpec& spec = m.spec();
    const auto samples = entry_samples(m);
    DetCertificate cert;
    cert.min_abs_det = std::numeric_limits<double>::infinity();
    int sign = 0;
    std::size_t worst = 0;
    for (std::size_t p = 0; p < spec.point_count(); ++p) {
        const double det = matrix_at(samples, m.size(), p).determinant();
        const int s = det > 0 ? 1 : (det < 0 ? -1 : 0);
        if (sign == 0) sign = s;
        if (s != sign) cert.constant_sign = false;
        if (std::abs(det) < cert.min_abs_det) {
            cert.min_abs_det = std::abs(det);
            cert.det_at_worst = det;
            worst = p;
        }
    }
    cert.worst_point = point_coords(spec, worst);
    return cert;
}

double coeff_distance(const MatrixField& a, const MatrixField& b) {
    require_same_spec(a.spec(), b.spec(), "coeff_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i) m = std::max(m, coeff_distance(a.entries()[i], b.entries()[i]));
    return m;
}

double sup_distance(const MatrixField& a, const MatrixField& b) {
    require_same_spec(a.spec(), b.spec(), "sup_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.entries().size(); ++i) m = std::max(m, sup_norm(a.entries()[i] - b.entries()[i]));
    return m;
}

// ---------------------------------------------------------------------------
// FormMatrix

FormMatrix::FormMatrix(const GridSpec& spec, std::vector<KForm> entries) : spec_(spec), entries_(std::move(entries)) {}

FormMatrix FormMatrix::from_entries(const GridSpec& spec, std::vector<KForm> entries) {
    if (entries.size() != static_cast<std::size_t>(spec.dim() * spec.dim()))
        throw ShapeError("FormMatrix: expected N*N entries");
    for (const auto& e : entries) {
        require_same_spec(e.spec(), spec, "FormMatrix");
        if (e.degree() != entries.front().degree()) throw ShapeError("FormMatrix: entries of mixed degree");
    }
    return FormMatrix(spec, std::move(entries));
}

FormMatrix exterior_d(const MatrixField& m) {
    std::vector<KForm> entries;
    for (const auto& e : m.entries()) entries.push_back(exterior_d(KForm::scalar(e)));
    return FormMatrix::from_entries(m.spec(), std::move(entries));
}

namespace {

// (a * b)_{ik} = sum_j a_ij b_jk where exactly one side is a matrix of functions.
template <class Coefficient>
FormMatrix mixed_product(const GridSpec& spec, int degree, Coefficient&& term) {
    const int n = spec.dim();
    const std::size_t comps = multi_indices(n, degree).size();
    std::vector<KForm> out;
    std::vector<FourierScalar> lhs, rhs;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            std::vector<FourierScalar> c;
            for (std::size_t p = 0; p < comps; ++p) {
                lhs.clear();
                rhs.clear();
                for (int j = 0; j < n; ++j) term(i, j, k, p, lhs, rhs);
                c.push_back(multiply_sum(lhs, rhs));
            }
            out.push_back(KForm::from_components(spec, degree, std::move(c)));
        }
    return FormMatrix::from_entries(spec, std::move(out));
}

}  // namespace

FormMatrix operator*(const MatrixField& m, const FormMatrix& f) {
    require_same_spec(m.spec(), f.spec(), "MatrixField * FormMatrix");
    return mixed_product(m.spec(), f.degree(), [&](int i, int j, int k, std::size_t p, auto& lhs, auto& rhs) {
        lhs.push_back(m(i, j));
        rhs.push_back(f(j, k).components()[p]);
    });
}

FormMatrix operator*(const FormMatrix& f, const MatrixField& m) {
    require_same_spec(m.spec(), f.spec(), "FormMatrix * MatrixField");
    return mixed_product(m.spec(), f.degree(), [&](int i, int j, int k, std::size_t p, auto& lhs, auto& rhs) {
        lhs.push_back(f(i, j).components()[p]);
        rhs.push_back(m(j, k));
    });
}

KForm matrix_wedge_trace(const FormMatrix& a, const FormMatrix& b) {
    require_same_spec(a.spec(), b.spec(), "matrix_wedge_trace");
    const GridSpec& spec = a.spec();
    const int degree = a.degree() + b.degree();
    if (degree > spec.dim()) return KForm::zero(spec, degree);
    ProductTerms terms(spec, degree);
    for (int i = 0; i < a.size(); ++i)
        for (int k = 0; k < a.size(); ++k) terms.add_wedge(a(i, k), b(k, i));
    return terms.finish();
}

}  // namespace diffext
