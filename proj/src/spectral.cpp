#include "diffext/spectral.hpp"

#include "diffext/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <utility>

namespace diffext {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::size_t ipow(std::size_t base, int exp) {
    std::size_t out = 1;
    for (int i = 0; i < exp; ++i) out *= base;
    return out;
}

// Real-to-complex plans for one grid shape. Planning is not thread-safe in FFTW, so
// plans are made under a lock; the new-array execute calls are safe to run concurrently.
struct GridPlans {
    fftw_plan forward = nullptr;   // samples -> half spectrum
    fftw_plan backward = nullptr;  // half spectrum -> samples
    std::size_t points = 0;
    std::size_t half = 0;
};

struct FftwDeleter {
    void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwDeleter>;
using HalfBuffer = std::unique_ptr<fftw_complex[], FftwDeleter>;

RealBuffer real_buffer(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
HalfBuffer half_buffer(std::size_t n) { return HalfBuffer(fftw_alloc_complex(n)); }

const GridPlans& grid_plans(const GridSpec& spec) {
    static std::mutex guard;
    static std::map<std::pair<int, int>, GridPlans> cache;
    std::lock_guard lock(guard);
    auto& slot = cache[{spec.dim(), spec.points_per_axis()}];
    if (!slot.forward) {
        const int m = spec.points_per_axis();
        std::vector<int> n(spec.dim(), m);
        slot.points = spec.point_count();
        slot.half = slot.points / m * (m / 2 + 1);
        auto in = real_buffer(slot.points);
        auto out = half_buffer(slot.half);
        slot.forward = fftw_plan_dft_r2c(spec.dim(), n.data(), in.get(), out.get(), FFTW_ESTIMATE);
        slot.backward =
            fftw_plan_dft_c2r(spec.dim(), n.data(), out.get(), in.get(), FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
        if (!slot.forward || !slot.backward) throw ConsistencyError("FFTW could not plan the grid transform");
    }
    return slot;
}

// Offset of mode r (r_last >= 0) in the half spectrum of an M^N grid.
struct HalfIndexer {
    int dim, degree, m;
    std::size_t operator()(std::span<const int> r) const {
        std::size_t flat = 0;
        for (int j = 0; j < dim; ++j) {
            const std::size_t len = j + 1 == dim ? static_cast<std::size_t>(m / 2 + 1) : m;
            flat = flat * len + static_cast<std::size_t>((r[j] % m + m) % m);
        }
        return flat;
    }
};

// Calls f(flat cube index, mode) for every mode of the cube in order.
template <class F>
void for_each_mode(const GridSpec& spec, F&& f) {
    const int n = spec.dim(), d = spec.degree();
    std::vector<int> r(n, -d);
    for (std::size_t i = 0; i < spec.mode_count(); ++i) {
        f(i, std::span<const int>(r));
        for (int j = n - 1; j >= 0; --j) {
            if (++r[j] <= d) break;
            r[j] = -d;
        }
    }
}

std::vector<Complex> symmetrized(std::vector<Complex> c) {
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < n / 2; ++i) {
        const std::size_t j = n - 1 - i;
        const Complex avg = 0.5 * (c[i] + std::conj(c[j]));
        c[i] = avg;
        c[j] = std::conj(avg);
    }
    c[n / 2] = Complex(c[n / 2].real(), 0.0);
    return c;
}

// Degree-D truncation of the grid DFT; `inherited` is spill carried over from the inputs.
FourierScalar fit_with_spill(std::span<const double> samples, const GridSpec& spec, double inherited) {
    if (samples.size() != spec.point_count()) {
        std::ostringstream os;
        os << "fit_from_samples: expected " << spec.point_count() << " samples, got " << samples.size();
        throw ShapeError(os.str());
    }
    const auto& plans = grid_plans(spec);
    auto in = real_buffer(plans.points);
    auto out = half_buffer(plans.half);
    std::copy(samples.begin(), samples.end(), in.get());
    fftw_execute_dft_r2c(plans.forward, in.get(), out.get());
    const HalfIndexer at{spec.dim(), spec.degree(), spec.points_per_axis()};
    const double norm = 1.0 / static_cast<double>(plans.points);
    std::vector<Complex> work(spec.mode_count());
    std::vector<int> neg(spec.dim());
    for_each_mode(spec, [&](std::size_t i, std::span<const int> r) {
        if (r.back() >= 0) {
            const auto& z = out[at(r)];
            work[i] = Complex(z[0], z[1]) * norm;
        } else {
            for (int j = 0; j < spec.dim(); ++j) neg[j] = -r[j];
            const auto& z = out[at(neg)];
            work[i] = Complex(z[0], -z[1]) * norm;
        }
    });
    work = symmetrized(std::move(work));

    // Parseval: whatever the grid carries beyond the retained modes was truncated.
    double total = 0.0;
    for (double s : samples) total += s * s;
    total /= static_cast<double>(samples.size());
    double retained = 0.0;
    for (const auto& c : work) retained += std::norm(c);
    return FourierScalar::from_coeffs(spec, std::move(work), inherited + std::max(0.0, total - retained));
}

std::string describe_point(const GridSpec& spec, std::size_t flat) {
    const int m = spec.points_per_axis();
    std::vector<double> x(spec.dim());
    for (int j = spec.dim() - 1; j >= 0; --j) {
        x[j] = static_cast<double>(flat % m) / m;
        flat /= m;
    }
    std::ostringstream os;
    os << '(';
    for (int j = 0; j < spec.dim(); ++j) os << (j ? ", " : "") << x[j];
    os << ')';
    return os.str();
}

}  // namespace

GridSpec::GridSpec(int dim, int degree, int oversample)
    : dim_(dim), degree_(degree), oversample_(oversample) {
    if (dim < 1) throw ShapeError("GridSpec: dim must be >= 1");
    if (degree < 1) throw ShapeError("GridSpec: degree must be >= 1");
    if (oversample < 2) throw ShapeError("GridSpec: oversample must be >= 2");
}

std::size_t GridSpec::mode_count() const { return ipow(modes_per_axis(), dim_); }
std::size_t GridSpec::point_count() const { return ipow(points_per_axis(), dim_); }

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what) {
    if (!(a == b)) throw ShapeError(std::string(what) + ": grid specs differ");
}

PointCloud::PointCloud(int dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim < 1 || coords_.size() % static_cast<std::size_t>(dim) != 0)
        throw ShapeError("PointCloud: coordinate count is not a multiple of dim");
}

PointCloud grid_points(const GridSpec& spec) {
    const int n = spec.dim();
    const int m = spec.points_per_axis();
    const std::size_t count = spec.point_count();
    std::vector<double> coords(count * n);
    for (std::size_t flat = 0; flat < count; ++flat) {
        std::size_t rest = flat;
        for (int j = n - 1; j >= 0; --j) {
            coords[flat * n + j] = static_cast<double>(rest % m) / m;
            rest /= m;
        }
    }
    return PointCloud(n, std::move(coords));
}

std::size_t mode_index(const GridSpec& spec, std::span<const int> mode) {
    if (static_cast<int>(mode.size()) != spec.dim()) throw ShapeError("mode_index: wrong mode length");
    const int d = spec.degree();
    const std::size_t k = spec.modes_per_axis();
    std::size_t flat = 0;
    for (int r : mode) {
        if (r < -d || r > d) throw std::out_of_range("mode_index: mode outside the retained cube");
        flat = flat * k + static_cast<std::size_t>(r + d);
    }
    return flat;
}

std::vector<int> mode_of(const GridSpec& spec, std::size_t index) {
    const int k = spec.modes_per_axis();
    std::vector<int> mode(spec.dim());
    for (int j = spec.dim() - 1; j >= 0; --j) {
        mode[j] = static_cast<int>(index % k) - spec.degree();
        index /= k;
    }
    return mode;
}

FourierScalar::FourierScalar(const GridSpec& spec) : spec_(spec), coeffs_(spec.mode_count()) {}

FourierScalar::FourierScalar(const GridSpec& spec, std::vector<Complex> coeffs, double spill)
    : spec_(spec), coeffs_(std::move(coeffs)), spill_(spill) {}

FourierScalar FourierScalar::constant(const GridSpec& spec, double value) {
    FourierScalar out(spec);
    out.coeffs_[out.coeffs_.size() / 2] = value;
    return out;
}

FourierScalar FourierScalar::from_coeffs(const GridSpec& spec, std::vector<Complex> coeffs, double spill) {
    if (coeffs.size() != spec.mode_count()) throw ShapeError("FourierScalar: coefficient cube has the wrong size");
    return FourierScalar(spec, symmetrized(std::move(coeffs)), spill);
}

Complex FourierScalar::coeff(std::span<const int> mode) const {
    if (static_cast<int>(mode.size()) != spec_.dim()) throw ShapeError("FourierScalar::coeff: wrong mode length");
    for (int r : mode)
        if (std::abs(r) > spec_.degree()) return {};
    return coeffs_[mode_index(spec_, mode)];
}

bool FourierScalar::lossy(double ratio) const {
    return spill_ > ratio * std::max(energy(), 1e-300);
}

double FourierScalar::energy() const {
    double e = 0.0;
    for (const auto& c : coeffs_) e += std::norm(c);
    return e;
}

double FourierScalar::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

int FourierScalar::effective_degree(double cutoff) const {
    int deg = 0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        if (std::abs(coeffs_[i]) <= cutoff) continue;
        for (int r : mode_of(spec_, i)) deg = std::max(deg, std::abs(r));
    }
    return deg;
}

FourierScalar FourierScalar::operator-() const {
    auto c = coeffs_;
    for (auto& x : c) x = -x;
    return FourierScalar(spec_, std::move(c), spill_);
}

FourierScalar operator+(const FourierScalar& a, const FourierScalar& b) {
    require_same_spec(a.spec_, b.spec_, "FourierScalar +");
    auto c = a.coeffs_;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += b.coeffs_[i];
    return FourierScalar(a.spec_, std::move(c), a.spill_ + b.spill_);
}

FourierScalar operator-(const FourierScalar& a, const FourierScalar& b) {
    require_same_spec(a.spec_, b.spec_, "FourierScalar -");
    auto c = a.coeffs_;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b.coeffs_[i];
    return FourierScalar(a.spec_, std::move(c), a.spill_ + b.spill_);
}

FourierScalar operator*(double s, const FourierScalar& a) {
    auto c = a.coeffs_;
    for (auto& x : c) x *= s;
    return FourierScalar(a.spec_, std::move(c), s * s * a.spill_);
}

FourierScalar fit_from_samples(std::span<const double> samples, const GridSpec& spec) {
    return fit_with_spill(samples, spec, 0.0);
}

std::vector<double> grid_samples(const FourierScalar& a) {
    const GridSpec& spec = a.spec();
    const auto& plans = grid_plans(spec);
    auto in = half_buffer(plans.half);
    auto out = real_buffer(plans.points);
    std::fill_n(&in[0][0], 2 * plans.half, 0.0);
    const HalfIndexer at{spec.dim(), spec.degree(), spec.points_per_axis()};
    const auto c = a.coeffs();
    for_each_mode(spec, [&](std::size_t i, std::span<const int> r) {
        if (r.back() < 0) return;
        auto& z = in[at(r)];
        z[0] = c[i].real();
        z[1] = c[i].imag();
    });
    fftw_execute_dft_c2r(plans.backward, in.get(), out.get());
    return std::vector<double>(out.get(), out.get() + plans.points);
}

PointEvaluator::PointEvaluator(const GridSpec& spec, const PointCloud& points)
    : spec_(spec), count_(points.size()) {
    if (points.dim() != spec.dim()) throw ShapeError("PointEvaluator: point dimension differs from grid");
    const int k = spec.modes_per_axis();
    const int d = spec.degree();
    phases_.resize(count_ * spec.dim() * k);
    for (std::size_t p = 0; p < count_; ++p) {
        const auto x = points[p];
        for (int j = 0; j < spec.dim(); ++j) {
            // fractional part keeps the phase accurate for lifted coordinates
            const double frac = x[j] - std::floor(x[j]);
            const Complex base = std::polar(1.0, two_pi * frac);
            Complex* row = phases_.data() + (p * spec.dim() + j) * k;
            row[d] = 1.0;
            for (int m = 1; m <= d; ++m) {
                // reseed every 16 powers to keep the recurrence error flat
                row[d + m] = m % 16 == 0 ? std::polar(1.0, two_pi * m * frac) : row[d + m - 1] * base;
                row[d - m] = std::conj(row[d + m]);
            }
        }
    }
}

std::vector<double> PointEvaluator::operator()(const FourierScalar& a) const {
    require_same_spec(a.spec(), spec_, "PointEvaluator");
    if (hermitian_defect(a) > 1e-9 * std::max(1.0, a.max_abs_coeff()))
        throw ConsistencyError("evaluate_at: coefficients lost Hermitian symmetry beyond 1e-9");
    const int n = spec_.dim();
    const std::size_t k = spec_.modes_per_axis();
    const std::size_t d = spec_.degree();
    // modes with r_0 < 0 are conjugates of those with r_0 > 0, so only the upper half of axis 0 is read
    const std::size_t slab = a.coeffs().size() / k;
    const Complex* upper = a.coeffs().data() + d * slab;
    std::vector<double> out(count_);
    std::vector<Complex> buf_a((d + 1) * slab), buf_b((d + 1) * slab);
    for (std::size_t p = 0; p < count_; ++p) {
        const Complex* src = upper;
        std::size_t len = (d + 1) * slab;
        // contract the last axis first, then move outward, stopping before axis 0
        for (int axis = n - 1; axis >= 1; --axis) {
            const Complex* ph = phases_.data() + (p * n + axis) * k;
            const std::size_t next = len / k;
            for (std::size_t o = 0; o < next; ++o) {
                Complex acc{};
                const Complex* c = src + o * k;
                for (std::size_t m = 0; m < k; ++m) acc += c[m] * ph[m];
                buf_b[o] = acc;
            }
            std::swap(buf_a, buf_b);
            src = buf_a.data();
            len = next;
        }
        const Complex* ph = phases_.data() + p * n * k + d;
        double value = (src[0] * ph[0]).real();
        for (std::size_t m = 1; m <= d; ++m) value += 2.0 * (src[m] * ph[m]).real();
        out[p] = value;
    }
    return out;
}

std::vector<double> evaluate_at(const FourierScalar& a, const PointCloud& points) {
    return PointEvaluator(a.spec(), points)(a);
}

FourierScalar multiply(const FourierScalar& a, const FourierScalar& b) {
    require_same_spec(a.spec(), b.spec(), "multiply");
    const FourierScalar lhs[] = {a};
    const FourierScalar rhs[] = {b};
    return multiply_sum(lhs, rhs);
}

FourierScalar multiply_sum(std::span<const FourierScalar> a, std::span<const FourierScalar> b) {
    if (a.size() != b.size() || a.empty()) throw ShapeError("multiply_sum: factor lists must be non-empty and equal length");
    const GridSpec& spec = a.front().spec();
    std::vector<double> acc(spec.point_count(), 0.0);
    double spill = 0.0;
    // factors repeat a lot in matrix and form products; sample each distinct one once
    std::vector<std::pair<const FourierScalar*, std::vector<double>>> seen;
    auto samples_of = [&](const FourierScalar& x) -> const std::vector<double>& {
        for (const auto& [ptr, values] : seen)
            if (ptr == &x || std::equal(ptr->coeffs().begin(), ptr->coeffs().end(), x.coeffs().begin())) return values;
        seen.emplace_back(&x, grid_samples(x));
        return seen.back().second;
    };
    seen.reserve(2 * a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        require_same_spec(a[k].spec(), spec, "multiply");
        require_same_spec(b[k].spec(), spec, "multiply");
        const auto& sa = samples_of(a[k]);
        const auto& sb = samples_of(b[k]);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sa[i] * sb[i];
        spill += a[k].spill() + b[k].spill();
    }
    return fit_with_spill(acc, spec, spill);
}

FourierScalar differentiate(const FourierScalar& a, int axis) {
    const GridSpec& spec = a.spec();
    if (axis < 0 || axis >= spec.dim()) throw std::out_of_range("differentiate: axis out of range");
    const std::size_t k = spec.modes_per_axis();
    std::size_t stride = 1;
    for (int j = axis + 1; j < spec.dim(); ++j) stride *= k;
    std::vector<Complex> c(a.coeffs().begin(), a.coeffs().end());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const int r = static_cast<int>((i / stride) % k) - spec.degree();
        c[i] *= Complex(0.0, two_pi * r);
    }
    return FourierScalar::from_coeffs(spec, std::move(c), a.spill());
}

double integrate_mean(const FourierScalar& a) { return a.coeffs()[a.coeffs().size() / 2].real(); }

FourierScalar pointwise_unary(const FourierScalar& a, UnaryFn fn, const Thresholds& thresholds) {
    auto s = grid_samples(a);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (fn == UnaryFn::ln_abs) {
            if (std::abs(s[i]) < thresholds.positivity) {
                std::ostringstream os;
                os << "pointwise_unary(ln_abs): |a| = " << std::abs(s[i]) << " below " << thresholds.positivity
                   << " at grid point " << describe_point(a.spec(), i);
                throw DomainError(os.str());
            }
            s[i] = std::log(std::abs(s[i]));
        } else {
            s[i] = std::exp(s[i]);
        }
    }
    return fit_with_spill(s, a.spec(), a.spill());
}

FourierScalar pointwise_divide(const FourierScalar& a, const FourierScalar& b, const Thresholds& thresholds) {
    require_same_spec(a.spec(), b.spec(), "pointwise_divide");
    auto num = grid_samples(a);
    const auto den = grid_samples(b);
    for (std::size_t i = 0; i < num.size(); ++i) {
        if (std::abs(den[i]) < thresholds.positivity) {
            std::ostringstream os;
            os << "pointwise_divide: |denominator| = " << std::abs(den[i]) << " at grid point "
               << describe_point(a.spec(), i);
            throw DomainError(os.str());
        }
        num[i] /= den[i];
    }
    return fit_with_spill(num, a.spec(), a.spill() + b.spill());
}

double coeff_distance(const FourierScalar& a, const FourierScalar& b) {
    require_same_spec(a.spec(), b.spec(), "coeff_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.coeffs().size(); ++i) m = std::max(m, std::abs(a.coeffs()[i] - b.coeffs()[i]));
    return m;
}

double sup_norm(const FourierScalar& a) {
    double m = 0.0;
    for (double s : grid_samples(a)) m = std::max(m, std::abs(s));
    return m;
}

double hermitian_defect(const FourierScalar& a) {
    const auto c = a.coeffs();
    double m = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c[i] - std::conj(c[c.size() - 1 - i])));
    return m;
}

}  // namespace diffext
