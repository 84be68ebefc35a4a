#pragma once

#include "diffext/config.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace diffext {

using Complex = std::complex<double>;

/// Truncation and sampling resolution shared by every field on the torus.
///
/// A field keeps the modes r in {-D..D}^N; nonlinear work happens on the uniform
/// grid with q*(2D+1) points per axis, which is enough to hold the product of two
/// degree-D series without aliasing.
class GridSpec {
public:
    GridSpec(int dim, int degree, int oversample = 2);

    int dim() const { return dim_; }
    int degree() const { return degree_; }
    int oversample() const { return oversample_; }
    int modes_per_axis() const { return 2 * degree_ + 1; }
    int points_per_axis() const { return oversample_ * modes_per_axis(); }
    std::size_t mode_count() const;
    std::size_t point_count() const;

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    int dim_;
    int degree_;
    int oversample_;
};

// Throws ShapeError naming `what` when the two grids differ.
void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what);

/// A list of points of R^N, row-major.
class PointCloud {
public:
    PointCloud(int dim, std::vector<double> coords);

    int dim() const { return dim_; }
    std::size_t size() const { return coords_.size() / static_cast<std::size_t>(dim_); }
    std::span<const double> operator[](std::size_t i) const {
        return {coords_.data() + i * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
    }
    const std::vector<double>& coords() const { return coords_; }

private:
    int dim_;
    std::vector<double> coords_;
};

/// The oversampled uniform grid of T^N, axis 0 slowest.
PointCloud grid_points(const GridSpec& spec);

/// Truncated Fourier series of a real function on T^N = R^N / Z^N,
/// a(x) = sum_r c(r) exp(2 pi i r.x) with c(-r) = conj(c(r)).
///
/// Coefficients live on the full cube {-D..D}^N. `spill` accumulates the energy
/// discarded by truncations along the value's history.
class FourierScalar {
public:
    explicit FourierScalar(const GridSpec& spec);

    static FourierScalar constant(const GridSpec& spec, double value);
    /// Takes a full coefficient cube and symmetrizes it to exact Hermitian form.
    static FourierScalar from_coeffs(const GridSpec& spec, std::vector<Complex> coeffs,
                                     double spill = 0.0);

    const GridSpec& spec() const { return spec_; }
    std::span<const Complex> coeffs() const { return coeffs_; }
    /// Zero for modes outside the retained cube.
    Complex coeff(std::span<const int> mode) const;
    Complex coeff(std::initializer_list<int> mode) const {
        return coeff(std::span<const int>(mode.begin(), mode.size()));
    }

    double spill() const { return spill_; }
    /// True when truncation discarded more than the configured fraction of the energy.
    bool lossy(double ratio = default_thresholds.spill_ratio) const;
    /// Sum of |c(r)|^2, i.e. the mean of a(x)^2.
    double energy() const;
    /// max_r |c(r)|
    double max_abs_coeff() const;
    /// Largest |r_j| with a nonzero coefficient.
    int effective_degree(double cutoff = 0.0) const;

    FourierScalar operator-() const;
    friend FourierScalar operator+(const FourierScalar& a, const FourierScalar& b);
    friend FourierScalar operator-(const FourierScalar& a, const FourierScalar& b);
    friend FourierScalar operator*(double s, const FourierScalar& a);
    friend FourierScalar operator*(const FourierScalar& a, double s) { return s * a; }

private:
    FourierScalar(const GridSpec& spec, std::vector<Complex> coeffs, double spill);

    GridSpec spec_;
    std::vector<Complex> coeffs_;
    double spill_ = 0.0;
};

// Mode <-> flat index helpers for the coefficient cube.
std::size_t mode_index(const GridSpec& spec, std::span<const int> mode);
std::vector<int> mode_of(const GridSpec& spec, std::size_t index);

/// Degree-D truncation of the discrete Fourier transform of grid samples.
FourierScalar fit_from_samples(std::span<const double> samples, const GridSpec& spec);

/// Values on the oversampled grid (exact for the truncated series).
std::vector<double> grid_samples(const FourierScalar& a);

/// Direct mode summation at arbitrary points.
std::vector<double> evaluate_at(const FourierScalar& a, const PointCloud& points);

/// Evaluates many fields at one fixed point set, sharing the exponential tables.
class PointEvaluator {
public:
    PointEvaluator(const GridSpec& spec, const PointCloud& points);
    std::vector<double> operator()(const FourierScalar& a) const;
    std::size_t size() const { return count_; }

private:
    GridSpec spec_;
    std::size_t count_;
    std::vector<Complex> phases_;  // [point][axis][mode]
};

FourierScalar multiply(const FourierScalar& a, const FourierScalar& b);
/// sum_k a_k * b_k with a single truncation.
FourierScalar multiply_sum(std::span<const FourierScalar> a, std::span<const FourierScalar> b);
/// Axis is zero-based.
FourierScalar differentiate(const FourierScalar& a, int axis);
double integrate_mean(const FourierScalar& a);

enum class UnaryFn { ln_abs, exp };
FourierScalar pointwise_unary(const FourierScalar& a, UnaryFn fn,
                              const Thresholds& thresholds = default_thresholds);
/// Pointwise a / b on the grid; b must stay away from zero.
FourierScalar pointwise_divide(const FourierScalar& a, const FourierScalar& b,
                               const Thresholds& thresholds = default_thresholds);

/// max_r |a(r) - b(r)|
double coeff_distance(const FourierScalar& a, const FourierScalar& b);
/// max over the oversampled grid of |a(x)|.
double sup_norm(const FourierScalar& a);
/// max_r |c(r) - conj(c(-r))|
double hermitian_defect(const FourierScalar& a);

}  // namespace diffext
