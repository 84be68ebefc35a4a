#pragma once

#include "diffext/config.hpp"
#include "diffext/geometry.hpp"
#include "diffext/spectral.hpp"

#include <vector>

namespace diffext {

/// A diffeomorphism of T^N written as F(x) = A x + f(x) mod 1 with A an integer matrix of
/// determinant +-1 and f periodic.
class Diffeo {
public:
    /// Checks the winding and the regularity certificate of A + f^J; throws DomainError on failure.
    static Diffeo make(std::vector<int> winding, std::vector<FourierScalar> displacement,
                       const Thresholds& thresholds = default_thresholds);
    /// Identity winding.
    static Diffeo from_displacement(std::vector<FourierScalar> displacement,
                                    const Thresholds& thresholds = default_thresholds);
    static Diffeo identity(const GridSpec& spec);
    static Diffeo translation(const GridSpec& spec, std::vector<double> shift);

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim(); }
    /// Row-major N x N.
    const std::vector<int>& winding() const { return winding_; }
    int winding(int row, int col) const { return winding_[static_cast<std::size_t>(row) * dim() + col]; }
    std::span<const FourierScalar> displacement() const { return displacement_; }
    const DetCertificate& certificate() const { return certificate_; }
    double spill() const;

private:
    Diffeo(const GridSpec& spec, std::vector<int> winding, std::vector<FourierScalar> displacement,
           DetCertificate certificate);

    GridSpec spec_;
    std::vector<int> winding_;
    std::vector<FourierScalar> displacement_;
    DetCertificate certificate_;
};

/// Images F(x_p) as lifted coordinates (not reduced mod 1).
PointCloud apply(const Diffeo& f, const PointCloud& points);

/// (FG)(x) = F(G(x)).
Diffeo compose(const Diffeo& f, const Diffeo& g, const Thresholds& thresholds = default_thresholds);
/// Newton iteration per grid point; throws ConvergenceError past thresholds.newton_max_steps.
Diffeo inverse(const Diffeo& f, const Thresholds& thresholds = default_thresholds);
/// (i, k) entry A_ik + d f_i / d x_k.
MatrixField jacobian(const Diffeo& f);

/// a(F(x)).
FourierScalar act_on_scalar(const FourierScalar& a, const Diffeo& f);
/// m(F(x)), entrywise.
MatrixField act_on_matrix(const MatrixField& m, const Diffeo& f);
/// a(F(x)) dF_{j1} ^ ... ^ dF_{jk}, summed over the components of the form.
KForm pullback_form(const KForm& form, const Diffeo& f);

/// Max coefficient distance over the displacement, plus an exact comparison of the windings.
double coeff_distance(const Diffeo& a, const Diffeo& b);
/// Max over grid points of the torus distance between F(x) and G(x).
double sup_distance(const Diffeo& a, const Diffeo& b);

/// v = sum_j v_j d/dx_j.
class VectorField {
public:
    static VectorField from_components(std::vector<FourierScalar> components);
    static VectorField constant(const GridSpec& spec, std::vector<double> values);
    static VectorField zero(const GridSpec& spec);

    const GridSpec& spec() const { return spec_; }
    int dim() const { return spec_.dim(); }
    const FourierScalar& operator[](int i) const { return components_[static_cast<std::size_t>(i)]; }
    std::span<const FourierScalar> components() const { return components_; }
    double max_abs_coeff() const;

    VectorField operator-() const;
    friend VectorField operator+(const VectorField& a, const VectorField& b);
    friend VectorField operator-(const VectorField& a, const VectorField& b);
    friend VectorField operator*(double s, const VectorField& a);

private:
    VectorField(const GridSpec& spec, std::vector<FourierScalar> components);

    GridSpec spec_;
    std::vector<FourierScalar> components_;
};

/// v . a = sum_j v_j da/dx_j.
FourierScalar directional(const VectorField& v, const FourierScalar& a);
/// [v,w]_i = sum_j (v_j dw_i/dx_j - w_j dv_i/dx_j).
VectorField lie_bracket(const VectorField& v, const VectorField& w);
KForm lie_derivative(const VectorField& v, const KForm& form);
/// Fixed-step RK4 of dx/dt = v(x) from every grid point, refit with identity winding.
Diffeo flow(const VectorField& v, double t, const Thresholds& thresholds = default_thresholds);
FourierScalar divergence(const VectorField& v);
/// (i, k) entry d v_i / d x_k.
MatrixField vector_jacobian(const VectorField& v);
double coeff_distance(const VectorField& a, const VectorField& b);

}  // namespace diffext
