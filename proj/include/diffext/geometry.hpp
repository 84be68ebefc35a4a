#pragma once

#include "diffext/config.hpp"
#include "diffext/spectral.hpp"

#include <span>
#include <vector>

namespace diffext {

/// Strictly increasing index tuples of length k drawn from {0..n-1}, in lexicographic order.
const std::vector<std::vector<int>>& multi_indices(int n, int k);
/// Position of an increasing index tuple within multi_indices(n, size); throws std::out_of_range.
std::size_t multi_index_position(int n, std::span<const int> indices);

/// A differential k-form sum_I a_I dx_I on T^N with coefficients stored per increasing multi-index.
///
/// Forms of degree k > N are the zero space: they carry no components and report trivial().
class KForm {
public:
    static KForm zero(const GridSpec& spec, int degree);
    static KForm scalar(FourierScalar a);
    static KForm one_form(std::vector<FourierScalar> components);
    static KForm from_components(const GridSpec& spec, int degree, std::vector<FourierScalar> components);
    /// dx_{i1} ^ ... ^ dx_{ik} for an increasing index list.
    static KForm basis(const GridSpec& spec, std::vector<int> indices);

    const GridSpec& spec() const { return spec_; }
    int degree() const { return degree_; }
    bool trivial() const { return degree_ > spec_.dim(); }

    std::span<const FourierScalar> components() const { return components_; }
    const FourierScalar& component(std::span<const int> indices) const;
    const FourierScalar& component(std::initializer_list<int> indices) const {
        return component(std::span<const int>(indices.begin(), indices.size()));
    }
    const std::vector<int>& indices_at(std::size_t position) const;

    double max_abs_coeff() const;
    double spill() const;

    KForm operator-() const;
    friend KForm operator+(const KForm& a, const KForm& b);
    friend KForm operator-(const KForm& a, const KForm& b);
    friend KForm operator*(double s, const KForm& a);

private:
    KForm(const GridSpec& spec, int degree, std::vector<FourierScalar> components);

    GridSpec spec_;
    int degree_;
    std::vector<FourierScalar> components_;
};

/// Multiplies every coefficient by the function a.
KForm scale(const FourierScalar& a, const KForm& form);
KForm wedge(const KForm& a, const KForm& b);
/// Left-to-right wedge of a non-empty list.
KForm wedge_all(std::span<const KForm> forms);
KForm exterior_d(const KForm& form);
/// max over components and modes of the coefficient difference.
double coeff_distance(const KForm& a, const KForm& b);

/// Element of Omega^1 / d Omega^0 held by its canonical representative: at every mode r != 0 the
/// coefficient vector is orthogonal to r.
class KClass {
public:
    explicit KClass(const GridSpec& spec);

    const KForm& rep() const { return rep_; }
    const GridSpec& spec() const { return rep_.spec(); }

    KClass operator-() const;
    friend KClass operator+(const KClass& a, const KClass& b);
    friend KClass operator-(const KClass& a, const KClass& b);
    friend KClass operator*(double s, const KClass& a);

private:
    friend KClass project_K(const KForm& form);
    explicit KClass(KForm rep) : rep_(std::move(rep)) {}

    KForm rep_;
};

/// Removes, mode by mode, the coefficient component parallel to r (the exact part).
KClass project_K(const KForm& form);
double coeff_distance(const KClass& a, const KClass& b);

/// An N x N matrix of functions on T^N, row-major.
class MatrixField {
public:
    static MatrixField zero(const GridSpec& spec);
    static MatrixField identity(const GridSpec& spec);
    static MatrixField diagonal(std::vector<FourierScalar> diag);
    static MatrixField from_entries(const GridSpec& spec, std::vector<FourierScalar> entries);

    const GridSpec& spec() const { return spec_; }
    int size() const { return spec_.dim(); }
    const FourierScalar& operator()(int row, int col) const {
        return entries_[static_cast<std::size_t>(row) * size() + col];
    }
    std::span<const FourierScalar> entries() const { return entries_; }
    double max_abs_coeff() const;

    friend MatrixField operator+(const MatrixField& a, const MatrixField& b);
    friend MatrixField operator-(const MatrixField& a, const MatrixField& b);
    friend MatrixField operator*(double s, const MatrixField& a);
    /// Pointwise matrix product, truncated.
    friend MatrixField operator*(const MatrixField& a, const MatrixField& b);

private:
    MatrixField(const GridSpec& spec, std::vector<FourierScalar> entries);

    GridSpec spec_;
    std::vector<FourierScalar> entries_;
};

FourierScalar trace_field(const MatrixField& m);
/// Pointwise inverse on the oversampled grid, refit entrywise.
MatrixField matrix_inverse_field(const MatrixField& m, const Thresholds& thresholds = default_thresholds);
/// Pointwise determinant on the oversampled grid, refit.
FourierScalar determinant_field(const MatrixField& m);
double coeff_distance(const MatrixField& a, const MatrixField& b);
/// max over entries and grid points of |a - b|.
double sup_distance(const MatrixField& a, const MatrixField& b);

/// Sampled bound on |det m(x)| over the oversampled grid.
struct DetCertificate {
    double min_abs_det = 0.0;
    double det_at_worst = 0.0;
    bool constant_sign = true;
    std::vector<double> worst_point;
};
DetCertificate det_certificate(const MatrixField& m);

/// An N x N matrix whose entries are k-forms of one common degree.
class FormMatrix {
public:
    static FormMatrix from_entries(const GridSpec& spec, std::vector<KForm> entries);

    const GridSpec& spec() const { return spec_; }
    int size() const { return spec_.dim(); }
    int degree() const { return entries_.front().degree(); }
    const KForm& operator()(int row, int col) const { return entries_[static_cast<std::size_t>(row) * size() + col]; }

private:
    FormMatrix(const GridSpec& spec, std::vector<KForm> entries);

    GridSpec spec_;
    std::vector<KForm> entries_;
};

/// Entrywise exterior derivative of a matrix of functions.
FormMatrix exterior_d(const MatrixField& m);
FormMatrix operator*(const MatrixField& m, const FormMatrix& f);
FormMatrix operator*(const FormMatrix& f, const MatrixField& m);
/// Tr(a ^ b) = sum_{i,k} a_ik ^ b_ki.
KForm matrix_wedge_trace(const FormMatrix& a, const FormMatrix& b);

}  // namespace diffext
