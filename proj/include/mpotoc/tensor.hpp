#pragma once

// Dense complex tensor algebra used by every other part of the library.
//
// Layout: a DenseTensor with dims (d0, d1, ..., d{n-1}) stores element
// (i0, ..., i{n-1}) at flat offset ((i0 * d1 + i1) * d2 + i2) ... (row-major,
// last axis fastest). Reshaping is therefore free and never reorders data.

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace mpotoc {

using cplx = std::complex<double>;

// Column-major Eigen types are used for matrix algebra; DenseTensor is the
// storage and interchange type.
using CMatrix = Eigen::MatrixXcd;
using RowMajorCMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RVector = Eigen::VectorXd;

class TensorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DenseTensor {
public:
    /// Rank-0 tensor holding a single zero.
    DenseTensor();
    explicit DenseTensor(std::vector<std::size_t> dims);
    DenseTensor(std::vector<std::size_t> dims, std::vector<cplx> data);

    [[nodiscard]] std::size_t rank() const { return dims_.size(); }
    [[nodiscard]] const std::vector<std::size_t> &dims() const { return dims_; }
    [[nodiscard]] std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
    [[nodiscard]] std::size_t size() const { return data_.size(); }

    [[nodiscard]] std::span<const cplx> data() const { return data_; }
    [[nodiscard]] std::span<cplx> data() { return data_; }
    [[nodiscard]] const std::vector<cplx> &storage() const { return data_; }

    [[nodiscard]] std::size_t offset(std::initializer_list<std::size_t> index) const;
    [[nodiscard]] const cplx &operator()(std::initializer_list<std::size_t> index) const {
        return data_[offset(index)];
    }
    [[nodiscard]] cplx &operator()(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }

    /// Same data, new dims; the element count must not change.
    [[nodiscard]] DenseTensor reshaped(std::vector<std::size_t> dims) const &;
    [[nodiscard]] DenseTensor reshaped(std::vector<std::size_t> dims) &&;

    /// Result axis k is input axis perm[k].
    [[nodiscard]] DenseTensor permuted(const std::vector<std::size_t> &perm) const;

    DenseTensor &operator*=(cplx factor);

    [[nodiscard]] bool all_finite() const;
    [[nodiscard]] double frobenius_norm() const;

    /// Interpret a rank-2 tensor as a matrix.
    [[nodiscard]] CMatrix to_matrix() const;
    [[nodiscard]] static DenseTensor from_matrix(const CMatrix &m);

    friend bool operator==(const DenseTensor &, const DenseTensor &) = default;

private:
    std::vector<std::size_t> dims_;
    std::vector<cplx> data_;
};

[[nodiscard]] DenseTensor operator*(cplx factor, DenseTensor t);

/// Sum over the paired axes. Result axes are the unpaired axes of `a` in order,
/// followed by the unpaired axes of `b` in order.
[[nodiscard]] DenseTensor contract(const DenseTensor &a, const DenseTensor &b,
                                   const std::vector<std::pair<std::size_t, std::size_t>> &index_pairs);

struct SvdFactorization {
    DenseTensor left_isometry;           // rows x k, orthonormal columns
    std::vector<double> singular_values; // k values, non-increasing
    DenseTensor right_isometry;          // k x cols, orthonormal rows (this is V^dagger)
    double discarded_weight = 0.0;       // dropped sum s^2 over total sum s^2
};

/// Truncated SVD of a matrix-shaped tensor. Keeps at most `chi_max` values and
/// drops every value below eps_rel * s_max. At least one value is always kept.
///
/// Gauge: each kept left singular vector is rotated so that its first entry of
/// largest modulus is real and positive; the matching right vector absorbs the
/// conjugate phase. Identical input bits give identical output bits.
[[nodiscard]] SvdFactorization svd_truncate(const DenseTensor &m, std::size_t chi_max, double eps_rel);

/// Same as svd_truncate on an Eigen matrix; the hot path used by MPO updates.
struct MatrixSvd {
    CMatrix u;
    std::vector<double> s;
    CMatrix vh;
    double discarded_weight = 0.0;
};
[[nodiscard]] MatrixSvd svd_truncate_matrix(const CMatrix &m, std::size_t chi_max, double eps_rel);

/// Thin QR with the diagonal of R made real and non-negative, which fixes the
/// gauge completely for full-rank input.
struct ThinQr {
    CMatrix q;
    CMatrix r;
};
[[nodiscard]] ThinQr qr_positive(const CMatrix &m);

/// exp(i * theta * h) for Hermitian h, via eigendecomposition.
[[nodiscard]] CMatrix exp_i_hermitian(const CMatrix &h, double theta);

/// Largest |h - h^dagger| entry.
[[nodiscard]] double hermiticity_defect(const CMatrix &h);

} // namespace mpotoc
