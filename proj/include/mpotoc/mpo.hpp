#pragma once

// Matrix-product operators for Heisenberg operators on open spin-1/2 chains.
//
// Conventions
//  * Sites are numbered 1..L; bond x sits between sites x and x+1.
//  * Site tensor axes are (left bond, physical out, physical in, right bond).
//    Because storage is row-major, the same buffer read with dims
//    (left, 4, right) is the operator-state tensor with fused index
//    p = 2 * out + in.
//  * The operator-state inner product is <A|B> = Tr(A^dagger B) / 2^L, so every
//    Pauli string (and every unitary) has unit norm.
//  * Isometry is measured in that inner product: a left-isometric tensor A obeys
//    sum_{a,p} conj(A[a,p,b]) A[a,p,b'] / 2 = delta(b, b').
//  * Dense basis ordering puts site 1 in the most significant bit.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "mpotoc/tensor.hpp"

namespace mpotoc {

enum class Pauli { I, X, Y, Z };

[[nodiscard]] Eigen::Matrix2cd pauli_matrix(Pauli p);
[[nodiscard]] char pauli_label(Pauli p);
[[nodiscard]] Pauli parse_pauli(char label);

class MpoError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class MatrixProductOperator {
public:
    /// Takes ownership of rank-4 site tensors; validates bond compatibility.
    explicit MatrixProductOperator(std::vector<DenseTensor> site_tensors,
                                   std::optional<int> ortho_center = std::nullopt);

    [[nodiscard]] int length() const { return static_cast<int>(sites_.size()); }
    [[nodiscard]] const DenseTensor &site(int r) const { return sites_.at(static_cast<std::size_t>(r - 1)); }
    [[nodiscard]] DenseTensor &site(int r) { return sites_.at(static_cast<std::size_t>(r - 1)); }
    [[nodiscard]] const std::vector<DenseTensor> &site_tensors() const { return sites_; }

    /// bond_dims()[k] for k = 0..L; the two outer entries are 1.
    [[nodiscard]] std::vector<std::size_t> bond_dims() const;
    [[nodiscard]] std::size_t bond_dim(int x) const;
    [[nodiscard]] std::size_t max_bond_dim() const;

    [[nodiscard]] std::optional<int> ortho_center() const { return center_; }
    void set_ortho_center(std::optional<int> c) { center_ = c; }

    /// Throws MpoError when a structural invariant does not hold.
    void validate() const;
    [[nodiscard]] bool all_finite() const;

    friend bool operator==(const MatrixProductOperator &, const MatrixProductOperator &) = default;

private:
    std::vector<DenseTensor> sites_;
    std::optional<int> center_;
};

/// Tensors reinterpreted as an L-site state with physical dimension 4.
struct OperatorStateView {
    std::vector<DenseTensor> tensors; // each (left, 4, right)
};

[[nodiscard]] OperatorStateView fuse(const MatrixProductOperator &w);
[[nodiscard]] MatrixProductOperator unfuse(const OperatorStateView &view);

/// Bond-dimension-1 MPO with `which` on site r and identities elsewhere.
[[nodiscard]] MatrixProductOperator local_pauli_mpo(int length, int r, Pauli which);

/// Product MPO from one 2x2 operator per site.
[[nodiscard]] MatrixProductOperator product_mpo(const std::vector<Eigen::Matrix2cd> &ops);

/// Mixed-canonical form with the orthogonality center at `center`.
[[nodiscard]] MatrixProductOperator canonicalize(MatrixProductOperator w, int center);

/// In-place center move; full sweeps when no center is recorded yet.
void move_center(MatrixProductOperator &w, int center);

/// sqrt(Tr(W^dagger W) / 2^L) via transfer matrices.
[[nodiscard]] double operator_norm(const MatrixProductOperator &w);

/// Largest deviation from isometry over tensors left/right of the center.
[[nodiscard]] double canonical_defect(const MatrixProductOperator &w);

struct CutEntanglement {
    double s_vn = 0.0;
    double s_renyi2 = 0.0;
    std::vector<double> spectrum; // normalized Schmidt weights s^2, non-increasing
};

/// Schmidt values below this fraction of the largest are dropped from entropies.
inline constexpr double kSchmidtFloor = 1e-14;

/// Entropies of Schmidt values (unnormalized singular values are fine).
[[nodiscard]] CutEntanglement entropies_from_singular_values(const std::vector<double> &singular_values);

/// Operator entanglement across bond x (1 <= x <= L-1), natural log.
[[nodiscard]] CutEntanglement entanglement_at_cut(const MatrixProductOperator &w, int x);

/// Operator entanglement at every bond 1..L-1 with a single sweep.
[[nodiscard]] std::vector<CutEntanglement> entanglement_all_cuts(const MatrixProductOperator &w);

/// Tr(W^dagger O W O) / Tr(W^dagger W), O acting on site r_probe.
[[nodiscard]] cplx expectation_local_superop(const MatrixProductOperator &w, int r_probe, const Eigen::Matrix2cd &o);

/// Left/right transfer environments for repeated local measurements on one
/// snapshot. left[k] contracts sites 1..k, right[k] contracts sites k+1..L,
/// each carrying the 1/2-per-site trace normalization.
class TransferEnvironments {
public:
    explicit TransferEnvironments(const MatrixProductOperator &w);
    [[nodiscard]] double norm_squared() const;
    /// <W| S_r |W> with a 4x4 single-site superoperator S on fused indices.
    [[nodiscard]] cplx site_expectation(int r, const Eigen::Matrix4cd &superop) const;
    /// || S_r |W> ||^2 evaluated from the modified site tensor, without
    /// subtracting O(1) quantities.
    [[nodiscard]] double site_image_norm_squared(int r, const Eigen::Matrix4cd &superop) const;

private:
    const MatrixProductOperator &w_;
    std::vector<CMatrix> left_, right_;
};

/// 4x4 superoperator on fused (out, in) indices mapping W -> O W O, so that
/// <W| S |W> = Tr(W^dagger O W O) / 2^L.
[[nodiscard]] Eigen::Matrix4cd conjugation_superop(const Eigen::Matrix2cd &o);

inline constexpr int kMaxDenseLength = 12;

/// Exact 2^L x 2^L matrix. Refuses L > 12.
[[nodiscard]] CMatrix mpo_to_dense(const MatrixProductOperator &w);

/// Compress a dense operator into an MPO by sweeping SVDs (left-canonical,
/// center at L).
[[nodiscard]] MatrixProductOperator mpo_from_dense(const CMatrix &dense, int length, std::size_t chi_max = 1u << 30,
                                                   double eps_rel = 0.0);

/// Site-wise operator product A*B; bond dims multiply.
[[nodiscard]] MatrixProductOperator mpo_product(const MatrixProductOperator &a, const MatrixProductOperator &b);

// Binary snapshot format, all integers and doubles little-endian:
//   bytes 0..3   magic "MPOS"
//   u32          format version (1)
//   u64          L
//   i64          ortho center (1-based) or -1
//   u64 x (L+1)  bond dims
//   for each site in order: (left*2*2*right) complex values as (re, im) f64
//   pairs in the row-major site-tensor layout.
inline constexpr std::array<char, 4> kSnapshotMagic{'M', 'P', 'O', 'S'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const MatrixProductOperator &w, std::ostream &out);
[[nodiscard]] MatrixProductOperator read_snapshot(std::istream &in);
void write_snapshot_file(const MatrixProductOperator &w, const std::filesystem::path &path);
[[nodiscard]] MatrixProductOperator read_snapshot_file(const std::filesystem::path &path);

} // namespace mpotoc
