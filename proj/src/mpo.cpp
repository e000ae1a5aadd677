#include "mpotoc/mpo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace mpotoc {

namespace {

const double kSqrt2 = std::sqrt(2.0);

using SliceMap = Eigen::Map<const RowMajorCMatrix, 0, Eigen::OuterStride<>>;

// Slice p (0..3) of a site tensor viewed as (left, 4, right): a left x right matrix.
SliceMap slice(const DenseTensor &t, int p) {
    const auto bl = static_cast<Eigen::Index>(t.dim(0));
    const auto br = static_cast<Eigen::Index>(t.dim(3));
    return SliceMap(t.data().data() + p * br, bl, br, Eigen::OuterStride<>(4 * br));
}

// (left*4) x right view and left x (4*right) view of a site tensor.
CMatrix as_left_matrix(const DenseTensor &t) {
    return Eigen::Map<const RowMajorCMatrix>(t.data().data(), static_cast<Eigen::Index>(t.dim(0) * 4),
                                             static_cast<Eigen::Index>(t.dim(3)));
}
CMatrix as_right_matrix(const DenseTensor &t) {
    return Eigen::Map<const RowMajorCMatrix>(t.data().data(), static_cast<Eigen::Index>(t.dim(0)),
                                             static_cast<Eigen::Index>(4 * t.dim(3)));
}
DenseTensor site_from_left_matrix(const CMatrix &m) {
    DenseTensor t({static_cast<std::size_t>(m.rows() / 4), 2, 2, static_cast<std::size_t>(m.cols())});
    Eigen::Map<RowMajorCMatrix>(t.data().data(), m.rows(), m.cols()) = m;
    return t;
}
DenseTensor site_from_right_matrix(const CMatrix &m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), 2, 2, static_cast<std::size_t>(m.cols() / 4)});
    Eigen::Map<RowMajorCMatrix>(t.data().data(), m.rows(), m.cols()) = m;
    return t;
}

// Center at site k (1-based) moves to k+1.
void shift_center_right(MatrixProductOperator &w, int k) {
    auto qr = qr_positive(as_left_matrix(w.site(k)));
    w.site(k) = site_from_left_matrix(kSqrt2 * qr.q);
    const CMatrix next = (qr.r / kSqrt2) * as_right_matrix(w.site(k + 1));
    w.site(k + 1) = site_from_right_matrix(next);
}

// Center at site k moves to k-1.
void shift_center_left(MatrixProductOperator &w, int k) {
    auto qr = qr_positive(as_right_matrix(w.site(k)).adjoint());
    w.site(k) = site_from_right_matrix(kSqrt2 * qr.q.adjoint());
    const CMatrix prev = as_left_matrix(w.site(k - 1)) * (qr.r.adjoint() / kSqrt2);
    w.site(k - 1) = site_from_left_matrix(prev);
}

void check_site(const MatrixProductOperator &w, int r, const char *what) {
    if(r < 1 || r > w.length()) throw MpoError(std::string(what) + ": site index out of range");
}

} // namespace

Eigen::Matrix2cd pauli_matrix(Pauli p) {
    const cplx i{0.0, 1.0};
    Eigen::Matrix2cd m;
    switch(p) {
    case Pauli::I: m << 1, 0, 0, 1; break;
    case Pauli::X: m << 0, 1, 1, 0; break;
    case Pauli::Y: m << 0, -i, i, 0; break;
    case Pauli::Z: m << 1, 0, 0, -1; break;
    }
    return m;
}

char pauli_label(Pauli p) {
    switch(p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
    }
    return '?';
}

Pauli parse_pauli(char label) {
    switch(label) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default: throw MpoError(std::string("unknown Pauli label '") + label + "'");
    }
}

MatrixProductOperator::MatrixProductOperator(std::vector<DenseTensor> site_tensors, std::optional<int> ortho_center)
    : sites_(std::move(site_tensors)), center_(ortho_center) {
    validate();
}

void MatrixProductOperator::validate() const {
    if(sites_.empty()) throw MpoError("MPO length must be >= 1");
    for(std::size_t k = 0; k < sites_.size(); ++k) {
        const auto &t = sites_[k];
        if(t.rank() != 4 || t.dim(1) != 2 || t.dim(2) != 2)
            throw MpoError("site tensor " + std::to_string(k + 1) + " must have dims (chi, 2, 2, chi')");
        if(k > 0 && sites_[k - 1].dim(3) != t.dim(0))
            throw MpoError("bond dimension mismatch at bond " + std::to_string(k));
    }
    if(sites_.front().dim(0) != 1 || sites_.back().dim(3) != 1) throw MpoError("outer bond dimensions must be 1");
    if(center_ && (*center_ < 1 || *center_ > length())) throw MpoError("orthogonality center out of range");
}

std::vector<std::size_t> MatrixProductOperator::bond_dims() const {
    std::vector<std::size_t> dims;
    dims.reserve(sites_.size() + 1);
    dims.push_back(sites_.front().dim(0));
    for(const auto &t : sites_) dims.push_back(t.dim(3));
    return dims;
}

std::size_t MatrixProductOperator::bond_dim(int x) const {
    if(x < 0 || x > length()) throw MpoError("bond index out of range");
    return x == 0 ? sites_.front().dim(0) : sites_[static_cast<std::size_t>(x - 1)].dim(3);
}

std::size_t MatrixProductOperator::max_bond_dim() const {
    const auto dims = bond_dims();
    return *std::max_element(dims.begin(), dims.end());
}

bool MatrixProductOperator::all_finite() const {
    return std::all_of(sites_.begin(), sites_.end(), [](const DenseTensor &t) { return t.all_finite(); });
}

OperatorStateView fuse(const MatrixProductOperator &w) {
    OperatorStateView view;
    view.tensors.reserve(w.site_tensors().size());
    for(const auto &t : w.site_tensors()) view.tensors.push_back(t.reshaped({t.dim(0), 4, t.dim(3)}));
    return view;
}

MatrixProductOperator unfuse(const OperatorStateView &view) {
    std::vector<DenseTensor> sites;
    sites.reserve(view.tensors.size());
    for(const auto &t : view.tensors) {
        if(t.rank() != 3 || t.dim(1) != 4) throw MpoError("operator-state tensors must have dims (chi, 4, chi')");
        sites.push_back(t.reshaped({t.dim(0), 2, 2, t.dim(2)}));
    }
    return MatrixProductOperator(std::move(sites));
}

MatrixProductOperator product_mpo(const std::vector<Eigen::Matrix2cd> &ops) {
    std::vector<DenseTensor> sites;
    sites.reserve(ops.size());
    for(const auto &o : ops) {
        DenseTensor t({1, 2, 2, 1});
        for(std::size_t a = 0; a < 2; ++a)
            for(std::size_t b = 0; b < 2; ++b)
                t({0, a, b, 0}) = o(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        sites.push_back(std::move(t));
    }
    return MatrixProductOperator(std::move(sites));
}

MatrixProductOperator local_pauli_mpo(int length, int r, Pauli which) {
    if(length < 1) throw MpoError("local_pauli_mpo: length must be >= 1");
    if(r < 1 || r > length) throw MpoError("local_pauli_mpo: site index out of range");
    std::vector<Eigen::Matrix2cd> ops(static_cast<std::size_t>(length), pauli_matrix(Pauli::I));
    ops[static_cast<std::size_t>(r - 1)] = pauli_matrix(which);
    auto w = product_mpo(ops);
    // A single site carrying a unit-norm operator is already canonical.
    w.set_ortho_center(r);
    return w;
}

void move_center(MatrixProductOperator &w, int center) {
    check_site(w, center, "move_center");
    if(!w.ortho_center()) {
        for(int k = 1; k < center; ++k) shift_center_right(w, k);
        for(int k = w.length(); k > center; --k) shift_center_left(w, k);
    } else {
        for(int k = *w.ortho_center(); k < center; ++k) shift_center_right(w, k);
        for(int k = *w.ortho_center(); k > center; --k) shift_center_left(w, k);
    }
    w.set_ortho_center(center);
}

MatrixProductOperator canonicalize(MatrixProductOperator w, int center) {
    move_center(w, center);
    return w;
}

double canonical_defect(const MatrixProductOperator &w) {
    if(!w.ortho_center()) return std::numeric_limits<double>::infinity();
    const int c = *w.ortho_center();
    double worst = 0.0;
    for(int k = 1; k < c; ++k) {
        const CMatrix m = as_left_matrix(w.site(k));
        const CMatrix g = m.adjoint() * m / 2.0;
        worst = std::max(worst, (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    }
    for(int k = c + 1; k <= w.length(); ++k) {
        const CMatrix m = as_right_matrix(w.site(k));
        const CMatrix g = m * m.adjoint() / 2.0;
        worst = std::max(worst, (g - CMatrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff());
    }
    return worst;
}

TransferEnvironments::TransferEnvironments(const MatrixProductOperator &w) : w_(w) {
    const int L = w.length();
    left_.resize(static_cast<std::size_t>(L + 1));
    right_.resize(static_cast<std::size_t>(L + 1));
    left_[0] = CMatrix::Ones(1, 1);
    for(int k = 1; k <= L; ++k) {
        const auto &t = w.site(k);
        CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(t.dim(3)), static_cast<Eigen::Index>(t.dim(3)));
        const CMatrix &prev = left_[static_cast<std::size_t>(k - 1)];
        for(int p = 0; p < 4; ++p) {
            const auto a = slice(t, p);
            acc.noalias() += a.adjoint() * (prev * a);
        }
        left_[static_cast<std::size_t>(k)] = acc / 2.0;
    }
    right_[static_cast<std::size_t>(L)] = CMatrix::Ones(1, 1);
    for(int k = L; k >= 1; --k) {
        const auto &t = w.site(k);
        CMatrix acc = CMatrix::Zero(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(0)));
        const CMatrix &next = right_[static_cast<std::size_t>(k)];
        for(int p = 0; p < 4; ++p) {
            const auto b = slice(t, p);
            acc.noalias() += b.conjugate() * (next * b.transpose());
        }
        right_[static_cast<std::size_t>(k - 1)] = acc / 2.0;
    }
}

double TransferEnvironments::norm_squared() const { return std::max(0.0, left_.back()(0, 0).real()); }

cplx TransferEnvironments::site_expectation(int r, const Eigen::Matrix4cd &superop) const {
    check_site(w_, r, "site_expectation");
    const auto &t = w_.site(r);
    const CMatrix &env_l = left_[static_cast<std::size_t>(r - 1)];
    const CMatrix &env_r = right_[static_cast<std::size_t>(r)];
    cplx acc{0.0, 0.0};
    for(int p = 0; p < 4; ++p) {
        CMatrix image = CMatrix::Zero(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(3)));
        for(int q = 0; q < 4; ++q)
            if(superop(p, q) != cplx{0.0, 0.0}) image += superop(p, q) * slice(t, q);
        const CMatrix x = slice(t, p).adjoint() * env_l * image;
        acc += x.cwiseProduct(env_r).sum();
    }
    return acc / 2.0;
}

double TransferEnvironments::site_image_norm_squared(int r, const Eigen::Matrix4cd &superop) const {
    check_site(w_, r, "site_image_norm_squared");
    const auto &t = w_.site(r);
    const CMatrix &env_l = left_[static_cast<std::size_t>(r - 1)];
    const CMatrix &env_r = right_[static_cast<std::size_t>(r)];
    double acc = 0.0;
    for(int p = 0; p < 4; ++p) {
        CMatrix image = CMatrix::Zero(static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.dim(3)));
        for(int q = 0; q < 4; ++q)
            if(superop(p, q) != cplx{0.0, 0.0}) image += superop(p, q) * slice(t, q);
        const CMatrix x = image.adjoint() * env_l * image;
        acc += x.cwiseProduct(env_r).sum().real();
    }
    return std::max(0.0, acc / 2.0);
}

Eigen::Matrix4cd conjugation_superop(const Eigen::Matrix2cd &o) {
    // (O W O)[out, in] = sum_{a,b} O[out, a] W[a, b] O[b, in]
    Eigen::Matrix4cd s;
    for(int out = 0; out < 2; ++out)
        for(int in = 0; in < 2; ++in)
            for(int a = 0; a < 2; ++a)
                for(int b = 0; b < 2; ++b) s(2 * out + in, 2 * a + b) = o(out, a) * o(b, in);
    return s;
}

double operator_norm(const MatrixProductOperator &w) { return std::sqrt(TransferEnvironments(w).norm_squared()); }

cplx expectation_local_superop(const MatrixProductOperator &w, int r_probe, const Eigen::Matrix2cd &o) {
    check_site(w, r_probe, "expectation_local_superop");
    const TransferEnvironments env(w);
    const double nrm = env.norm_squared();
    if(!(nrm > 0.0)) throw MpoError("expectation_local_superop: zero-norm operator");
    return env.site_expectation(r_probe, conjugation_superop(o)) / nrm;
}

CutEntanglement entropies_from_singular_values(const std::vector<double> &singular_values) {
    CutEntanglement out;
    double smax = 0.0;
    for(double s : singular_values) smax = std::max(smax, s);
    if(!(smax > 0.0)) throw MpoError("entanglement of a zero-norm operator is undefined");
    double total = 0.0;
    for(double s : singular_values)
        if(s >= kSchmidtFloor * smax) {
            out.spectrum.push_back(s * s);
            total += s * s;
        }
    std::sort(out.spectrum.begin(), out.spectrum.end(), std::greater<>{});
    double purity = 0.0;
    for(auto &w : out.spectrum) {
        w /= total;
        if(w > 0.0) out.s_vn -= w * std::log(w);
        purity += w * w;
    }
    out.s_renyi2 = -std::log(purity);
    if(out.spectrum.size() == 1) out.s_vn = out.s_renyi2 = 0.0;
    return out;
}

CutEntanglement entanglement_at_cut(const MatrixProductOperator &w, int x) {
    if(x < 1 || x > w.length() - 1) throw MpoError("entanglement_at_cut: bond index out of range");
    auto v = canonicalize(w, x);
    Eigen::BDCSVD<CMatrix> svd(as_left_matrix(v.site(x)));
    const RVector &s = svd.singularValues();
    return entropies_from_singular_values(std::vector<double>(s.data(), s.data() + s.size()));
}

std::vector<CutEntanglement> entanglement_all_cuts(const MatrixProductOperator &w) {
    std::vector<CutEntanglement> out;
    if(w.length() < 2) return out;
    auto v = canonicalize(w, 1);
    for(int x = 1; x < v.length(); ++x) {
        auto f = svd_truncate_matrix(as_left_matrix(v.site(x)), 1u << 30, 0.0);
        out.push_back(entropies_from_singular_values(f.s));
        v.site(x) = site_from_left_matrix(kSqrt2 * f.u);
        CMatrix sv = f.vh;
        for(Eigen::Index k = 0; k < sv.rows(); ++k) sv.row(k) *= f.s[static_cast<std::size_t>(k)] / kSqrt2;
        v.site(x + 1) = site_from_right_matrix(sv * as_right_matrix(v.site(x + 1)));
    }
    return out;
}

CMatrix mpo_to_dense(const MatrixProductOperator &w) {
    const int L = w.length();
    if(L > kMaxDenseLength)
        throw MpoError("mpo_to_dense: L = " + std::to_string(L) + " exceeds the dense limit of " +
                       std::to_string(kMaxDenseLength));
    // cur holds [(O, I), b] with O, I the out/in multi-indices of the sites so far.
    std::size_t dimk = 1, bond = 1;
    std::vector<cplx> cur(1, cplx{1.0, 0.0});
    for(int k = 1; k <= L; ++k) {
        const auto &t = w.site(k);
        const std::size_t br = t.dim(3);
        const std::size_t nd = dimk * 2;
        std::vector<cplx> next(nd * nd * br, cplx{0.0, 0.0});
        for(std::size_t o_prev = 0; o_prev < dimk; ++o_prev)
            for(std::size_t i_prev = 0; i_prev < dimk; ++i_prev) {
                const cplx *c = &cur[(o_prev * dimk + i_prev) * bond];
                for(std::size_t b = 0; b < bond; ++b) {
                    if(c[b] == cplx{0.0, 0.0}) continue;
                    for(std::size_t o = 0; o < 2; ++o)
                        for(std::size_t i = 0; i < 2; ++i) {
                            const cplx *a = &t.data()[((b * 2 + o) * 2 + i) * br];
                            cplx *dst = &next[((o_prev * 2 + o) * nd + (i_prev * 2 + i)) * br];
                            for(std::size_t bn = 0; bn < br; ++bn) dst[bn] += c[b] * a[bn];
                        }
                }
            }
        cur = std::move(next);
        dimk = nd;
        bond = br;
    }
    return Eigen::Map<const RowMajorCMatrix>(cur.data(), static_cast<Eigen::Index>(dimk),
                                             static_cast<Eigen::Index>(dimk));
}

MatrixProductOperator mpo_from_dense(const CMatrix &dense, int length, std::size_t chi_max, double eps_rel) {
    if(length < 1 || length > kMaxDenseLength) throw MpoError("mpo_from_dense: unsupported length");
    const std::size_t dim = std::size_t{1} << length;
    if(static_cast<std::size_t>(dense.rows()) != dim || static_cast<std::size_t>(dense.cols()) != dim)
        throw MpoError("mpo_from_dense: matrix size does not match 2^L");

    // Interleave to (o1 i1 o2 i2 ... oL iL), site 1 most significant.
    std::vector<cplx> state(dim * dim);
    for(std::size_t o = 0; o < dim; ++o)
        for(std::size_t i = 0; i < dim; ++i) {
            std::size_t idx = 0;
            for(int k = length - 1; k >= 0; --k) {
                idx = idx * 4 + 2 * ((o >> k) & 1u) + ((i >> k) & 1u);
            }
            state[idx] = dense(static_cast<Eigen::Index>(o), static_cast<Eigen::Index>(i));
        }

    std::vector<DenseTensor> sites;
    std::size_t bl = 1;
    std::size_t rest = dim * dim;
    CMatrix remainder = Eigen::Map<const RowMajorCMatrix>(state.data(), 1, static_cast<Eigen::Index>(rest));
    for(int k = 1; k < length; ++k) {
        rest /= 4;
        const RowMajorCMatrix rm = remainder;
        const CMatrix m = Eigen::Map<const RowMajorCMatrix>(rm.data(), static_cast<Eigen::Index>(bl * 4),
                                                            static_cast<Eigen::Index>(rest));
        auto f = svd_truncate_matrix(m, chi_max, eps_rel);
        sites.push_back(site_from_left_matrix(kSqrt2 * f.u));
        remainder = f.vh;
        for(Eigen::Index r = 0; r < remainder.rows(); ++r) remainder.row(r) *= f.s[static_cast<std::size_t>(r)] / kSqrt2;
        bl = f.s.size();
    }
    const RowMajorCMatrix rm = remainder;
    DenseTensor last({bl, 2, 2, 1}, std::vector<cplx>(rm.data(), rm.data() + rm.size()));
    sites.push_back(std::move(last));
    return MatrixProductOperator(std::move(sites), length);
}

MatrixProductOperator mpo_product(const MatrixProductOperator &a, const MatrixProductOperator &b) {
    if(a.length() != b.length()) throw MpoError("mpo_product: length mismatch");
    std::vector<DenseTensor> sites;
    for(int k = 1; k <= a.length(); ++k) {
        const auto &x = a.site(k);
        const auto &y = b.site(k);
        const std::size_t la = x.dim(0), ra = x.dim(3), lb = y.dim(0), rb = y.dim(3);
        DenseTensor t({la * lb, 2, 2, ra * rb});
        for(std::size_t a0 = 0; a0 < la; ++a0)
            for(std::size_t b0 = 0; b0 < lb; ++b0)
                for(std::size_t o = 0; o < 2; ++o)
                    for(std::size_t i = 0; i < 2; ++i)
                        for(std::size_t a1 = 0; a1 < ra; ++a1)
                            for(std::size_t b1 = 0; b1 < rb; ++b1) {
                                cplx s{0.0, 0.0};
                                for(std::size_t m = 0; m < 2; ++m) s += x({a0, o, m, a1}) * y({b0, m, i, b1});
                                t({a0 * lb + b0, o, i, a1 * rb + b1}) = s;
                            }
        sites.push_back(std::move(t));
    }
    return MatrixProductOperator(std::move(sites));
}

namespace {

template <typename T> void put_le(std::ostream &out, T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(value);
    char bytes[sizeof(T)];
    for(std::size_t k = 0; k < sizeof(T); ++k) bytes[k] = static_cast<char>((u >> (8 * k)) & 0xffu);
    out.write(bytes, sizeof(T));
}

void put_f64(std::ostream &out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

template <typename T> T get_le(std::istream &in) {
    char bytes[sizeof(T)];
    if(!in.read(bytes, sizeof(T))) throw MpoError("snapshot: unexpected end of data");
    using U = std::make_unsigned_t<T>;
    U u = 0;
    for(std::size_t k = 0; k < sizeof(T); ++k) u |= static_cast<U>(static_cast<unsigned char>(bytes[k])) << (8 * k);
    return static_cast<T>(u);
}

double get_f64(std::istream &in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

} // namespace

void write_snapshot(const MatrixProductOperator &w, std::ostream &out) {
    out.write(kSnapshotMagic.data(), kSnapshotMagic.size());
    put_le<std::uint32_t>(out, kSnapshotVersion);
    put_le<std::uint64_t>(out, static_cast<std::uint64_t>(w.length()));
    put_le<std::int64_t>(out, w.ortho_center() ? *w.ortho_center() : -1);
    for(auto d : w.bond_dims()) put_le<std::uint64_t>(out, d);
    for(const auto &t : w.site_tensors())
        for(const auto &v : t.data()) {
            put_f64(out, v.real());
            put_f64(out, v.imag());
        }
    if(!out) throw MpoError("snapshot: write failed");
}

MatrixProductOperator read_snapshot(std::istream &in) {
    std::array<char, 4> magic{};
    if(!in.read(magic.data(), magic.size()) || magic != kSnapshotMagic) throw MpoError("snapshot: bad magic header");
    const auto version = get_le<std::uint32_t>(in);
    if(version != kSnapshotVersion) throw MpoError("snapshot: unsupported version " + std::to_string(version));
    const auto L = get_le<std::uint64_t>(in);
    if(L == 0 || L > 100000) throw MpoError("snapshot: implausible length");
    const auto center = get_le<std::int64_t>(in);
    std::vector<std::size_t> bonds(L + 1);
    for(auto &b : bonds) {
        b = get_le<std::uint64_t>(in);
        if(b == 0 || b > (1u << 20)) throw MpoError("snapshot: implausible bond dimension");
    }
    std::vector<DenseTensor> sites;
    sites.reserve(L);
    for(std::size_t k = 0; k < L; ++k) {
        DenseTensor t({bonds[k], 2, 2, bonds[k + 1]});
        for(auto &v : t.data()) {
            const double re = get_f64(in);
            const double im = get_f64(in);
            v = cplx{re, im};
        }
        sites.push_back(std::move(t));
    }
    std::optional<int> c;
    if(center >= 0) c = static_cast<int>(center);
    return MatrixProductOperator(std::move(sites), c);
}

void write_snapshot_file(const MatrixProductOperator &w, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if(!out) throw MpoError("snapshot: cannot open " + path.string() + " for writing");
    write_snapshot(w, out);
}

MatrixProductOperator read_snapshot_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if(!in) throw MpoError("snapshot: cannot open " + path.string());
    return read_snapshot(in);
}

} // namespace mpotoc
