#include "mpotoc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mpotoc {

namespace {

std::size_t product(const std::vector<std::size_t> &dims) {
    return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

void check_extents(const std::vector<std::size_t> &dims) {
    for(auto d : dims)
        if(d == 0) throw TensorError("tensor extents must be >= 1");
}

std::vector<std::size_t> row_major_strides(const std::vector<std::size_t> &dims) {
    std::vector<std::size_t> strides(dims.size(), 1);
    for(std::size_t k = dims.size(); k-- > 1;) strides[k - 1] = strides[k] * dims[k];
    return strides;
}

} // namespace

DenseTensor::DenseTensor() : data_(1, cplx{0.0, 0.0}) {}

DenseTensor::DenseTensor(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    check_extents(dims_);
    data_.assign(product(dims_), cplx{0.0, 0.0});
}

DenseTensor::DenseTensor(std::vector<std::size_t> dims, std::vector<cplx> data)
    : dims_(std::move(dims)), data_(std::move(data)) {
    check_extents(dims_);
    if(product(dims_) != data_.size())
        throw TensorError("tensor data length " + std::to_string(data_.size()) + " does not match dims product " +
                          std::to_string(product(dims_)));
}

std::size_t DenseTensor::offset(std::initializer_list<std::size_t> index) const {
    if(index.size() != dims_.size()) throw TensorError("index rank does not match tensor rank");
    std::size_t off = 0;
    std::size_t k = 0;
    for(auto i : index) {
        if(i >= dims_[k]) throw TensorError("tensor index out of range");
        off = off * dims_[k] + i;
        ++k;
    }
    return off;
}

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> dims) const & {
    DenseTensor copy = *this;
    return std::move(copy).reshaped(std::move(dims));
}

DenseTensor DenseTensor::reshaped(std::vector<std::size_t> dims) && {
    check_extents(dims);
    if(product(dims) != data_.size()) throw TensorError("reshape changes the element count");
    dims_ = std::move(dims);
    return std::move(*this);
}

DenseTensor DenseTensor::permuted(const std::vector<std::size_t> &perm) const {
    const std::size_t n = rank();
    if(perm.size() != n) throw TensorError("permutation rank mismatch");
    std::vector<bool> seen(n, false);
    for(auto p : perm) {
        if(p >= n || seen[p]) throw TensorError("invalid axis permutation");
        seen[p] = true;
    }
    std::vector<std::size_t> new_dims(n);
    for(std::size_t k = 0; k < n; ++k) new_dims[k] = dims_[perm[k]];
    if(n == 0) return *this;

    const auto old_strides = row_major_strides(dims_);
    std::vector<std::size_t> src_strides(n);
    for(std::size_t k = 0; k < n; ++k) src_strides[k] = old_strides[perm[k]];

    DenseTensor out(new_dims);
    std::vector<std::size_t> counter(n, 0);
    std::size_t src = 0;
    for(std::size_t dst = 0; dst < out.data_.size(); ++dst) {
        out.data_[dst] = data_[src];
        for(std::size_t k = n; k-- > 0;) {
            if(++counter[k] < new_dims[k]) {
                src += src_strides[k];
                break;
            }
            src -= src_strides[k] * (new_dims[k] - 1);
            counter[k] = 0;
        }
    }
    return out;
}

DenseTensor &DenseTensor::operator*=(cplx factor) {
    for(auto &v : data_) v *= factor;
    return *this;
}

DenseTensor operator*(cplx factor, DenseTensor t) {
    t *= factor;
    return t;
}

bool DenseTensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx &v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

double DenseTensor::frobenius_norm() const {
    double s = 0.0;
    for(const auto &v : data_) s += std::norm(v);
    return std::sqrt(s);
}

CMatrix DenseTensor::to_matrix() const {
    if(rank() != 2) throw TensorError("to_matrix requires a rank-2 tensor");
    return Eigen::Map<const RowMajorCMatrix>(data_.data(), static_cast<Eigen::Index>(dims_[0]),
                                             static_cast<Eigen::Index>(dims_[1]));
}

DenseTensor DenseTensor::from_matrix(const CMatrix &m) {
    DenseTensor t({static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols())});
    Eigen::Map<RowMajorCMatrix>(t.data_.data(), m.rows(), m.cols()) = m;
    return t;
}

DenseTensor contract(const DenseTensor &a, const DenseTensor &b,
                     const std::vector<std::pair<std::size_t, std::size_t>> &index_pairs) {
    std::vector<bool> a_paired(a.rank(), false), b_paired(b.rank(), false);
    for(const auto &[ia, ib] : index_pairs) {
        if(ia >= a.rank() || ib >= b.rank()) throw TensorError("contract: axis out of range");
        if(a_paired[ia] || b_paired[ib]) throw TensorError("contract: axis paired twice");
        if(a.dim(ia) != b.dim(ib)) throw TensorError("contract: paired extents differ");
        a_paired[ia] = b_paired[ib] = true;
    }

    std::vector<std::size_t> a_perm, b_perm, out_dims;
    std::size_t free_a = 1, free_b = 1, shared = 1;
    for(std::size_t k = 0; k < a.rank(); ++k)
        if(!a_paired[k]) {
            a_perm.push_back(k);
            out_dims.push_back(a.dim(k));
            free_a *= a.dim(k);
        }
    for(const auto &[ia, ib] : index_pairs) {
        a_perm.push_back(ia);
        b_perm.push_back(ib);
        shared *= a.dim(ia);
    }
    for(std::size_t k = 0; k < b.rank(); ++k)
        if(!b_paired[k]) {
            b_perm.push_back(k);
            out_dims.push_back(b.dim(k));
            free_b *= b.dim(k);
        }

    const DenseTensor ap = a.permuted(a_perm);
    const DenseTensor bp = b.permuted(b_perm);
    using Map = Eigen::Map<const RowMajorCMatrix>;
    Map am(ap.data().data(), static_cast<Eigen::Index>(free_a), static_cast<Eigen::Index>(shared));
    Map bm(bp.data().data(), static_cast<Eigen::Index>(shared), static_cast<Eigen::Index>(free_b));

    DenseTensor out = out_dims.empty() ? DenseTensor() : DenseTensor(out_dims);
    Eigen::Map<RowMajorCMatrix>(out.data().data(), static_cast<Eigen::Index>(free_a),
                                static_cast<Eigen::Index>(free_b))
        .noalias() = am * bm;
    return out;
}

MatrixSvd svd_truncate_matrix(const CMatrix &m, std::size_t chi_max, double eps_rel) {
    if(chi_max == 0) throw TensorError("svd_truncate: chi_max must be >= 1");
    if(eps_rel < 0.0) throw TensorError("svd_truncate: eps_rel must be non-negative");
    if(!m.allFinite()) throw NonFiniteError("svd_truncate: non-finite matrix entries");

    Eigen::BDCSVD<CMatrix> bdc(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    CMatrix mu, mv;
    RVector sv;
    if(bdc.info() == Eigen::Success && bdc.singularValues().allFinite() && bdc.matrixU().allFinite() &&
       bdc.matrixV().allFinite()) {
        sv = bdc.singularValues();
        mu = bdc.matrixU();
        mv = bdc.matrixV();
    } else {
        // BDCSVD deflation can break down on highly degenerate spectra
        Eigen::JacobiSVD<CMatrix> jac(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        sv = jac.singularValues();
        mu = jac.matrixU();
        mv = jac.matrixV();
        if(!sv.allFinite() || !mu.allFinite() || !mv.allFinite())
            throw NonFiniteError("svd_truncate: decomposition produced non-finite entries");
    }
    const auto full = static_cast<std::size_t>(sv.size());

    std::size_t keep = std::min(full, chi_max);
    if(full > 0) {
        const double cutoff = eps_rel * sv(0);
        while(keep > 1 && sv(static_cast<Eigen::Index>(keep - 1)) < cutoff) --keep;
    }

    MatrixSvd out;
    const double total = sv.squaredNorm();
    double dropped = 0.0;
    for(std::size_t k = keep; k < full; ++k) dropped += sv(static_cast<Eigen::Index>(k)) * sv(static_cast<Eigen::Index>(k));
    out.discarded_weight = total > 0.0 ? std::clamp(dropped / total, 0.0, 1.0) : 0.0;

    const auto k = static_cast<Eigen::Index>(keep);
    out.u = mu.leftCols(k);
    out.vh = mv.leftCols(k).adjoint();
    out.s.assign(sv.data(), sv.data() + keep);

    for(Eigen::Index c = 0; c < k; ++c) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for(Eigen::Index r = 0; r < out.u.rows(); ++r) {
            const double a = std::abs(out.u(r, c));
            if(a > best * (1.0 + 1e-12)) {
                best = a;
                arg = r;
            }
        }
        if(best <= 0.0) continue;
        const cplx phase = out.u(arg, c) / best;
        out.u.col(c) *= std::conj(phase);
        out.vh.row(c) *= phase;
    }
    return out;
}

SvdFactorization svd_truncate(const DenseTensor &m, std::size_t chi_max, double eps_rel) {
    if(m.rank() != 2) throw TensorError("svd_truncate: input must have exactly 2 axes");
    if(!m.all_finite()) throw NonFiniteError("svd_truncate: non-finite matrix entries");
    auto res = svd_truncate_matrix(m.to_matrix(), chi_max, eps_rel);
    return SvdFactorization{DenseTensor::from_matrix(res.u), std::move(res.s), DenseTensor::from_matrix(res.vh),
                            res.discarded_weight};
}

ThinQr qr_positive(const CMatrix &m) {
    const Eigen::Index rows = m.rows(), cols = m.cols();
    const Eigen::Index k = std::min(rows, cols);
    Eigen::HouseholderQR<CMatrix> qr(m);
    ThinQr out;
    out.q = qr.householderQ() * CMatrix::Identity(rows, k);
    out.r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for(Eigen::Index d = 0; d < k; ++d) {
        const double a = std::abs(out.r(d, d));
        if(a == 0.0) continue;
        const cplx phase = out.r(d, d) / a;
        out.q.col(d) *= phase;
        out.r.row(d) *= std::conj(phase);
        out.r(d, d) = a;
    }
    return out;
}

double hermiticity_defect(const CMatrix &h) {
    if(h.rows() != h.cols()) throw TensorError("matrix is not square");
    return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

CMatrix exp_i_hermitian(const CMatrix &h, double theta) {
    if(h.rows() != h.cols()) throw TensorError("exp_i_hermitian: matrix is not square");
    if(!h.allFinite()) throw NonFiniteError("exp_i_hermitian: non-finite entries");
    if(h.size() == 0) return h;
    const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
    if(hermiticity_defect(h) > 1e-12 * scale) throw TensorError("exp_i_hermitian: matrix is not Hermitian");

    const CMatrix hs = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(hs);
    const RVector &ev = eig.eigenvalues();
    Eigen::VectorXcd phases(ev.size());
    for(Eigen::Index k = 0; k < ev.size(); ++k) phases(k) = std::polar(1.0, theta * ev(k));
    const CMatrix &v = eig.eigenvectors();
    return v * phases.asDiagonal() * v.adjoint();
}

} // namespace mpotoc
