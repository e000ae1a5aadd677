#pragma once

#include <random>

#include "mpotoc/mpo.hpp"

namespace testutil {

using namespace mpotoc;

inline std::mt19937_64 &rng() {
    static std::mt19937_64 gen(20240917);
    return gen;
}

inline cplx random_cplx() {
    std::normal_distribution<double> n(0.0, 1.0);
    return {n(rng()), n(rng())};
}

inline CMatrix random_matrix(Eigen::Index r, Eigen::Index c) {
    CMatrix m(r, c);
    for(Eigen::Index i = 0; i < r; ++i)
        for(Eigen::Index j = 0; j < c; ++j) m(i, j) = random_cplx();
    return m;
}

inline CMatrix random_hermitian(Eigen::Index n) {
    const CMatrix a = random_matrix(n, n);
    return 0.5 * (a + a.adjoint());
}

inline DenseTensor random_tensor(std::vector<std::size_t> dims) {
    DenseTensor t(std::move(dims));
    for(auto &v : t.data()) v = random_cplx();
    return t;
}

// Random MPO with interior bond dimension chi (clipped by the exact maximum).
inline MatrixProductOperator random_mpo(int L, std::size_t chi) {
    std::vector<DenseTensor> sites;
    std::size_t left = 1;
    for(int k = 1; k <= L; ++k) {
        std::size_t max_right = 1;
        for(int j = k + 1; j <= L && max_right < chi; ++j) max_right *= 4;
        const std::size_t right = (k == L) ? 1 : std::min(chi, max_right);
        sites.push_back(random_tensor({left, 2, 2, right}));
        left = right;
    }
    return MatrixProductOperator(std::move(sites));
}

inline double max_abs(const CMatrix &m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

} // namespace testutil

namespace testutil {

inline CMatrix kron(const CMatrix &a, const CMatrix &b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for(Eigen::Index i = 0; i < a.rows(); ++i)
        for(Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// op on site r (1-based, site 1 most significant), identity elsewhere.
inline CMatrix lift(const CMatrix &op, int L, int r) {
    CMatrix out = CMatrix::Identity(1, 1);
    for(int k = 1; k <= L; ++k) out = kron(out, k == r ? op : CMatrix(CMatrix::Identity(2, 2)));
    return out;
}

// Operator-state regrouping: rows (out, in) of sites 1..cut, columns of the rest.
inline CMatrix regroup_at_cut(const CMatrix &w, int L, int cut) {
    const Eigen::Index da = Eigen::Index{1} << cut, db = Eigen::Index{1} << (L - cut);
    CMatrix m(da * da, db * db);
    for(Eigen::Index o = 0; o < w.rows(); ++o)
        for(Eigen::Index i = 0; i < w.cols(); ++i) {
            const Eigen::Index oa = o / db, ob = o % db, ia = i / db, ib = i % db;
            m(oa * da + ia, ob * db + ib) = w(o, i);
        }
    return m;
}

inline std::pair<double, double> dense_entropies(const CMatrix &w, int L, int cut) {
    Eigen::BDCSVD<CMatrix> svd(regroup_at_cut(w, L, cut));
    RVector s = svd.singularValues();
    const double smax = s(0);
    double total = 0.0;
    for(Eigen::Index k = 0; k < s.size(); ++k)
        if(s(k) >= 1e-14 * smax) total += s(k) * s(k);
    double svn = 0.0, pur = 0.0;
    for(Eigen::Index k = 0; k < s.size(); ++k) {
        if(s(k) < 1e-14 * smax) continue;
        const double p = s(k) * s(k) / total;
        svn -= p * std::log(p);
        pur += p * p;
    }
    return {svn, -std::log(pur)};
}

} // namespace testutil

namespace testutil {

// Dense Ising chain built from Pauli strings: -s (J sum ZZ + hx sum X + hz sum Z).
inline CMatrix dense_ising(int L, double J, double hx, double hz, double s) {
    const Eigen::Index n = Eigen::Index{1} << L;
    CMatrix h = CMatrix::Zero(n, n);
    const CMatrix x = pauli_matrix(Pauli::X), z = pauli_matrix(Pauli::Z);
    for(int r = 1; r < L; ++r) h -= s * J * lift(z, L, r) * lift(z, L, r + 1);
    for(int r = 1; r <= L; ++r) h -= s * (hx * lift(x, L, r) + hz * lift(z, L, r));
    return h;
}

inline CMatrix heisenberg_picture(const CMatrix &h, const CMatrix &w, double t) {
    const CMatrix u = exp_i_hermitian(h, t);
    return u * w * u.adjoint();
}

} // namespace testutil
