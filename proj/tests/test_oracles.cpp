#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "mpotoc/evolution.hpp"
#include "mpotoc/oracles.hpp"
#include "test_util.hpp"

using namespace mpotoc;
using namespace testutil;
using big = boost::multiprecision::cpp_bin_float_100;

namespace {

HamiltonianSpec ising(int L, double hx, double hz, bool norm) {
    HamiltonianSpec s;
    s.model = hz == 0.0 ? Model::transverse_field_ising : Model::mixed_field_ising;
    s.hx = hx;
    s.hz = hz;
    s.normalize_e0 = norm;
    s.length = L;
    return s;
}

// Power series sum_k (-1)^k (x/2)^{2k+n} / (k! (n+k)!) in 100-digit arithmetic.
double bessel_series(int n, double xd) {
    const big x = xd, half = x / 2, h2 = half * half;
    big term = 1;
    for(int k = 1; k <= n; ++k) term *= half / k;
    big sum = term;
    for(int k = 1; k < 2000; ++k) {
        term *= -h2 / (big(k) * big(n + k));
        sum += term;
        if(abs(term) < 1e-60 * abs(sum) && k > xd) break;
    }
    return static_cast<double>(sum);
}

double airy_series(double zd) {
    using boost::multiprecision::cbrt;
    using boost::multiprecision::pow;
    using boost::multiprecision::tgamma;
    const big z = zd, z3 = z * z * z;
    const big c1 = 1 / (pow(big(3), big(2) / 3) * tgamma(big(2) / 3));
    const big c2 = 1 / (pow(big(3), big(1) / 3) * tgamma(big(1) / 3));
    big a = 1, b = z, f = 0, g = 0;
    for(int k = 0; k < 300; ++k) {
        f += a;
        g += b;
        a *= z3 / ((3 * k + 2) * (3 * k + 3));
        b *= z3 / ((3 * k + 3) * (3 * k + 4));
    }
    return static_cast<double>(c1 * f - c2 * g);
}

} // namespace

TEST_CASE("dense Hamiltonian matches bond terms and Pauli strings") {
    auto s = ising(6, 1.05, 0.5, true);
    const CMatrix h = dense_hamiltonian(s).cast<cplx>();
    CHECK(max_abs(h - dense_ising(6, 1.0, 1.05, 0.5, s.prefactor())) < 1e-13);
    HamiltonianSpec hb;
    hb.model = Model::heisenberg_xxx;
    hb.length = 5;
    CMatrix direct = CMatrix::Zero(32, 32);
    for(int r = 1; r < 5; ++r)
        for(Pauli p : {Pauli::X, Pauli::Y, Pauli::Z}) direct += dense_pauli(5, r, p) * dense_pauli(5, r + 1, p);
    CHECK(max_abs(dense_hamiltonian(hb).cast<cplx>() - direct) < 1e-14);
    CHECK(max_abs(dense_pauli(3, 2, Pauli::Y) - lift(pauli_matrix(Pauli::Y), 3, 2)) == 0.0);
    CHECK_THROWS_AS((void)dense_hamiltonian(ising(13, 1.0, 0.0, false)), OracleError);
}

TEST_CASE("ED spectral decomposition and propagator") {
    auto s = ising(7, 1.05, 0.5, true);
    auto eig = ed_diagonalize(s);
    const Eigen::MatrixXd &v = eig.eigenvectors;
    const Eigen::MatrixXd h = dense_hamiltonian(s);
    CHECK((v * eig.eigenvalues.asDiagonal() * v.transpose() - h).cwiseAbs().maxCoeff() < 1e-10);
    for(Eigen::Index k = 1; k < eig.eigenvalues.size(); ++k) CHECK(eig.eigenvalues(k) >= eig.eigenvalues(k - 1));
    Eigen::VectorXcd ph(v.rows());
    for(Eigen::Index k = 0; k < v.rows(); ++k) ph(k) = std::polar(1.0, 1.7 * eig.eigenvalues(k));
    const CMatrix u = v.cast<cplx>() * ph.asDiagonal() * v.transpose().cast<cplx>();
    CHECK(max_abs(u * u.adjoint() - CMatrix::Identity(v.rows(), v.rows())) < 1e-10);

    EdSystem sys(s);
    const CMatrix w = sys.heisenberg_operator(3, Pauli::X, 0.8);
    CHECK(max_abs(w - heisenberg_picture(h.cast<cplx>(), dense_pauli(7, 3, Pauli::X), 0.8)) < 1e-10);
}

TEST_CASE("ed_otoc") {
    auto s = ising(8, 1.05, 0.5, true);
    auto c0 = ed_otoc(s, 4, 6, Pauli::X, {0.0});
    CHECK(std::abs(c0[0]) < 1e-12);
    auto same = ed_otoc(s, 4, 4, Pauli::Z, {0.0});
    CHECK(same[0] == doctest::Approx(4.0).epsilon(1e-13));

    auto classical = ising(8, 0.0, 0.0, false);
    classical.model = Model::mixed_field_ising;
    auto cc = ed_otoc(classical, 4, 6, Pauli::X, {0.3, 1.0, 7.0});
    for(double c : cc) CHECK(std::abs(c) < 1e-12);

    EdSystem sys(s);
    const std::vector<int> probes{1, 3, 4, 5, 8};
    auto fwd = sys.otoc_grid(4, Pauli::X, probes, Pauli::Z, {0.7, 2.1});
    auto bwd = sys.otoc_grid(4, Pauli::X, probes, Pauli::Z, {-0.7, -2.1});
    for(std::size_t p = 0; p < probes.size(); ++p)
        for(std::size_t k = 0; k < 2; ++k) CHECK(std::abs(fwd[p][k] - bwd[p][k]) < 1e-10);

    // Commutator-norm definition with dense matrices.
    const CMatrix w = sys.heisenberg_operator(4, Pauli::X, 1.3);
    for(Pauli q : {Pauli::X, Pauli::Y, Pauli::Z}) {
        auto row = sys.otoc_row(w, probes, q);
        for(std::size_t p = 0; p < probes.size(); ++p) {
            const CMatrix v = dense_pauli(8, probes[p], q);
            const CMatrix comm = w * v - v * w;
            const double direct = (comm.adjoint() * comm).trace().real() / 256.0;
            CHECK(std::abs(row[p] - direct) < 1e-10);
        }
    }
}

TEST_CASE("ed_operator_entanglement") {
    auto s = ising(8, 1.05, 0.5, true);
    auto e0 = ed_operator_entanglement(s, 4, 5, 0.0);
    CHECK(e0.s_vn == 0.0);
    CHECK(e0.s_renyi2 == 0.0);

    EdSystem sys(s);
    const CMatrix w = sys.heisenberg_operator(4, Pauli::X, 1.5);
    auto mpo = mpo_from_dense(w, 8);
    for(int cut = 1; cut < 8; ++cut) {
        auto d = dense_operator_entanglement(w, 8, cut);
        auto m = entanglement_at_cut(mpo, cut);
        CHECK(std::abs(d.s_vn - m.s_vn) < 1e-8);
        CHECK(std::abs(d.s_renyi2 - m.s_renyi2) < 1e-8);
    }

    auto tfi = ising(8, 1.05, 0.0, true);
    EdSystem tsys(tfi);
    for(double t : {0.5, 2.0, 5.0, 10.0}) {
        const CMatrix wt = tsys.heisenberg_operator(4, Pauli::X, t);
        for(int cut = 1; cut < 8; ++cut) CHECK(dense_operator_entanglement(wt, 8, cut).s_vn <= std::log(4.0) + 1e-6);
    }
    CHECK_THROWS_AS((void)ed_operator_entanglement(ising(11, 1.0, 0.0, false), 4, 5, 0.0), OracleError);
}

TEST_CASE("bessel_j") {
    CHECK(bessel_j(0, 0.0) == 1.0);
    CHECK(bessel_j(3, 0.0) == 0.0);
    for(double x : {1.0, 10.0, 100.0}) {
        const auto seq = bessel_j_sequence(static_cast<int>(x) + 80, x);
        double s = seq[0];
        for(std::size_t k = 2; k < seq.size(); k += 2) s += 2.0 * seq[k];
        CHECK(std::abs(s - 1.0) < 1e-12);
    }
    const double ref = bessel_series(5, 7.0);
    CHECK(std::abs(bessel_j(5, 7.0) - ref) < 1e-12 * std::abs(ref));
    for(auto [n, x] : std::vector<std::pair<int, double>>{{0, 2.5}, {10, 100.0}, {200, 150.0}, {60, 70.0}, {400, 380.0}}) {
        const double r = bessel_series(n, x);
        CHECK(std::abs(bessel_j(n, x) - r) < 1e-12 * std::abs(r));
    }
    const double h = 1e-5;
    const double fd = (bessel_j(7, 9.0 + h) - bessel_j(7, 9.0 - h)) / (2 * h);
    CHECK(std::abs(bessel_j_prime(7, 9.0) - fd) < 1e-8);
    CHECK(bessel_j_prime(0, 3.0) == doctest::Approx(-bessel_j(1, 3.0)));
    CHECK_THROWS_AS((void)bessel_j(2001, 1.0), OracleError);
    CHECK_THROWS_AS((void)bessel_j(1, 5001.0), OracleError);
    CHECK_THROWS_AS((void)bessel_j(-1, 1.0), OracleError);
}

TEST_CASE("airy_ai") {
    CHECK(std::abs(airy_ai(0.0) - airy_series(0.0)) < 1e-15);
    CHECK(std::abs(airy_ai(0.0) - 0.3550280539) < 1e-10);
    for(double z : {-8.0, -5.5, -2.0, 1.0, 4.0, 8.0}) CHECK(std::abs(airy_ai(z) - airy_series(z)) < 1e-10);
    const double h = 1e-3;
    for(double z : {-2.0, 0.0, 2.0}) {
        const double d2 = (airy_ai(z + h) - 2 * airy_ai(z) + airy_ai(z - h)) / (h * h);
        CHECK(std::abs(d2 - z * airy_ai(z)) < 1e-6);
    }
    double lo = -2.5, hi = -2.2;
    REQUIRE(airy_ai(lo) * airy_ai(hi) < 0.0);
    for(int k = 0; k < 60; ++k) {
        const double mid = 0.5 * (lo + hi);
        (airy_ai(lo) * airy_ai(mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(std::abs(lo + 2.338107410459767) < 1e-9);
    CHECK_THROWS_AS((void)airy_ai(8.5), OracleError);
}

TEST_CASE("free fermion amplitudes") {
    FreeFermionSpec spec;
    auto a0 = free_fermion_amplitudes(spec, 0, 0.0);
    CHECK(std::abs(a0.u - 1.0) < 1e-14);
    CHECK(std::abs(a0.v) < 1e-14);
    auto a3 = free_fermion_amplitudes(spec, 3, 0.0);
    CHECK(std::abs(a3.u) < 1e-14);
    CHECK(free_fermion_otoc(spec, 0, 0.0) == doctest::Approx(0.0));
    CHECK(free_fermion_otoc(spec, 4, 0.0) == doctest::Approx(0.0));

    for(double t : {1.0, 5.0, 20.0})
        for(int x : {-7, -1, 0, 1, 2, 5, 12, 25}) {
            auto q = free_fermion_amplitudes(spec, x, t);
            auto c = free_fermion_amplitudes_critical(x, t);
            CHECK(std::abs(q.u - c.u) < 1e-9);
            CHECK(std::abs(q.v - c.v) < 1e-9);
            CHECK(std::abs(std::abs(q.u) - std::abs(cplx(bessel_j(2 * std::abs(x), 2 * t), bessel_j_prime(2 * std::abs(x), 2 * t)))) < 1e-9);
        }

    for(double g : {1.0, 1.05, 0.6}) {
        FreeFermionSpec sg{g, 1024};
        double total = 0.0;
        for(int x = -200; x <= 200; ++x) {
            auto a = free_fermion_amplitudes(sg, x, 10.0);
            CHECK(std::norm(a.u) + std::norm(a.v) <= 1.0 + 1e-9);
            total += std::norm(a.u) + std::norm(a.v);
        }
        CHECK(std::abs(total - 1.0) < 1e-9);
    }

    // Halving the grid spacing leaves the result unchanged.
    FreeFermionSpec fine{1.05, 8192};
    auto coarse_a = free_fermion_amplitudes(FreeFermionSpec{1.05, 1024}, 9, 12.0);
    auto fine_a = free_fermion_amplitudes(fine, 9, 12.0);
    CHECK(std::abs(coarse_a.u - fine_a.u) < 1e-10);
    CHECK(std::abs(coarse_a.v - fine_a.v) < 1e-10);

    CHECK(free_fermion_max_velocity(1.0) == 1.0);
    CHECK(free_fermion_max_velocity(0.5) == 0.5);
    CHECK_THROWS_AS((void)free_fermion_amplitudes(FreeFermionSpec{1.0, 1000}, 1, 1.0), OracleError);
    CHECK_THROWS_AS((void)free_fermion_amplitudes(FreeFermionSpec{-1.0, 1024}, 1, 1.0), OracleError);
}

TEST_CASE("free fermion OTOC against ED of the transverse-field chain") {
    for(double g : {1.0, 1.05}) {
        auto s = ising(10, g, 0.0, false);
        EdSystem sys(s);
        FreeFermionSpec ff{g, 1024};
        const std::vector<int> probes{3, 5, 6, 7, 8};
        for(double t : {0.25, 0.5}) {
            auto row = sys.otoc_row(sys.heisenberg_operator(5, Pauli::X, t), probes, Pauli::X);
            for(std::size_t p = 0; p < probes.size(); ++p) {
                const double c = free_fermion_otoc(ff, probes[p] - 5, free_fermion_time(t, unit_2j_factor(1.0)));
                CHECK(std::abs(row[p] - c) < 1e-6);
            }
        }
    }
}

TEST_CASE("perturbative form") {
    CHECK(perturbative_form(0.0, 3.0, 0.5, 1.0) == 0.0);
    for(double x : {1.0, 5.0, 20.0, 50.0})
        for(double t : {0.5, 2.0, 9.0}) {
            const double direct = std::pow(0.5 * t, x) / std::tgamma(x + 1.0);
            CHECK(std::abs(perturbative_form(x, t, 0.5, 1.0) - std::log(direct)) < 1e-10 * std::max(1.0, std::abs(std::log(direct))));
        }
    // Early-time Bessel against its leading power, x = 50, t <= 10.
    for(double t = 0.5; t <= 10.0; t += 0.5) {
        const double lj = std::log(bessel_j(50, t));
        const double lp = perturbative_form(50.0, t, 0.5, 1.0);
        CHECK(std::abs(lj - lp) < 0.01 * std::abs(lj));
        if(t <= 1.0) CHECK(std::abs(std::exp(lj - lp) - 1.0) < 0.01);
    }
    CHECK_THROWS_AS((void)perturbative_form(3.0, 0.0, 1.0, 1.0), OracleError);
    CHECK_THROWS_AS((void)perturbative_form(3.0, 1.0, -1.0, 1.0), OracleError);
    CHECK_THROWS_AS((void)perturbative_form(2e4, 1.0, 1.0, 1.0), OracleError);
}
