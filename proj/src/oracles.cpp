#include "mpotoc/oracles.hpp"

#include <cmath>
#include <string>

namespace mpotoc {

namespace {

std::size_t dimension(int length) { return std::size_t{1} << length; }

int site_bit(std::size_t index, int length, int r) { return static_cast<int>((index >> (length - r)) & 1u); }

std::size_t site_mask(int length, int r) { return std::size_t{1} << (length - r); }

// A single-site Pauli as c * rho(a) * delta(b, a ^ flip): row a has one entry.
struct PauliAction {
    std::size_t flip = 0;
    cplx c{1.0, 0.0};
    std::vector<double> rho;
};

PauliAction pauli_action(int length, int r, Pauli p) {
    const std::size_t n = dimension(length);
    PauliAction a;
    a.rho.assign(n, 1.0);
    const std::size_t mask = site_mask(length, r);
    switch(p) {
    case Pauli::I: break;
    case Pauli::X: a.flip = mask; break;
    case Pauli::Z:
        for(std::size_t i = 0; i < n; ++i) a.rho[i] = (i & mask) ? -1.0 : 1.0;
        break;
    case Pauli::Y:
        // Y = i [[0, -1], [1, 0]]
        a.flip = mask;
        a.c = cplx{0.0, 1.0};
        for(std::size_t i = 0; i < n; ++i) a.rho[i] = (i & mask) ? 1.0 : -1.0;
        break;
    }
    return a;
}

void check_site_index(int length, int r, const char *what) {
    if(r < 1 || r > length) throw OracleError(std::string(what) + ": site index out of range");
}

} // namespace

CMatrix dense_pauli(int length, int r, Pauli p) {
    if(length < 1 || length > kMaxEdLength) throw OracleError("dense_pauli: unsupported length");
    check_site_index(length, r, "dense_pauli");
    const auto act = pauli_action(length, r, p);
    const auto n = static_cast<Eigen::Index>(dimension(length));
    CMatrix m = CMatrix::Zero(n, n);
    for(Eigen::Index a = 0; a < n; ++a)
        m(a, static_cast<Eigen::Index>(static_cast<std::size_t>(a) ^ act.flip)) =
            act.c * act.rho[static_cast<std::size_t>(a)];
    return m;
}

Eigen::MatrixXd dense_hamiltonian(const HamiltonianSpec &spec) {
    spec.validate();
    const int L = spec.length;
    if(L > kMaxEdLength) throw OracleError("exact diagonalization limited to L <= 12");
    const std::size_t n = dimension(L);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    const double s = spec.prefactor();
    for(std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        if(spec.model == Model::heisenberg_xxx) {
            for(int r = 1; r < L; ++r) {
                const int b1 = site_bit(i, L, r), b2 = site_bit(i, L, r + 1);
                h(ii, ii) += spec.J * ((b1 == b2) ? 1.0 : -1.0);
                if(b1 != b2) {
                    const std::size_t j = i ^ site_mask(L, r) ^ site_mask(L, r + 1);
                    h(static_cast<Eigen::Index>(j), ii) += 2.0 * spec.J;
                }
            }
        } else {
            double diag = 0.0;
            for(int r = 1; r <= L; ++r) {
                const double z = 1.0 - 2.0 * site_bit(i, L, r);
                diag += spec.hz * z;
                if(r < L) diag += spec.J * z * (1.0 - 2.0 * site_bit(i, L, r + 1));
                h(static_cast<Eigen::Index>(i ^ site_mask(L, r)), ii) -= s * spec.hx;
            }
            h(ii, ii) -= s * diag;
        }
    }
    return h;
}

SpectralDecomposition ed_diagonalize(const HamiltonianSpec &spec) {
    const Eigen::MatrixXd h = dense_hamiltonian(spec);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
    if(eig.info() != Eigen::Success) throw OracleError("eigendecomposition failed");
    return SpectralDecomposition{eig.eigenvalues(), eig.eigenvectors()};
}

EdSystem::EdSystem(const HamiltonianSpec &spec) : spec_(spec), eig_(ed_diagonalize(spec)) {}

CMatrix EdSystem::heisenberg_operator(int r, Pauli p, double t) const {
    check_site_index(spec_.length, r, "heisenberg_operator");
    if(t == 0.0) return dense_pauli(spec_.length, r, p);
    const auto act = pauli_action(spec_.length, r, p);
    const Eigen::MatrixXd &v = eig_.eigenvectors;
    const RVector &e = eig_.eigenvalues;
    const Eigen::Index n = v.rows();

    Eigen::MatrixXd pv(n, n);
    for(Eigen::Index a = 0; a < n; ++a)
        pv.row(a) = act.rho[static_cast<std::size_t>(a)] *
                    v.row(static_cast<Eigen::Index>(static_cast<std::size_t>(a) ^ act.flip));
    const Eigen::MatrixXd rt = v.transpose() * pv; // P in the eigenbasis, up to act.c

    Eigen::MatrixXd mc(n, n), ms(n, n);
    for(Eigen::Index b = 0; b < n; ++b)
        for(Eigen::Index a = 0; a < n; ++a) {
            const double th = (e(a) - e(b)) * t;
            mc(a, b) = std::cos(th) * rt(a, b);
            ms(a, b) = std::sin(th) * rt(a, b);
        }
    Eigen::MatrixXd tmp = v * mc;
    const Eigen::MatrixXd wr = tmp * v.transpose();
    tmp.noalias() = v * ms;
    const Eigen::MatrixXd wi = tmp * v.transpose();
    CMatrix w(n, n);
    w.real() = wr;
    w.imag() = wi;
    return act.c * w;
}

std::vector<double> EdSystem::otoc_row(const CMatrix &w, const std::vector<int> &probes, Pauli probe) const {
    const int L = spec_.length;
    const Eigen::Index n = w.rows();
    std::vector<double> out;
    out.reserve(probes.size());
    for(int q : probes) {
        check_site_index(L, q, "otoc probe");
        const auto act = pauli_action(L, q, probe);
        // Q_{a,f(a)} = c rho(a) and |c| = 1, so
        // ||[W,Q]||^2 = (1/n) sum_ab |W_{a,f(b)} rho(f(b)) - rho(a) W_{f(a),b}|^2.
        // Summing moduli keeps small C accurate.
        double acc = 0.0;
        for(Eigen::Index b = 0; b < n; ++b) {
            const auto fb = static_cast<std::size_t>(b) ^ act.flip;
            const double rfb = act.rho[fb];
            for(Eigen::Index a = 0; a < n; ++a) {
                const auto fa = static_cast<Eigen::Index>(static_cast<std::size_t>(a) ^ act.flip);
                acc += std::norm(w(a, static_cast<Eigen::Index>(fb)) * rfb - act.rho[static_cast<std::size_t>(a)] * w(fa, b));
            }
        }
        out.push_back(acc / static_cast<double>(n));
    }
    return out;
}

std::vector<std::vector<double>> EdSystem::otoc_grid(int r, Pauli evolved, const std::vector<int> &probes, Pauli probe,
                                                     const std::vector<double> &times) const {
    std::vector<std::vector<double>> grid(probes.size(), std::vector<double>(times.size()));
    for(std::size_t k = 0; k < times.size(); ++k) {
        const auto row = otoc_row(heisenberg_operator(r, evolved, times[k]), probes, probe);
        for(std::size_t p = 0; p < probes.size(); ++p) grid[p][k] = row[p];
    }
    return grid;
}

std::vector<double> ed_otoc(const HamiltonianSpec &spec, int r, int r_probe, Pauli probe,
                            const std::vector<double> &times, Pauli evolved) {
    EdSystem sys(spec);
    return sys.otoc_grid(r, evolved, {r_probe}, probe, times).front();
}

EdEntanglement dense_operator_entanglement(const CMatrix &w, int length, int cut) {
    if(cut < 1 || cut >= length) throw OracleError("cut out of range");
    const Eigen::Index da = Eigen::Index{1} << cut, db = Eigen::Index{1} << (length - cut);
    if(w.rows() != da * db || w.cols() != da * db) throw OracleError("operator size does not match length");
    CMatrix m(da * da, db * db);
    for(Eigen::Index i = 0; i < w.cols(); ++i)
        for(Eigen::Index o = 0; o < w.rows(); ++o) m((o / db) * da + i / db, (o % db) * db + i % db) = w(o, i);
    Eigen::BDCSVD<CMatrix> svd(m);
    const RVector &s = svd.singularValues();
    if(!(s(0) > 0.0)) throw OracleError("zero operator has no entanglement");
    EdEntanglement out;
    double total = 0.0;
    for(Eigen::Index k = 0; k < s.size(); ++k)
        if(s(k) >= 1e-14 * s(0)) {
            out.spectrum.push_back(s(k) * s(k));
            total += s(k) * s(k);
        }
    double purity = 0.0;
    for(auto &p : out.spectrum) {
        p /= total;
        out.s_vn -= p * std::log(p);
        purity += p * p;
    }
    out.s_renyi2 = -std::log(purity);
    if(out.spectrum.size() == 1) out.s_vn = out.s_renyi2 = 0.0;
    return out;
}

EdEntanglement ed_operator_entanglement(const HamiltonianSpec &spec, int r, int cut, double t, Pauli evolved) {
    if(spec.length > kMaxEdEntanglementLength) throw OracleError("operator entanglement oracle limited to L <= 10");
    EdSystem sys(spec);
    return dense_operator_entanglement(sys.heisenberg_operator(r, evolved, t), spec.length, cut);
}

std::vector<double> bessel_j_sequence(int nmax, double x) {
    if(nmax < 0 || nmax > kMaxBesselOrder) throw OracleError("Bessel order outside 0..2000");
    if(!(x >= 0.0) || x > kMaxBesselArgument) throw OracleError("Bessel argument outside [0, 5000]");
    std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
    if(x == 0.0) {
        out[0] = 1.0;
        return out;
    }
    const double big = std::max(static_cast<double>(nmax), x);
    int m = static_cast<int>(std::ceil(big)) + 20 + static_cast<int>(std::ceil(15.0 * std::cbrt(big)));
    if(m % 2) ++m;

    std::vector<long double> j(static_cast<std::size_t>(m) + 2, 0.0L);
    j[static_cast<std::size_t>(m)] = 1e-30L;
    const long double xl = x;
    for(int k = m; k >= 1; --k) {
        const auto ku = static_cast<std::size_t>(k);
        j[ku - 1] = (2.0L * k / xl) * j[ku] - j[ku + 1];
        if(std::fabs(j[ku - 1]) > 1e300L) {
            for(std::size_t q = ku - 1; q <= static_cast<std::size_t>(m); ++q) j[q] *= 1e-300L;
        }
    }
    long double norm = j[0];
    for(std::size_t k = 2; k <= static_cast<std::size_t>(m); k += 2) norm += 2.0L * j[k];
    for(std::size_t k = 0; k <= static_cast<std::size_t>(nmax); ++k) out[k] = static_cast<double>(j[k] / norm);
    return out;
}

double bessel_j(int n, double x) { return bessel_j_sequence(n, x)[static_cast<std::size_t>(n)]; }

double bessel_j_prime(int n, double x) {
    if(n < 0 || n >= kMaxBesselOrder) throw OracleError("Bessel order outside 0..1999 for the derivative");
    const auto seq = bessel_j_sequence(n + 1, x);
    const auto nu = static_cast<std::size_t>(n);
    if(n == 0) return -seq[1];
    return 0.5 * (seq[nu - 1] - seq[nu + 1]);
}

double airy_ai(double z) {
    if(!(std::fabs(z) <= 8.0)) throw OracleError("airy_ai: |z| > 8 is outside the series range");
    const long double c1 = 0.355028053887817239260063186004183176L;
    const long double c2 = 0.258819403792806798405183560189203963L;
    const long double zl = z, z3 = zl * zl * zl;
    long double a = 1.0L, b = zl, f = 0.0L, g = 0.0L;
    for(int k = 0; k < 400; ++k) {
        f += a;
        g += b;
        a *= z3 / ((3.0L * k + 2.0L) * (3.0L * k + 3.0L));
        b *= z3 / ((3.0L * k + 3.0L) * (3.0L * k + 4.0L));
        if(k > 4 && std::fabs(a) < 1e-24L * (1.0L + std::fabs(f)) && std::fabs(b) < 1e-24L * (1.0L + std::fabs(g))) break;
    }
    return static_cast<double>(c1 * f - c2 * g);
}

void FreeFermionSpec::validate() const {
    if(!(g > 0.0) || !std::isfinite(g)) throw OracleError("free fermion g must be positive");
    if(quadrature_points < 1024 || (quadrature_points & (quadrature_points - 1)) != 0)
        throw OracleError("quadrature_points must be a power of two >= 1024");
}

double free_fermion_dispersion(double g, double k) { return std::sqrt(std::max(0.0, 1.0 + g * g + 2.0 * g * std::cos(k))); }

double free_fermion_max_velocity(double g) { return std::min(g, 1.0); }

namespace {

struct QuadratureSums {
    cplx u{0.0, 0.0};
    cplx v{0.0, 0.0};
};

// Sums of the u, v integrands over k_j = -pi + 2 pi (j + offset) / n.
QuadratureSums integrand_sums(double g, int x, double t, long n, double offset) {
    long double ur = 0.0L, ui = 0.0L, vi = 0.0L;
    for(long j = 0; j < n; ++j) {
        const double k = -M_PI + 2.0 * M_PI * (static_cast<double>(j) + offset) / static_cast<double>(n);
        const double eps = free_fermion_dispersion(g, k);
        const double sinc = eps > 1e-300 ? std::sin(eps * t) / eps : t; // sin(eps t)/eps
        const double ckx = std::cos(k * x), skx = std::sin(k * x);
        ur += std::cos(eps * t) * ckx;
        ui += (std::cos(k) + g) * sinc * ckx;
        vi -= std::sin(k) * sinc * skx;
    }
    return QuadratureSums{cplx(static_cast<double>(ur), static_cast<double>(ui)), cplx(0.0, static_cast<double>(vi))};
}

} // namespace

FreeFermionAmplitudes free_fermion_amplitudes(const FreeFermionSpec &spec, int x, double t) {
    spec.validate();
    if(!std::isfinite(t)) throw OracleError("free fermion time must be finite");
    long n = spec.quadrature_points;
    QuadratureSums sum = integrand_sums(spec.g, x, t, n, 0.0);
    cplx u = sum.u / static_cast<double>(n), v = sum.v / static_cast<double>(n);
    const long cap = 1L << 24;
    while(n <= cap) {
        const QuadratureSums mid = integrand_sums(spec.g, x, t, n, 0.5);
        sum.u += mid.u;
        sum.v += mid.v;
        n *= 2;
        const cplx u2 = sum.u / static_cast<double>(n), v2 = sum.v / static_cast<double>(n);
        const double change = std::max(std::abs(u2 - u), std::abs(v2 - v));
        u = u2;
        v = v2;
        if(change < 1e-10) return FreeFermionAmplitudes{u, v, x, t, static_cast<int>(n)};
    }
    throw OracleError("free fermion quadrature did not converge");
}

double free_fermion_otoc(const FreeFermionSpec &spec, int x, double t) {
    const auto a = free_fermion_amplitudes(spec, x, t);
    const double pu = std::norm(a.u), pv = std::norm(a.v);
    return 8.0 * (pu + pv - (pu - pv) * (pu - pv));
}

FreeFermionAmplitudes free_fermion_amplitudes_critical(int x, double t) {
    FreeFermionAmplitudes out;
    out.x = x;
    out.t = t;
    if(t == 0.0) {
        out.u = (x == 0) ? 1.0 : 0.0;
        out.v = 0.0;
        return out;
    }
    if(t < 0.0) throw OracleError("closed form requires t >= 0");
    const int n = 2 * std::abs(x);
    const double sign = (std::abs(x) % 2 == 0) ? 1.0 : -1.0;
    const double j = bessel_j(n, 2.0 * t);
    const double jp = bessel_j_prime(n, 2.0 * t);
    out.u = sign * cplx(j, -jp);
    out.v = cplx(0.0, sign * (static_cast<double>(x) / t) * j);
    return out;
}

double perturbative_form(double x, double t, double a, double b) {
    if(!(a * t > 0.0)) throw OracleError("perturbative form needs a t > 0");
    const double bx = b * x;
    if(!(bx >= 0.0) || bx > 1e4) throw OracleError("perturbative form needs 0 <= b x <= 1e4");
    if(bx == 0.0) return 0.0;
    return bx * std::log(a * t) - std::lgamma(bx + 1.0);
}

} // namespace mpotoc
