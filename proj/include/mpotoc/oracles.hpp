#pragma once

// Reference engines: exact diagonalization for short chains, the free-fermion
// closed forms of the transverse-field chain, and the special functions they use.

#include <complex>
#include <stdexcept>
#include <vector>

#include "mpotoc/hamiltonian.hpp"
#include "mpotoc/mpo.hpp"

namespace mpotoc {

class OracleError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr int kMaxEdLength = 12;
inline constexpr int kMaxEdEntanglementLength = 10;

/// Single-site Pauli lifted to the 2^L space (site 1 most significant bit).
[[nodiscard]] CMatrix dense_pauli(int length, int r, Pauli p);

/// Real symmetric H for the supported models, built bit by bit from Pauli
/// strings (no bond splitting involved).
[[nodiscard]] Eigen::MatrixXd dense_hamiltonian(const HamiltonianSpec &spec);

struct SpectralDecomposition {
    RVector eigenvalues;          // ascending
    Eigen::MatrixXd eigenvectors; // orthogonal, columns are eigenvectors
};

[[nodiscard]] SpectralDecomposition ed_diagonalize(const HamiltonianSpec &spec);

/// A diagonalized chain, reusable across many times and probes.
class EdSystem {
public:
    explicit EdSystem(const HamiltonianSpec &spec);

    [[nodiscard]] const HamiltonianSpec &spec() const { return spec_; }
    [[nodiscard]] const SpectralDecomposition &spectrum() const { return eig_; }

    /// e^{iHt} P_r e^{-iHt}
    [[nodiscard]] CMatrix heisenberg_operator(int r, Pauli p, double t) const;

    /// C = (1/2^L) Tr([W,V]^dagger [W,V]) for every probe site, W = P_r(t), V the probe Pauli.
    [[nodiscard]] std::vector<double> otoc_row(const CMatrix &w, const std::vector<int> &probes, Pauli probe) const;

    /// grid[probe][time]
    [[nodiscard]] std::vector<std::vector<double>> otoc_grid(int r, Pauli evolved, const std::vector<int> &probes,
                                                             Pauli probe, const std::vector<double> &times) const;

private:
    HamiltonianSpec spec_;
    SpectralDecomposition eig_;
};

/// C(r, r', t) from exact diagonalization, W = X_r unless stated.
[[nodiscard]] std::vector<double> ed_otoc(const HamiltonianSpec &spec, int r, int r_probe, Pauli probe,
                                          const std::vector<double> &times, Pauli evolved = Pauli::X);

struct EdEntanglement {
    double s_vn = 0.0;
    double s_renyi2 = 0.0;
    std::vector<double> spectrum;
};

/// Operator entanglement of a dense operator across bond `cut` (sites 1..cut | rest).
[[nodiscard]] EdEntanglement dense_operator_entanglement(const CMatrix &w, int length, int cut);

/// Operator entanglement of P_r(t) across bond `cut`; L <= 10.
[[nodiscard]] EdEntanglement ed_operator_entanglement(const HamiltonianSpec &spec, int r, int cut, double t,
                                                      Pauli evolved = Pauli::X);

// Bessel functions of the first kind, integer order, by Miller's downward
// recurrence normalized with J_0 + 2 sum J_2k = 1.
inline constexpr int kMaxBesselOrder = 2000;
inline constexpr double kMaxBesselArgument = 5000.0;

/// J_0(x) .. J_nmax(x) from one recurrence.
[[nodiscard]] std::vector<double> bessel_j_sequence(int nmax, double x);
[[nodiscard]] double bessel_j(int n, double x);
/// (J_{n-1} - J_{n+1}) / 2, with J_{-1} = -J_1.
[[nodiscard]] double bessel_j_prime(int n, double x);

/// Ai(z) by its Maclaurin series in extended precision; |z| <= 8 only.
[[nodiscard]] double airy_ai(double z);

struct FreeFermionSpec {
    double g = 1.0;                // hx / J
    int quadrature_points = 1024;  // starting grid, doubled until converged
    void validate() const;
};

struct FreeFermionAmplitudes {
    cplx u;
    cplx v;
    int x = 0;
    double t = 0.0;
    int points_used = 0;
};

/// Quasiparticle energy sqrt(1 + g^2 + 2 g cos k).
[[nodiscard]] double free_fermion_dispersion(double g, double k);
/// max_k |d eps / dk| = min(g, 1).
[[nodiscard]] double free_fermion_max_velocity(double g);

/// u(x,t), v(x,t) by periodic trapezoidal quadrature over k, doubling the
/// grid until two successive grids agree to 1e-10. t is in the unit of 2J.
[[nodiscard]] FreeFermionAmplitudes free_fermion_amplitudes(const FreeFermionSpec &spec, int x, double t);

/// 8 (|u|^2 + |v|^2 - (|u|^2 - |v|^2)^2) for X_r(t) against X_{r+x}.
[[nodiscard]] double free_fermion_otoc(const FreeFermionSpec &spec, int x, double t);

/// g = 1 closed forms: u = (-1)^x (J_2x(2t) - i J'_2x(2t)), v = i (-1)^x (x/t) J_2x(2t).
/// The sign of the J' term follows the integral above; C only sees |u|.
[[nodiscard]] FreeFermionAmplitudes free_fermion_amplitudes_critical(int x, double t);

/// Converts a chain time (H = -(J ZZ + hx X), no E0 factor) to the free-fermion
/// clock: t_ff = factor * t with factor = 2J by default.
[[nodiscard]] inline double free_fermion_time(double t_chain, double factor) { return factor * t_chain; }
[[nodiscard]] inline double unit_2j_factor(double J) { return 2.0 * J; }

/// log[(a t)^{b x} / (b x)!] = b x log(a t) - lgamma(b x + 1).
[[nodiscard]] double perturbative_form(double x, double t, double a, double b);

} // namespace mpotoc
