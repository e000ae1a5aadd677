#include "mpotoc/hamiltonian.hpp"

#include <cmath>

#include "mpotoc/mpo.hpp"

namespace mpotoc {

namespace {

Eigen::Matrix4cd kron2(const Eigen::Matrix2cd &a, const Eigen::Matrix2cd &b) {
    Eigen::Matrix4cd out;
    for(int i = 0; i < 2; ++i)
        for(int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
    return out;
}

} // namespace

std::string model_name(Model m) {
    switch(m) {
    case Model::mixed_field_ising: return "mixed_field_ising";
    case Model::transverse_field_ising: return "transverse_field_ising";
    case Model::heisenberg_xxx: return "heisenberg_xxx";
    }
    return "unknown";
}

Model parse_model(const std::string &name) {
    if(name == "mixed_field_ising") return Model::mixed_field_ising;
    if(name == "transverse_field_ising") return Model::transverse_field_ising;
    if(name == "heisenberg_xxx") return Model::heisenberg_xxx;
    throw SpecError("unknown model '" + name + "'");
}

void HamiltonianSpec::validate() const {
    if(length < 2) throw SpecError("chain length must be >= 2");
    if(!std::isfinite(J) || !std::isfinite(hx) || !std::isfinite(hz)) throw SpecError("couplings must be finite");
    if(model == Model::transverse_field_ising && hz != 0.0)
        throw SpecError("transverse_field_ising requires hz = 0");
    if(model == Model::heisenberg_xxx) {
        if(hx != 0.0 || hz != 0.0) throw SpecError("heisenberg_xxx takes no fields");
        if(normalize_e0) throw SpecError("E0 normalization applies to the Ising family only");
    }
    if(normalize_e0 && !(e0() > 0.0)) throw SpecError("E0 vanishes for all-zero couplings");
}

double HamiltonianSpec::e0() const { return std::sqrt(4.0 * J * J + 2.0 * hx * hx + 2.0 * hz * hz); }

double HamiltonianSpec::prefactor() const { return normalize_e0 ? 1.0 / e0() : 1.0; }

std::vector<BondTerm> build_bond_terms(const HamiltonianSpec &spec) {
    spec.validate();
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    const Eigen::Matrix2cd x = pauli_matrix(Pauli::X), y = pauli_matrix(Pauli::Y), z = pauli_matrix(Pauli::Z);
    const int L = spec.length;

    std::vector<BondTerm> terms;
    terms.reserve(static_cast<std::size_t>(L - 1));
    for(int b = 1; b < L; ++b) {
        BondTerm t;
        t.bond = b;
        if(spec.model == Model::heisenberg_xxx) {
            t.h = spec.J * (kron2(x, x) + kron2(y, y) + kron2(z, z));
        } else {
            const double wl = (b == 1) ? 1.0 : 0.5;
            const double wr = (b == L - 1) ? 1.0 : 0.5;
            const Eigen::Matrix4cd field_x = wl * kron2(x, id) + wr * kron2(id, x);
            const Eigen::Matrix4cd field_z = wl * kron2(z, id) + wr * kron2(id, z);
            t.h = -spec.prefactor() * (spec.J * kron2(z, z) + spec.hx * field_x + spec.hz * field_z);
        }
        terms.push_back(t);
    }
    return terms;
}

} // namespace mpotoc
