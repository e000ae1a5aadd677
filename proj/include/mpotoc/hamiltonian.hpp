#pragma once

// Open spin-1/2 chains: mixed-field / transverse-field Ising and the
// isotropic Heisenberg chain, split into two-site bond terms.

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mpotoc {

enum class Model { mixed_field_ising, transverse_field_ising, heisenberg_xxx };

[[nodiscard]] std::string model_name(Model m);
[[nodiscard]] Model parse_model(const std::string &name);

class SpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct HamiltonianSpec {
    Model model = Model::mixed_field_ising;
    double J = 1.0;
    double hx = 0.0;
    double hz = 0.0;
    bool normalize_e0 = false;
    int length = 2;

    /// Throws SpecError. Transverse-field requires hz == 0; the Heisenberg
    /// chain takes no fields and no E0 factor.
    void validate() const;
    /// sqrt(4 J^2 + 2 hx^2 + 2 hz^2)
    [[nodiscard]] double e0() const;
    /// Overall factor multiplying the Ising terms: 1/E0 or 1.
    [[nodiscard]] double prefactor() const;
};

/// Two-site term on bond x (sites x, x+1). Basis index 2*a_left + a_right.
struct BondTerm {
    int bond = 1;
    Eigen::Matrix4cd h;
};

/// Bond terms summing exactly to H. Fields go with weight 1/2 to each bond
/// touching an interior site and weight 1 at the chain ends.
[[nodiscard]] std::vector<BondTerm> build_bond_terms(const HamiltonianSpec &spec);

} // namespace mpotoc
