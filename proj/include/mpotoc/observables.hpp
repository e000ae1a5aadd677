#pragma once

// Squared commutators, operator-entanglement profiles and the Renyi-2 bound.

#include <optional>
#include <vector>

#include "mpotoc/evolution.hpp"
#include "mpotoc/hamiltonian.hpp"
#include "mpotoc/mpo.hpp"

namespace mpotoc {

/// C = ||[W, O_r]||^2 / ||W||^2 with ||A||^2 = Tr(A^dagger A) / 2^L, evaluated as
/// the norm of (1 - S)|W> so that tiny values keep their relative accuracy.
/// Equals 2 - 2 Re <W|S|W> / <W|W> up to round-off.
[[nodiscard]] double squared_commutator(const MatrixProductOperator &w, int r_probe, Pauli probe);

/// Same, reusing environments built once for the snapshot.
[[nodiscard]] double squared_commutator(const TransferEnvironments &env, int r_probe, Pauli probe);

/// Display value: negatives down to -1e-9 become 0, anything else is unchanged.
[[nodiscard]] double clamp_for_display(double c);

struct OtocGrid {
    int base_site = 1;
    Pauli evolved_pauli = Pauli::X;
    std::vector<int> probe_sites;
    Pauli probe_pauli = Pauli::X;
    std::vector<double> times;
    std::vector<std::vector<double>> values; // [probe][time], raw
    std::vector<double> norms;

    void append(double t, const MatrixProductOperator &w);
    /// Throws MpoError when a value leaves [-1e-9, 4 + 1e-6].
    void check_range() const;
};

[[nodiscard]] OtocGrid make_otoc_grid(int base_site, std::vector<int> probes, Pauli probe,
                                      Pauli evolved = Pauli::X);

/// Recorder that appends to `grid`; the grid must outlive the evolution.
[[nodiscard]] Recorder otoc_recorder(OtocGrid &grid);

/// First recorded time with C > threshold per probe, nullopt if never.
[[nodiscard]] std::vector<std::optional<double>> arrival_times(const OtocGrid &grid, double threshold);

struct EntanglementProfile {
    std::vector<int> cuts;
    std::vector<double> times;
    std::vector<std::vector<double>> s_vn;     // [cut][time]
    std::vector<std::vector<double>> s_renyi2; // [cut][time]

    void append(double t, const MatrixProductOperator &w);
};

[[nodiscard]] EntanglementProfile make_entanglement_profile(std::vector<int> cuts);
[[nodiscard]] Recorder entanglement_recorder(EntanglementProfile &profile);

enum class BoundSide { far, left, right };

struct RenyiBoundCheck {
    double lhs = 0.0;             // S2 of W(t) across the cut
    double commutator_sum = 0.0;  // sum over r in B and O in {I,X,Y,Z} of ||[W, O_r]||^2
    bool defined = false;         // commutator_sum < 2
    double rhs = 0.0;             // -log(1 - sum/2), NaN when undefined
    bool satisfied = false;
    double margin = 0.0;          // rhs - lhs, NaN when undefined
    std::vector<int> region;      // sites of B ordered outward from the cut
    std::vector<double> per_site; // Pauli-summed norms in the same order
};

/// Both sides of the bound with dense operators, W = P_r(t). `far` takes B as
/// the side of the cut not containing r. Requires L <= 10.
[[nodiscard]] RenyiBoundCheck renyi_bound_check(const HamiltonianSpec &spec, int r, int cut, double t,
                                                BoundSide side = BoundSide::far, Pauli evolved = Pauli::X);

/// Decay constant a from per-site sums ordered outward, assuming
/// s_n ~ s_0 e^{-2 a n}; least squares on log s over positive entries.
/// nullopt with fewer than two usable points.
[[nodiscard]] std::optional<double> fit_decay_constant(const std::vector<double> &per_site);

/// boundary_sum / (2 (1 - e^{-2a})), a > 0.
[[nodiscard]] double linearized_renyi_bound(double boundary_sum, double a);

} // namespace mpotoc
