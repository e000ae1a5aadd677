#pragma once

// Trotterized Heisenberg-picture evolution W -> U^dagger W U of an MPO, with
// U = exp(-i H t), realised as bond gates g = exp(i h dt) applied by
// conjugation W -> g W g^dagger.

#include <functional>
#include <stdexcept>
#include <vector>

#include "mpotoc/hamiltonian.hpp"
#include "mpotoc/mpo.hpp"

namespace mpotoc {

/// 16x16 action of W -> g W g^dagger on the fused two-site index
/// (out1, in1, out2, in2).
using SuperGate = Eigen::Matrix<cplx, 16, 16>;

[[nodiscard]] SuperGate conjugation_supergate(const Eigen::Matrix4cd &g);

struct Gate {
    int bond = 1;
    Eigen::Matrix4cd g;
    SuperGate super;
};

[[nodiscard]] Gate make_gate(int bond, const Eigen::Matrix4cd &g);

struct GateLayer {
    double weight = 1.0; // fraction of dt
    std::vector<Gate> gates;
};

struct TrotterPlan {
    double dt = 0.0; // negative for a time-reversed plan
    int order = 2;
    int length = 0;
    std::vector<GateLayer> layers;

    [[nodiscard]] double steps_per_unit_time() const { return 1.0 / std::abs(dt); }
    /// Undoes one step: reversed layers, g -> g^dagger, dt -> -dt.
    [[nodiscard]] TrotterPlan inverse() const;
};

/// order 1: odd(dt), even(dt). order 2: odd(dt/2), even(dt), odd(dt/2).
/// Odd bonds are 1, 3, 5, ...
[[nodiscard]] TrotterPlan build_trotter_plan(const HamiltonianSpec &spec, double dt, int order = 2);

struct Truncation {
    std::size_t chi_max = 32;
    double eps_rel = 1e-14;
};

enum class SweepDirection { left_to_right, right_to_left };

/// Applies the gate on its bond. The orthogonality center must be on one of
/// the two bond sites; afterwards it sits on the right site (left_to_right)
/// or the left site (right_to_left). Returns the discarded weight.
double apply_gate_inplace(MatrixProductOperator &w, const Gate &gate, const Truncation &trunc, SweepDirection dir);

struct GateApplication {
    MatrixProductOperator w;
    double discarded_weight = 0.0;
};

[[nodiscard]] GateApplication apply_bond_gate(MatrixProductOperator w, int bond, const Eigen::Matrix4cd &g,
                                              const Truncation &trunc);

/// One layer in the given sweep direction, moving the center as needed.
double apply_layer(MatrixProductOperator &w, const GateLayer &layer, const Truncation &trunc, SweepDirection dir);

class EvolutionAbort : public std::runtime_error {
public:
    EvolutionAbort(long step, const std::string &what);
    [[nodiscard]] long step() const { return step_; }

private:
    long step_;
};

/// Single-owner driver. Sweep direction alternates per layer, keyed to the
/// global layer count, so a resumed run repeats the same arithmetic.
class Evolver {
public:
    Evolver(MatrixProductOperator w0, TrotterPlan plan, Truncation trunc, long start_step = 0);

    /// Advances one Trotter step; returns the largest discarded weight in it.
    double step();

    [[nodiscard]] const MatrixProductOperator &state() const { return w_; }
    [[nodiscard]] long steps_done() const { return step_; }
    [[nodiscard]] double time() const { return static_cast<double>(step_) * plan_.dt; }
    [[nodiscard]] const TrotterPlan &plan() const { return plan_; }

private:
    MatrixProductOperator w_;
    TrotterPlan plan_;
    Truncation trunc_;
    long step_;
};

/// ceil(t_max / |dt|) with a little slack for round-off.
[[nodiscard]] long steps_for(double t_max, double dt);

using Recorder = std::function<void(double t, const MatrixProductOperator &w)>;

struct TrajectoryRecord {
    std::vector<double> times;           // recorded instants
    std::vector<double> norms;           // operator_norm at each recorded instant
    std::vector<double> step_discarded;  // max discarded weight per step
};

/// Runs steps_for(t_max, dt) steps, calling every recorder at step 0, every
/// record_stride steps and at the last step.
[[nodiscard]] TrajectoryRecord evolve(MatrixProductOperator w0, const TrotterPlan &plan, double t_max,
                                      const Truncation &trunc, long record_stride,
                                      const std::vector<Recorder> &recorders = {});

} // namespace mpotoc
