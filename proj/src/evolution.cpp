#include "mpotoc/evolution.hpp"

#include <cmath>
#include <string>

namespace mpotoc {

namespace {

const double kSqrt2 = std::sqrt(2.0);

SweepDirection direction_for(long global_layer) {
    return global_layer % 2 == 0 ? SweepDirection::left_to_right : SweepDirection::right_to_left;
}

} // namespace

SuperGate conjugation_supergate(const Eigen::Matrix4cd &g) {
    SuperGate s;
    for(int o1 = 0; o1 < 2; ++o1)
        for(int i1 = 0; i1 < 2; ++i1)
            for(int o2 = 0; o2 < 2; ++o2)
                for(int i2 = 0; i2 < 2; ++i2)
                    for(int a1 = 0; a1 < 2; ++a1)
                        for(int b1 = 0; b1 < 2; ++b1)
                            for(int a2 = 0; a2 < 2; ++a2)
                                for(int b2 = 0; b2 < 2; ++b2)
                                    s(8 * o1 + 4 * i1 + 2 * o2 + i2, 8 * a1 + 4 * b1 + 2 * a2 + b2) =
                                        g(2 * o1 + o2, 2 * a1 + a2) * std::conj(g(2 * i1 + i2, 2 * b1 + b2));
    return s;
}

Gate make_gate(int bond, const Eigen::Matrix4cd &g) {
    const double defect = (g * g.adjoint() - Eigen::Matrix4cd::Identity()).cwiseAbs().maxCoeff();
    if(defect > 1e-12) throw MpoError("gate is not unitary");
    return Gate{bond, g, conjugation_supergate(g)};
}

TrotterPlan TrotterPlan::inverse() const {
    TrotterPlan inv = *this;
    inv.dt = -dt;
    inv.layers.assign(layers.rbegin(), layers.rend());
    for(auto &layer : inv.layers)
        for(auto &gate : layer.gates) {
            const Eigen::Matrix4cd gd = gate.g.adjoint();
            gate = Gate{gate.bond, gd, conjugation_supergate(gd)};
        }
    return inv;
}

TrotterPlan build_trotter_plan(const HamiltonianSpec &spec, double dt, int order) {
    if(!(dt > 0.0) || !std::isfinite(dt)) throw SpecError("dt must be positive");
    if(order != 1 && order != 2) throw SpecError("Trotter order must be 1 or 2");
    const auto terms = build_bond_terms(spec);

    auto layer = [&](int parity, double weight) {
        GateLayer out;
        out.weight = weight;
        for(const auto &t : terms)
            if(t.bond % 2 == parity) {
                const Eigen::Matrix4cd g = exp_i_hermitian(t.h, weight * dt);
                out.gates.push_back(make_gate(t.bond, g));
            }
        return out;
    };

    TrotterPlan plan;
    plan.dt = dt;
    plan.order = order;
    plan.length = spec.length;
    std::vector<GateLayer> layers;
    if(order == 1) {
        layers = {layer(1, 1.0), layer(0, 1.0)};
    } else {
        layers = {layer(1, 0.5), layer(0, 1.0), layer(1, 0.5)};
    }
    for(auto &l : layers)
        if(!l.gates.empty()) plan.layers.push_back(std::move(l));
    return plan;
}

double apply_gate_inplace(MatrixProductOperator &w, const Gate &gate, const Truncation &trunc, SweepDirection dir) {
    const int x = gate.bond;
    if(x < 1 || x >= w.length()) throw MpoError("apply_bond_gate: bond out of range");
    const auto c = w.ortho_center();
    if(!c || (*c != x && *c != x + 1))
        throw MpoError("apply_bond_gate: orthogonality center must sit on bond " + std::to_string(x));

    const DenseTensor &a = w.site(x);
    const DenseTensor &b = w.site(x + 1);
    const auto bl = static_cast<Eigen::Index>(a.dim(0));
    const auto bm = static_cast<Eigen::Index>(a.dim(3));
    const auto br = static_cast<Eigen::Index>(b.dim(3));

    using RowMap = Eigen::Map<const RowMajorCMatrix>;
    RowMajorCMatrix theta = RowMap(a.data().data(), bl * 4, bm) * RowMap(b.data().data(), bm, 4 * br);

    // theta is laid out (left, p1, p2, right); apply the super-gate on (p1, p2).
    RowMajorCMatrix gated(bl * 4, 4 * br);
    for(Eigen::Index l = 0; l < bl; ++l) {
        Eigen::Map<const RowMajorCMatrix> in(theta.data() + l * 16 * br, 16, br);
        Eigen::Map<RowMajorCMatrix> out(gated.data() + l * 16 * br, 16, br);
        out.noalias() = gate.super * in;
    }

    auto f = svd_truncate_matrix(gated, trunc.chi_max, trunc.eps_rel);
    const auto k = static_cast<Eigen::Index>(f.s.size());
    CMatrix left = f.u;
    CMatrix right = f.vh;
    if(dir == SweepDirection::left_to_right) {
        left *= kSqrt2;
        for(Eigen::Index j = 0; j < k; ++j) right.row(j) *= f.s[static_cast<std::size_t>(j)] / kSqrt2;
    } else {
        for(Eigen::Index j = 0; j < k; ++j) left.col(j) *= f.s[static_cast<std::size_t>(j)] / kSqrt2;
        right *= kSqrt2;
    }

    DenseTensor na({static_cast<std::size_t>(bl), 2, 2, static_cast<std::size_t>(k)});
    Eigen::Map<RowMajorCMatrix>(na.data().data(), bl * 4, k) = left;
    DenseTensor nb({static_cast<std::size_t>(k), 2, 2, static_cast<std::size_t>(br)});
    Eigen::Map<RowMajorCMatrix>(nb.data().data(), k, 4 * br) = right;
    w.site(x) = std::move(na);
    w.site(x + 1) = std::move(nb);
    w.set_ortho_center(dir == SweepDirection::left_to_right ? x + 1 : x);
    return f.discarded_weight;
}

GateApplication apply_bond_gate(MatrixProductOperator w, int bond, const Eigen::Matrix4cd &g, const Truncation &trunc) {
    const auto c = w.ortho_center();
    const auto dir = (c && *c == bond) ? SweepDirection::left_to_right : SweepDirection::right_to_left;
    const double dw = apply_gate_inplace(w, make_gate(bond, g), trunc, dir);
    return GateApplication{std::move(w), dw};
}

double apply_layer(MatrixProductOperator &w, const GateLayer &layer, const Truncation &trunc, SweepDirection dir) {
    double worst = 0.0;
    auto one = [&](const Gate &gate) {
        const auto c = w.ortho_center();
        if(!c || (*c != gate.bond && *c != gate.bond + 1))
            move_center(w, dir == SweepDirection::left_to_right ? gate.bond : gate.bond + 1);
        worst = std::max(worst, apply_gate_inplace(w, gate, trunc, dir));
    };
    if(dir == SweepDirection::left_to_right) {
        for(const auto &gate : layer.gates) one(gate);
    } else {
        for(auto it = layer.gates.rbegin(); it != layer.gates.rend(); ++it) one(*it);
    }
    return worst;
}

EvolutionAbort::EvolutionAbort(long step, const std::string &what)
    : std::runtime_error("evolution aborted at step " + std::to_string(step) + ": " + what), step_(step) {}

Evolver::Evolver(MatrixProductOperator w0, TrotterPlan plan, Truncation trunc, long start_step)
    : w_(std::move(w0)), plan_(std::move(plan)), trunc_(trunc), step_(start_step) {
    if(w_.length() != plan_.length) throw MpoError("MPO length does not match the Trotter plan");
    if(trunc_.chi_max < 1) throw MpoError("chi_max must be >= 1");
    if(!w_.all_finite()) throw EvolutionAbort(step_, "initial operator has non-finite entries");
}

double Evolver::step() {
    const long next = step_ + 1;
    double worst = 0.0;
    try {
        const auto n = static_cast<long>(plan_.layers.size());
        for(long l = 0; l < n; ++l)
            worst = std::max(worst, apply_layer(w_, plan_.layers[static_cast<std::size_t>(l)], trunc_,
                                                direction_for(step_ * n + l)));
    } catch(const NonFiniteError &e) {
        throw EvolutionAbort(next, e.what());
    }
    if(!w_.all_finite()) throw EvolutionAbort(next, "non-finite tensor entries");
    step_ = next;
    return worst;
}

long steps_for(double t_max, double dt) {
    if(!(t_max >= 0.0)) throw SpecError("t_max must be >= 0");
    return static_cast<long>(std::ceil(t_max / std::abs(dt) - 1e-9));
}

TrajectoryRecord evolve(MatrixProductOperator w0, const TrotterPlan &plan, double t_max, const Truncation &trunc,
                        long record_stride, const std::vector<Recorder> &recorders) {
    if(record_stride < 1) throw SpecError("record_stride must be >= 1");
    const long n = steps_for(t_max, plan.dt);
    Evolver ev(std::move(w0), plan, trunc);
    TrajectoryRecord rec;
    auto record = [&] {
        rec.times.push_back(ev.time());
        rec.norms.push_back(operator_norm(ev.state()));
        for(const auto &r : recorders) r(ev.time(), ev.state());
    };
    record();
    for(long s = 1; s <= n; ++s) {
        rec.step_discarded.push_back(ev.step());
        if(s % record_stride == 0 || s == n) record();
    }
    return rec;
}

} // namespace mpotoc
