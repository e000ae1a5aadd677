#include "mpotoc/observables.hpp"

#include <cmath>
#include <limits>

#include "mpotoc/oracles.hpp"

namespace mpotoc {

double squared_commutator(const TransferEnvironments &env, int r_probe, Pauli probe) {
    const double nn = env.norm_squared();
    if(!(nn > 0.0)) throw MpoError("squared_commutator: zero operator");
    const Eigen::Matrix4cd one_minus = Eigen::Matrix4cd::Identity() - conjugation_superop(pauli_matrix(probe));
    return env.site_image_norm_squared(r_probe, one_minus) / nn;
}

double squared_commutator(const MatrixProductOperator &w, int r_probe, Pauli probe) {
    const TransferEnvironments env(w);
    return squared_commutator(env, r_probe, probe);
}

double clamp_for_display(double c) { return (c < 0.0 && c >= -1e-9) ? 0.0 : c; }

OtocGrid make_otoc_grid(int base_site, std::vector<int> probes, Pauli probe, Pauli evolved) {
    OtocGrid g;
    g.base_site = base_site;
    g.evolved_pauli = evolved;
    g.probe_sites = std::move(probes);
    g.probe_pauli = probe;
    g.values.assign(g.probe_sites.size(), {});
    return g;
}

void OtocGrid::append(double t, const MatrixProductOperator &w) {
    for(int q : probe_sites)
        if(q < 1 || q > w.length()) throw MpoError("probe site outside the chain");
    const TransferEnvironments env(w);
    times.push_back(t);
    norms.push_back(std::sqrt(env.norm_squared()));
    values.resize(probe_sites.size());
    for(std::size_t p = 0; p < probe_sites.size(); ++p)
        values[p].push_back(squared_commutator(env, probe_sites[p], probe_pauli));
}

void OtocGrid::check_range() const {
    for(const auto &row : values)
        for(double c : row)
            if(!(c >= -1e-9 && c <= 4.0 + 1e-6)) throw MpoError("squared commutator outside [0, 4]");
}

Recorder otoc_recorder(OtocGrid &grid) {
    return [&grid](double t, const MatrixProductOperator &w) { grid.append(t, w); };
}

std::vector<std::optional<double>> arrival_times(const OtocGrid &grid, double threshold) {
    std::vector<std::optional<double>> out(grid.probe_sites.size());
    for(std::size_t p = 0; p < out.size(); ++p)
        for(std::size_t k = 0; k < grid.times.size(); ++k)
            if(grid.values[p][k] > threshold) {
                out[p] = grid.times[k];
                break;
            }
    return out;
}

EntanglementProfile make_entanglement_profile(std::vector<int> cuts) {
    EntanglementProfile p;
    p.cuts = std::move(cuts);
    p.s_vn.assign(p.cuts.size(), {});
    p.s_renyi2.assign(p.cuts.size(), {});
    return p;
}

void EntanglementProfile::append(double t, const MatrixProductOperator &w) {
    for(int c : cuts)
        if(c < 1 || c >= w.length()) throw MpoError("cut outside 1..L-1");
    const auto all = entanglement_all_cuts(w);
    times.push_back(t);
    s_vn.resize(cuts.size());
    s_renyi2.resize(cuts.size());
    for(std::size_t k = 0; k < cuts.size(); ++k) {
        const auto &e = all[static_cast<std::size_t>(cuts[k] - 1)];
        s_vn[k].push_back(e.s_vn);
        s_renyi2[k].push_back(e.s_renyi2);
    }
}

Recorder entanglement_recorder(EntanglementProfile &profile) {
    return [&profile](double t, const MatrixProductOperator &w) { profile.append(t, w); };
}

RenyiBoundCheck renyi_bound_check(const HamiltonianSpec &spec, int r, int cut, double t, BoundSide side,
                                  Pauli evolved) {
    const int L = spec.length;
    if(L > kMaxEdEntanglementLength) throw OracleError("bound check limited to L <= 10");
    if(r < 1 || r > L) throw OracleError("site outside the chain");
    if(cut < 1 || cut >= L) throw OracleError("cut outside 1..L-1");

    bool right = side == BoundSide::right;
    if(side == BoundSide::far) right = r <= cut;
    RenyiBoundCheck out;
    if(right)
        for(int q = cut + 1; q <= L; ++q) out.region.push_back(q);
    else
        for(int q = cut; q >= 1; --q) out.region.push_back(q);

    const EdSystem sys(spec);
    const CMatrix w = sys.heisenberg_operator(r, evolved, t);
    out.lhs = dense_operator_entanglement(w, L, cut).s_renyi2;
    out.per_site.assign(out.region.size(), 0.0);
    // [W, I] = 0, so the identity adds nothing.
    for(Pauli o : {Pauli::X, Pauli::Y, Pauli::Z}) {
        const auto row = sys.otoc_row(w, out.region, o);
        for(std::size_t k = 0; k < row.size(); ++k) out.per_site[k] += row[k];
    }
    for(double s : out.per_site) out.commutator_sum += s;

    const double nan = std::numeric_limits<double>::quiet_NaN();
    out.defined = out.commutator_sum < 2.0;
    out.rhs = out.defined ? -std::log1p(-0.5 * out.commutator_sum) : nan;
    out.satisfied = out.defined && out.lhs <= out.rhs + 1e-9;
    out.margin = out.defined ? out.rhs - out.lhs : nan;
    return out;
}

std::optional<double> fit_decay_constant(const std::vector<double> &per_site) {
    double sn = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for(std::size_t n = 0; n < per_site.size(); ++n) {
        if(!(per_site[n] > 1e-300)) continue;
        const double x = static_cast<double>(n), y = std::log(per_site[n]);
        sn += 1;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = sn * sxx - sx * sx;
    if(sn < 2 || den <= 0.0) return std::nullopt;
    const double slope = (sn * sxy - sx * sy) / den;
    return -0.5 * slope;
}

double linearized_renyi_bound(double boundary_sum, double a) {
    if(!(a > 0.0)) throw std::invalid_argument("decay constant must be positive");
    return boundary_sum / (2.0 * -std::expm1(-2.0 * a));
}

} // namespace mpotoc
