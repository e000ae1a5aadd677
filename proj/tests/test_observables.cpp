#include <doctest.h>

#include <cmath>

#include "mpotoc/observables.hpp"
#include "mpotoc/oracles.hpp"
#include "test_util.hpp"

using namespace mpotoc;
using namespace testutil;

namespace {

HamiltonianSpec mixed(int L) {
    HamiltonianSpec s;
    s.model = Model::mixed_field_ising;
    s.hx = 1.05;
    s.hz = 0.5;
    s.normalize_e0 = true;
    s.length = L;
    return s;
}

HamiltonianSpec transverse(int L) {
    HamiltonianSpec s = mixed(L);
    s.model = Model::transverse_field_ising;
    s.hz = 0.0;
    return s;
}

} // namespace

TEST_CASE("squared_commutator at t = 0") {
    auto w = local_pauli_mpo(7, 4, Pauli::X);
    CHECK(squared_commutator(w, 2, Pauli::Z) == 0.0);
    CHECK(squared_commutator(w, 4, Pauli::X) == 0.0);
    CHECK(squared_commutator(w, 4, Pauli::Z) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(squared_commutator(w, 4, Pauli::Y) == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(clamp_for_display(-5e-10) == 0.0);
    CHECK(clamp_for_display(-2e-9) == -2e-9);
    CHECK(clamp_for_display(0.3) == 0.3);
}

TEST_CASE("squared_commutator: local superoperator form against the trace form") {
    auto s = mixed(8);
    EdSystem sys(s);
    const CMatrix w = sys.heisenberg_operator(4, Pauli::X, 1.7);
    auto mpo = mpo_from_dense(w, 8);
    for(Pauli q : {Pauli::X, Pauli::Y, Pauli::Z})
        for(int r = 1; r <= 8; ++r) {
            const CMatrix v = dense_pauli(8, r, q);
            const CMatrix comm = w * v - v * w;
            const double trace_form = (comm.adjoint() * comm).trace().real() / 256.0;
            const double c = squared_commutator(mpo, r, q);
            CHECK(std::abs(c - trace_form) < 1e-9);
            CHECK(std::abs(c - (2.0 - 2.0 * expectation_local_superop(mpo, r, pauli_matrix(q)).real())) < 1e-9);
        }
    auto scaled = mpo;
    scaled.site(1) = cplx(3.0, 0.0) * scaled.site(1);
    scaled.set_ortho_center(std::nullopt);
    CHECK(std::abs(squared_commutator(scaled, 6, Pauli::Z) - squared_commutator(mpo, 6, Pauli::Z)) < 1e-12);
}

TEST_CASE("otoc grid bookkeeping") {
    auto g = make_otoc_grid(3, {3}, Pauli::X);
    g.append(0.0, local_pauli_mpo(5, 3, Pauli::X));
    REQUIRE(g.values.size() == 1);
    REQUIRE(g.values[0].size() == 1);
    CHECK(g.values[0][0] == 0.0);
    CHECK(g.norms[0] == doctest::Approx(1.0));
    CHECK_NOTHROW(g.check_range());
    auto bad = make_otoc_grid(3, {6}, Pauli::X);
    CHECK_THROWS_AS(bad.append(0.0, local_pauli_mpo(5, 3, Pauli::X)), MpoError);
}

TEST_CASE("otoc grid matches ED at L = 9") {
    auto s = mixed(9);
    const double dt = 0.0025;
    std::vector<int> probes{1, 2, 3, 4, 5, 6, 7, 8, 9};
    auto grid = make_otoc_grid(5, probes, Pauli::Z);
    (void)evolve(local_pauli_mpo(9, 5, Pauli::X), build_trotter_plan(s, dt, 2), 3.0, Truncation{1024, 1e-14}, 200,
                 {otoc_recorder(grid)});
    REQUIRE(grid.times.size() == 7);
    EdSystem sys(s);
    const auto ed = sys.otoc_grid(5, Pauli::X, probes, Pauli::Z, grid.times);
    double worst = 0.0;
    for(std::size_t p = 0; p < probes.size(); ++p)
        for(std::size_t k = 0; k < grid.times.size(); ++k) worst = std::max(worst, std::abs(ed[p][k] - grid.values[p][k]));
    CHECK(worst <= 1e-6);
    grid.check_range();
}

TEST_CASE("early growth is insensitive to chi") {
    auto s = mixed(31);
    std::vector<int> probes;
    for(int q = 16; q <= 31; ++q) probes.push_back(q);
    auto small = make_otoc_grid(16, probes, Pauli::Z);
    auto large = make_otoc_grid(16, probes, Pauli::Z);
    const auto plan = build_trotter_plan(s, 0.05, 2);
    (void)evolve(local_pauli_mpo(31, 16, Pauli::X), plan, 10.0, Truncation{4, 1e-14}, 4, {otoc_recorder(small)});
    (void)evolve(local_pauli_mpo(31, 16, Pauli::X), plan, 10.0, Truncation{32, 1e-14}, 4, {otoc_recorder(large)});
    int compared = 0, outside = 0;
    double worst = 0.0;
    for(std::size_t p = 0; p < probes.size(); ++p)
        for(std::size_t k = 0; k < large.times.size(); ++k) {
            const double a = small.values[p][k], b = large.values[p][k];
            if(b > 1e-15 && b <= 0.1) {
                ++compared;
                worst = std::max(worst, std::abs(a - b) / b);
                if(std::abs(a - b) > 0.05 * b) ++outside;
            }
        }
    CHECK(compared > 50);
    INFO("worst relative deviation " << worst);
    CHECK(outside == 0);
}

TEST_CASE("front arrival is monotone in distance") {
    std::vector<int> probes;
    for(int q = 13; q <= 25; ++q) probes.push_back(q);
    auto grid = make_otoc_grid(13, probes, Pauli::Z);
    (void)evolve(local_pauli_mpo(25, 13, Pauli::X), build_trotter_plan(mixed(25), 0.05, 2), 12.0, Truncation{16, 1e-14}, 2,
                 {otoc_recorder(grid)});
    const auto arrive = arrival_times(grid, 1e-6);
    REQUIRE(arrive.front().has_value());
    int arrived = 0;
    bool gap = false;
    for(std::size_t p = 0; p < arrive.size(); ++p) {
        if(!arrive[p]) {
            gap = true;
            continue;
        }
        CHECK_FALSE(gap);
        ++arrived;
        if(p > 0 && arrive[p - 1]) CHECK(*arrive[p] >= *arrive[p - 1]);
    }
    CHECK(arrived >= 8);
}

TEST_CASE("entanglement profiles") {
    auto zero = make_entanglement_profile({1, 5, 10});
    zero.append(0.0, local_pauli_mpo(11, 6, Pauli::X));
    for(const auto &row : zero.s_vn) CHECK(row[0] == 0.0);
    CHECK_THROWS_AS(zero.append(0.0, local_pauli_mpo(9, 5, Pauli::X)), MpoError);

    std::vector<int> cuts;
    for(int c = 1; c < 21; ++c) cuts.push_back(c);
    auto tfi = make_entanglement_profile(cuts);
    (void)evolve(local_pauli_mpo(21, 11, Pauli::X), build_trotter_plan(transverse(21), 0.05, 2), 8.0, Truncation{16, 1e-14},
                 10, {entanglement_recorder(tfi)});
    for(std::size_t c = 0; c < cuts.size(); ++c)
        for(std::size_t k = 0; k < tfi.times.size(); ++k) {
            CHECK(tfi.s_vn[c][k] <= std::log(4.0) + 0.02);
            CHECK(tfi.s_vn[c][k] >= -1e-12);
            CHECK(tfi.s_renyi2[c][k] <= tfi.s_vn[c][k] + 1e-12);
        }
}

TEST_CASE("mixed-field entanglement saturates near log chi behind the front") {
    auto prof = make_entanglement_profile({10, 11, 12});
    (void)evolve(local_pauli_mpo(21, 11, Pauli::X), build_trotter_plan(mixed(21), 0.05, 2), 14.0, Truncation{32, 1e-14},
                 20, {entanglement_recorder(prof)});
    double peak = 0.0;
    for(const auto &row : prof.s_vn)
        for(double v : row) {
            CHECK(v <= std::log(32.0) + 1e-9);
            peak = std::max(peak, v);
        }
    CHECK(peak >= 0.98 * std::log(32.0));
}

TEST_CASE("renyi_bound_check") {
    auto s = mixed(8);
    auto far0 = renyi_bound_check(s, 4, 6, 0.0);
    CHECK(far0.lhs == 0.0);
    CHECK(far0.rhs == 0.0);
    CHECK(far0.defined);
    CHECK(far0.satisfied);
    CHECK(far0.region == std::vector<int>{7, 8});

    auto near0 = renyi_bound_check(s, 4, 6, 0.0, BoundSide::left);
    CHECK(near0.commutator_sum == doctest::Approx(8.0));
    CHECK_FALSE(near0.defined);
    CHECK_FALSE(near0.satisfied);
    CHECK(std::isnan(near0.rhs));

    for(double t : {0.5, 1.0, 1.5}) {
        auto chk = renyi_bound_check(s, 4, 6, t);
        if(chk.defined) CHECK(chk.satisfied);
        CHECK(chk.margin >= -1e-9);
    }
    CHECK_THROWS_AS((void)renyi_bound_check(mixed(11), 4, 6, 0.5), OracleError);
    CHECK_THROWS_AS((void)renyi_bound_check(s, 4, 8, 0.5), OracleError);
}

TEST_CASE("linearized bound with a fitted decay constant") {
    const std::vector<double> geometric{1.0, std::exp(-1.2), std::exp(-2.4), std::exp(-3.6)};
    CHECK(fit_decay_constant(geometric).value() == doctest::Approx(0.6));
    CHECK_FALSE(fit_decay_constant({1.0}).has_value());
    CHECK_FALSE(fit_decay_constant({1.0, 0.0}).has_value());
    CHECK(linearized_renyi_bound(0.1, 0.6) == doctest::Approx(0.1 / (2.0 * (1.0 - std::exp(-1.2)))));
    CHECK_THROWS((void)linearized_renyi_bound(0.1, 0.0));

    // Boundary term times the geometric prefactor tracks the full half-sum.
    auto s = mixed(10);
    for(double t : {1.0, 1.5}) {
        auto chk = renyi_bound_check(s, 3, 6, t);
        const auto a = fit_decay_constant(chk.per_site);
        REQUIRE(a.has_value());
        CHECK(*a > 0.0);
        const double approx = linearized_renyi_bound(chk.per_site.front(), *a);
        const double half_sum = 0.5 * chk.commutator_sum;
        CHECK(approx / half_sum == doctest::Approx(1.0).epsilon(0.5));
    }
}
