#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "mpotoc/oracles.hpp"
#include "run_config.hpp"

using namespace mpotoc;
using namespace mpotoc::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    const auto dir = fs::temp_directory_path() / "mpotoc_test_cli";
    fs::create_directories(dir);
    return dir / name;
}

int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "mpotoc");
    std::vector<char *> argv;
    for(auto &a : args) argv.push_back(a.data());
    return main_entry(static_cast<int>(argv.size()), argv.data());
}

RunConfig mixed(int length) {
    RunConfig c;
    c.spec.length = length;
    return c;
}

std::size_t data_rows(const fs::path &p) {
    std::ifstream in(p);
    std::string line;
    std::size_t n = 0;
    bool header = false;
    while(std::getline(in, line)) {
        if(line.empty() || line[0] == '#') continue;
        if(!header) {
            header = true;
            continue;
        }
        ++n;
    }
    return n;
}

} // namespace

TEST_CASE("config parsing is strict") {
    CHECK_THROWS_AS((void)parse_config(json{{"bogus", 1}}), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json{{"chi", "many"}}), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json{{"evolved_pauli", "Q"}}), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json{{"model", "potts"}}), ConfigError);
    CHECK_THROWS_AS((void)parse_config(json::array()), ConfigError);

    const auto c = parse_config(json{{"model", "heisenberg_xxx"}, {"length", 9}});
    CHECK(c.spec.hx == 0.0);
    CHECK_FALSE(c.spec.normalize_e0);
    CHECK_NOTHROW(c.validate());

    RunConfig bad = mixed(9);
    bad.probe_sites = {0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = mixed(9);
    bad.order = 3;
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    const auto out = scratch("unused.csv").string();
    CHECK(invoke({"otoc", "--set", "bogus=1", "-o", out}) == kConfigInvalid);
    CHECK(invoke({"otoc", "--length", "1", "-o", out}) == kConfigInvalid);
    CHECK(invoke({"nonsense"}) == kConfigInvalid);
    CHECK(invoke({"oracle-free", "--length", "9", "-o", out}) == kConfigInvalid);
    CHECK(invoke({"fit", "--input", scratch("missing.csv").string()}) == kConfigInvalid);
}

TEST_CASE("physics hash tracks physics fields only") {
    const RunConfig a = mixed(21);
    RunConfig b = a;
    b.output = "elsewhere.csv";
    b.checkpoint = "ck";
    b.checkpoint_every = 7;
    CHECK(a.physics_hash() == b.physics_hash());
    for(auto mutate : std::vector<std::function<void(RunConfig &)>>{
            [](RunConfig &c) { c.dt = 0.01; }, [](RunConfig &c) { c.chi = 8; },
            [](RunConfig &c) { c.spec.hz = 0.4; }, [](RunConfig &c) { c.record_stride = 3; },
            [](RunConfig &c) { c.probe_pauli = Pauli::Z; }, [](RunConfig &c) { c.seed = 7; }}) {
        RunConfig m = a;
        mutate(m);
        CHECK(m.physics_hash() != a.physics_hash());
    }
    // the default base site and an explicit centre are the same run
    RunConfig centre = a;
    centre.base_site = 11;
    CHECK(centre.physics_hash() == a.physics_hash());
}

TEST_CASE("CSV round trip is bit exact") {
    OtocGrid g = make_otoc_grid(5, {2, 5, 9}, Pauli::Z, Pauli::Y);
    const std::vector<double> odd = {0.0, 1.0 / 3.0, 4.9e-324, 2.0 - 1e-16, 1e-300, std::nextafter(1.0, 2.0)};
    for(int k = 0; k < 4; ++k) {
        g.times.push_back(0.1 * k);
        g.norms.push_back(1.0 - k * 1e-17);
        for(std::size_t p = 0; p < 3; ++p) g.values[p].push_back(odd[(k + p) % odd.size()]);
    }
    RunConfig cfg = mixed(9);
    cfg.base_site = 5;
    const auto path = scratch("round.csv");
    write_otoc_csv(g, path.string(), metadata_header(cfg));
    const auto back = read_otoc_csv(path);
    CHECK(back.base_site == 5);
    CHECK(back.probe_sites == g.probe_sites);
    CHECK(back.times == g.times);
    CHECK(back.norms == g.norms);
    CHECK(back.values == g.values);

    EntanglementProfile e = make_entanglement_profile({1, 4});
    e.times = {0.0, 0.5};
    e.s_vn = {{0.0, 1.0 / 7.0}, {0.0, std::log(4.0)}};
    e.s_renyi2 = {{0.0, 1e-310}, {0.0, 0.3}};
    const auto epath = scratch("ent.csv");
    write_entanglement_csv(e, epath.string(), {});
    const auto eb = read_entanglement_csv(epath);
    CHECK(eb.cuts == e.cuts);
    CHECK(eb.times == e.times);
    CHECK(eb.s_vn == e.s_vn);
    CHECK(eb.s_renyi2 == e.s_renyi2);
}

TEST_CASE("row counts and the t_max = 0 run") {
    RunConfig c = mixed(11);
    c.command = Command::otoc;
    c.dt = 0.05;
    c.t_max = 1.0;
    c.chi = 8;
    c.record_stride = 3;
    c.output = scratch("rows.csv").string();
    REQUIRE(run(c, std::cerr) == kOk);
    // steps 3, 6, ..., 18 plus the last step 20 plus t = 0
    CHECK(recorded_times(c).size() == 8);
    CHECK(data_rows(c.output) == 8 * 11);

    c.command = Command::evolve;
    c.t_max = 0.0;
    c.otoc_output = scratch("zero_otoc.csv").string();
    c.output = scratch("zero_ent.csv").string();
    REQUIRE(run(c, std::cerr) == kOk);
    const auto e = read_entanglement_csv(c.output);
    REQUIRE(e.times.size() == 1);
    CHECK(e.cuts.size() == 10);
    for(const auto &s : e.s_vn) CHECK(s[0] == 0.0);
    const auto g = read_otoc_csv(c.otoc_output);
    REQUIRE(g.times.size() == 1);
    for(const auto &s : g.values) CHECK(s[0] == 0.0);
    CHECK(g.norms[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("fit recovers the shipped synthetic surface") {
    const auto out = scratch("fit.json");
    REQUIRE(invoke({"fit", "--input", std::string(MPOTOC_DATA_DIR) + "/synthetic_xs_form.csv", "-o", out.string()}) ==
            kOk);
    std::ifstream in(out);
    const auto j = json::parse(in);
    CHECK(j["converged"].get<bool>());
    CHECK(std::abs(j["lambda"].get<double>() - 3.8) < 1e-6);
    CHECK(std::abs(j["p"].get<double>() - 0.67) < 1e-6);
    CHECK(std::abs(j["v_B"].get<double>() - 0.67) < 1e-6);
    CHECK(std::abs(j["x0"].get<double>() - 1.8) < 1e-6);
    CHECK(j["seed"].get<std::uint64_t>() == 12345);

    const auto col = scratch("collapse.csv");
    REQUIRE(invoke({"collapse", "--input", std::string(MPOTOC_DATA_DIR) + "/synthetic_xs_form.csv", "-o",
                    col.string()}) == kOk);
    CHECK(data_rows(col) == j["n_points"].get<std::size_t>());
}

TEST_CASE("checkpoint and resume reproduce the uninterrupted run") {
    RunConfig c = mixed(13);
    c.command = Command::evolve;
    c.dt = 0.05;
    c.t_max = 2.0;
    c.chi = 12;
    c.record_stride = 5;
    const auto full = run_trajectory(c, true, true);

    RunConfig part = c;
    part.checkpoint = scratch("ck.mpo").string();
    part.halt_after_steps = 17;
    const auto first = run_trajectory(part, true, true);
    CHECK(first.halted);
    CHECK(first.steps_done == 17);

    part.halt_after_steps = -1;
    part.resume = true;
    const auto rest = run_trajectory(part, true, true);
    CHECK_FALSE(rest.halted);
    REQUIRE(rest.grid.times == full.grid.times);
    double worst = 0.0;
    for(std::size_t p = 0; p < full.grid.values.size(); ++p)
        for(std::size_t k = 0; k < full.grid.times.size(); ++k)
            worst = std::max(worst, std::abs(rest.grid.values[p][k] - full.grid.values[p][k]));
    for(std::size_t q = 0; q < full.profile.s_vn.size(); ++q)
        for(std::size_t k = 0; k < full.profile.times.size(); ++k)
            worst = std::max(worst, std::abs(rest.profile.s_vn[q][k] - full.profile.s_vn[q][k]));
    CHECK(worst <= 1e-12);

    RunConfig other = part;
    other.chi = 10;
    CHECK_THROWS_AS((void)run_trajectory(other, true, true), ConfigError);
}

TEST_CASE("bound-check command") {
    RunConfig c = mixed(6);
    c.command = Command::bound_check;
    c.base_site = 3;
    c.times = {0.5, 1.0};
    c.output = scratch("bound.csv").string();
    REQUIRE(run(c, std::cerr) == kOk);
    CHECK(data_rows(c.output) == 2 * 5);
    std::ifstream in(c.output);
    std::string line;
    int violations = 0;
    while(std::getline(in, line)) {
        if(line.empty() || line[0] == '#' || line[0] == 't') continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<std::string> cells;
        while(std::getline(ss, cell, ',')) cells.push_back(cell);
        if(cells[4] == "1" && cells[5] == "0") ++violations;
    }
    CHECK(violations == 0);
}

TEST_CASE("otoc command matches oracle-ed") {
    RunConfig c = mixed(9);
    c.chi = 64;
    c.dt = 0.0025;
    c.t_max = 3.0;
    c.record_stride = 100;
    c.command = Command::otoc;
    c.output = scratch("mpo.csv").string();
    REQUIRE(run(c, std::cerr) == kOk);
    c.command = Command::oracle_ed;
    c.output = scratch("ed.csv").string();
    REQUIRE(run(c, std::cerr) == kOk);
    const auto a = read_otoc_csv(scratch("mpo.csv"));
    const auto b = read_otoc_csv(scratch("ed.csv"));
    REQUIRE(a.times == b.times);
    REQUIRE(a.probe_sites == b.probe_sites);
    double worst = 0.0;
    for(std::size_t p = 0; p < a.values.size(); ++p)
        for(std::size_t k = 0; k < a.times.size(); ++k)
            worst = std::max(worst, std::abs(a.values[p][k] - b.values[p][k]));
    INFO("max |C_mpo - C_ed| = " << worst);
    CHECK(worst <= 1e-6);
}

TEST_CASE("oracle-free at t = 0 and against the library") {
    RunConfig c = mixed(21);
    c.command = Command::oracle_free;
    c.spec.model = Model::transverse_field_ising;
    c.spec.hz = 0.0;
    c.spec.hx = 1.0;
    c.spec.normalize_e0 = false;
    c.dt = 0.25;
    c.t_max = 1.0;
    c.record_stride = 1;
    c.output = scratch("ff.csv").string();
    REQUIRE(run(c, std::cerr) == kOk);
    const auto g = read_otoc_csv(c.output);
    REQUIRE(g.times.size() == 5);
    for(std::size_t p = 0; p < g.probe_sites.size(); ++p) {
        CHECK(g.values[p][0] == doctest::Approx(0.0));
        const int x = g.probe_sites[p] - g.base_site;
        CHECK(g.values[p][4] == doctest::Approx(free_fermion_otoc(FreeFermionSpec{1.0, 1024}, x, 2.0)).epsilon(1e-14));
    }
}
