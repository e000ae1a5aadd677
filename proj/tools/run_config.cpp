#include "run_config.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "mpotoc/oracles.hpp"

namespace mpotoc::cli {

namespace {

using nlohmann::json;

template <class T> T take(const json &j, const std::string &key) {
    try {
        return j.get<T>();
    } catch(const json::exception &) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

Pauli take_pauli(const json &j, const std::string &key) {
    const auto s = take<std::string>(j, key);
    if(s.size() != 1) throw ConfigError("config key '" + key + "' must be one of I, X, Y, Z");
    try {
        return parse_pauli(s[0]);
    } catch(const std::exception &) {
        throw ConfigError("config key '" + key + "' must be one of I, X, Y, Z");
    }
}

BoundSide parse_side(const std::string &s) {
    if(s == "far") return BoundSide::far;
    if(s == "left") return BoundSide::left;
    if(s == "right") return BoundSide::right;
    throw ConfigError("bound_side must be far, left or right");
}

std::string side_name(BoundSide s) {
    switch(s) {
    case BoundSide::far: return "far";
    case BoundSide::left: return "left";
    case BoundSide::right: return "right";
    }
    return "far";
}

std::string fnv1a_hex(const std::string &s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for(unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Opens `path` for writing, or hands back std::cout for "-".
class Sink {
public:
    explicit Sink(const std::string &path) {
        if(path == "-" || path.empty()) return;
        file_.open(path);
        if(!file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    std::ostream &stream() { return file_.is_open() ? static_cast<std::ostream &>(file_) : std::cout; }
    void close() {
        if(!file_.is_open()) return;
        file_.close();
        if(!file_) throw std::runtime_error("write failed");
    }

private:
    std::ofstream file_;
};

std::vector<std::string> split_csv(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while(std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string &s) {
    // strtod keeps subnormals that stod rejects
    char *end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if(s.empty() || end != s.c_str() + s.size()) throw std::runtime_error("malformed number '" + s + "'");
    return v;
}

struct CsvTable {
    std::map<std::string, std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_table(const std::filesystem::path &path) {
    std::ifstream in(path);
    if(!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    CsvTable t;
    std::string line;
    while(std::getline(in, line)) {
        if(line.empty()) continue;
        if(line[0] == '#') {
            const auto colon = line.find(':');
            if(colon != std::string::npos) {
                auto key = line.substr(1, colon - 1);
                auto val = line.substr(colon + 1);
                key.erase(0, key.find_first_not_of(' '));
                val.erase(0, val.find_first_not_of(' '));
                t.meta[key] = val;
            }
            continue;
        }
        if(t.columns.empty()) {
            t.columns = split_csv(line);
            continue;
        }
        auto cells = split_csv(line);
        if(cells.size() != t.columns.size()) throw std::runtime_error("ragged CSV row in '" + path.string() + "'");
        t.rows.push_back(std::move(cells));
    }
    return t;
}

json grid_to_json(const OtocGrid &g) { return {{"times", g.times}, {"values", g.values}, {"norms", g.norms}}; }

json profile_to_json(const EntanglementProfile &p) {
    return {{"times", p.times}, {"s_vn", p.s_vn}, {"s_renyi2", p.s_renyi2}};
}

std::filesystem::path sidecar_path(const std::string &checkpoint) { return checkpoint + ".json"; }

void write_checkpoint(const RunConfig &cfg, const MatrixProductOperator &w, long step, const OtocGrid &grid,
                      const EntanglementProfile &profile) {
    write_snapshot_file(w, cfg.checkpoint);
    json side = {{"step", step},
                 {"physics_hash", cfg.physics_hash()},
                 {"tool", kToolVersion},
                 {"otoc", grid_to_json(grid)},
                 {"entanglement", profile_to_json(profile)}};
    std::ofstream out(sidecar_path(cfg.checkpoint));
    out << side.dump();
    if(!out) throw std::runtime_error("cannot write checkpoint sidecar");
}

XsInit xs_init(const RunConfig &cfg, const OtocGrid &grid) {
    XsInit init;
    try {
        init.v_b = estimate_velocity(grid).v_b;
    } catch(const FitError &) {
    }
    if(cfg.init_lambda) init.lambda = *cfg.init_lambda;
    if(cfg.init_p) init.p = *cfg.init_p;
    if(cfg.init_v_b) init.v_b = *cfg.init_v_b;
    if(cfg.init_x0) init.x0 = *cfg.init_x0;
    return init;
}

FitResult do_fit(const RunConfig &cfg, const FitWindow &window, const OtocGrid &grid) {
    FitOptions opt;
    opt.seed = cfg.seed;
    opt.restarts = cfg.restarts;
    if(cfg.fit_model == FitModel::xs_form) return fit_xs_form(window, xs_init(cfg, grid), opt);
    return fit_competitor(window, cfg.fit_model, opt);
}

} // namespace

std::string command_name(Command c) {
    switch(c) {
    case Command::evolve: return "evolve";
    case Command::otoc: return "otoc";
    case Command::entanglement: return "entanglement";
    case Command::fit: return "fit";
    case Command::collapse: return "collapse";
    case Command::oracle_ed: return "oracle-ed";
    case Command::oracle_free: return "oracle-free";
    case Command::bound_check: return "bound-check";
    }
    return "unknown";
}

Command parse_command(const std::string &name) {
    for(Command c : {Command::evolve, Command::otoc, Command::entanglement, Command::fit, Command::collapse,
                     Command::oracle_ed, Command::oracle_free, Command::bound_check})
        if(command_name(c) == name) return c;
    throw ConfigError("unknown command '" + name + "'");
}

int RunConfig::resolved_base_site() const { return base_site > 0 ? base_site : (spec.length + 1) / 2; }

std::vector<int> RunConfig::resolved_probes() const {
    if(!probe_sites.empty()) return probe_sites;
    std::vector<int> all;
    for(int r = 1; r <= spec.length; ++r) all.push_back(r);
    return all;
}

std::vector<int> RunConfig::resolved_cuts() const {
    if(!cuts.empty()) return cuts;
    std::vector<int> all;
    for(int c = 1; c < spec.length; ++c) all.push_back(c);
    return all;
}

double RunConfig::resolved_time_factor() const {
    return time_factor ? *time_factor : unit_2j_factor(spec.J) * spec.prefactor();
}

void RunConfig::validate() const {
    spec.validate();
    const int L = spec.length;
    if(chi < 1) throw ConfigError("chi must be >= 1");
    if(!(eps_rel >= 0.0) || !std::isfinite(eps_rel)) throw ConfigError("eps_rel must be finite and >= 0");
    if(!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
    if(order != 1 && order != 2) throw ConfigError("order must be 1 or 2");
    if(!(t_max >= 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be finite and >= 0");
    if(record_stride < 1) throw ConfigError("record_stride must be >= 1");
    if(base_site < 0 || base_site > L) throw ConfigError("base_site outside the chain");
    for(int q : probe_sites)
        if(q < 1 || q > L) throw ConfigError("probe site " + std::to_string(q) + " outside the chain");
    for(int c : cuts)
        if(c < 1 || c >= L) throw ConfigError("cut " + std::to_string(c) + " outside 1..L-1");
    try {
        window.validate();
    } catch(const FitError &e) {
        throw ConfigError(e.what());
    }
    if(restarts < 1) throw ConfigError("restarts must be >= 1");
    if(quadrature_points < 1024 || (quadrature_points & (quadrature_points - 1)) != 0)
        throw ConfigError("quadrature_points must be a power of 2 >= 1024");
    if(time_factor && !(*time_factor > 0.0)) throw ConfigError("time_factor must be positive");
    if(checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
    if((resume || checkpoint_every > 0) && checkpoint.empty()) throw ConfigError("checkpointing needs a checkpoint path");
    if(output.empty()) throw ConfigError("output path is empty");

    switch(command) {
    case Command::fit:
    case Command::collapse:
        if(input.empty()) throw ConfigError("this command needs an input CSV");
        if(!std::filesystem::exists(input)) throw ConfigError("input '" + input + "' does not exist");
        break;
    case Command::oracle_ed:
        if(L > kMaxEdLength) throw ConfigError("oracle-ed is limited to L <= 12");
        break;
    case Command::bound_check:
        if(L > kMaxEdEntanglementLength) throw ConfigError("bound-check is limited to L <= 10");
        if(times.empty()) throw ConfigError("bound-check needs a list of times");
        for(double t : times)
            if(!std::isfinite(t)) throw ConfigError("times must be finite");
        break;
    case Command::oracle_free:
        if(spec.model == Model::heisenberg_xxx || spec.hz != 0.0)
            throw ConfigError("oracle-free needs the transverse-field chain (hz = 0)");
        if(!(spec.J > 0.0) || !(spec.hx > 0.0)) throw ConfigError("oracle-free needs J > 0 and hx > 0");
        break;
    default: break;
    }
}

json RunConfig::physics_json() const {
    json j = {{"model", model_name(spec.model)},
              {"J", spec.J},
              {"hx", spec.hx},
              {"hz", spec.hz},
              {"normalize_e0", spec.normalize_e0},
              {"length", spec.length},
              {"chi", chi},
              {"eps_rel", eps_rel},
              {"dt", dt},
              {"order", order},
              {"t_max", t_max},
              {"record_stride", record_stride},
              {"evolved_pauli", std::string(1, pauli_label(evolved_pauli))},
              {"base_site", resolved_base_site()},
              {"probe_sites", resolved_probes()},
              {"probe_pauli", std::string(1, pauli_label(probe_pauli))},
              {"cuts", resolved_cuts()},
              {"c_min", window.c_min},
              {"c_max", window.c_max},
              {"x_min", window.x_min},
              {"leading_edge_only", window.leading_edge_only},
              {"envelope", window.envelope},
              {"envelope_width", window.envelope_width},
              {"fit_model", fit_model_name(fit_model)},
              {"restarts", restarts},
              {"seed", seed},
              {"quadrature_points", quadrature_points},
              {"time_factor", resolved_time_factor()},
              {"times", times},
              {"bound_side", side_name(bound_side)}};
    if(init_lambda) j["init_lambda"] = *init_lambda;
    if(init_p) j["init_p"] = *init_p;
    if(init_v_b) j["init_v_B"] = *init_v_b;
    if(init_x0) j["init_x0"] = *init_x0;
    return j;
}

std::string RunConfig::physics_hash() const { return fnv1a_hex(physics_json().dump()); }

json RunConfig::to_json() const {
    json j = physics_json();
    j["command"] = command_name(command);
    j["input"] = input;
    j["output"] = output;
    j["otoc_output"] = otoc_output;
    j["snapshot_output"] = snapshot_output;
    j["checkpoint"] = checkpoint;
    j["checkpoint_every"] = checkpoint_every;
    j["resume"] = resume;
    j["halt_after_steps"] = halt_after_steps;
    return j;
}

RunConfig parse_config(const json &j) {
    if(!j.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig c;
    for(const auto &[key, v] : j.items()) {
        if(key == "command") c.command = parse_command(take<std::string>(v, key));
        else if(key == "model") {
            try {
                c.spec.model = parse_model(take<std::string>(v, key));
            } catch(const SpecError &e) {
                throw ConfigError(e.what());
            }
        } else if(key == "J") c.spec.J = take<double>(v, key);
        else if(key == "hx") c.spec.hx = take<double>(v, key);
        else if(key == "hz") c.spec.hz = take<double>(v, key);
        else if(key == "normalize_e0") c.spec.normalize_e0 = take<bool>(v, key);
        else if(key == "length") c.spec.length = take<int>(v, key);
        else if(key == "chi") {
            const auto chi = take<long>(v, key);
            if(chi < 1) throw ConfigError("chi must be >= 1");
            c.chi = static_cast<std::size_t>(chi);
        } else if(key == "eps_rel") c.eps_rel = take<double>(v, key);
        else if(key == "dt") c.dt = take<double>(v, key);
        else if(key == "order") c.order = take<int>(v, key);
        else if(key == "t_max") c.t_max = take<double>(v, key);
        else if(key == "record_stride") c.record_stride = take<long>(v, key);
        else if(key == "evolved_pauli") c.evolved_pauli = take_pauli(v, key);
        else if(key == "base_site") c.base_site = take<int>(v, key);
        else if(key == "probe_sites") c.probe_sites = take<std::vector<int>>(v, key);
        else if(key == "probe_pauli") c.probe_pauli = take_pauli(v, key);
        else if(key == "cuts") c.cuts = take<std::vector<int>>(v, key);
        else if(key == "c_min") c.window.c_min = take<double>(v, key);
        else if(key == "c_max") c.window.c_max = take<double>(v, key);
        else if(key == "x_min") c.window.x_min = take<int>(v, key);
        else if(key == "leading_edge_only") c.window.leading_edge_only = take<bool>(v, key);
        else if(key == "envelope") c.window.envelope = take<bool>(v, key);
        else if(key == "envelope_width") c.window.envelope_width = take<int>(v, key);
        else if(key == "fit_model") {
            try {
                c.fit_model = parse_fit_model(take<std::string>(v, key));
            } catch(const FitError &e) {
                throw ConfigError(e.what());
            }
        } else if(key == "init_lambda") c.init_lambda = take<double>(v, key);
        else if(key == "init_p") c.init_p = take<double>(v, key);
        else if(key == "init_v_B") c.init_v_b = take<double>(v, key);
        else if(key == "init_x0") c.init_x0 = take<double>(v, key);
        else if(key == "restarts") c.restarts = take<int>(v, key);
        else if(key == "seed") c.seed = take<std::uint64_t>(v, key);
        else if(key == "quadrature_points") c.quadrature_points = take<int>(v, key);
        else if(key == "time_factor") c.time_factor = take<double>(v, key);
        else if(key == "times") c.times = take<std::vector<double>>(v, key);
        else if(key == "bound_side") c.bound_side = parse_side(take<std::string>(v, key));
        else if(key == "input") c.input = take<std::string>(v, key);
        else if(key == "output") c.output = take<std::string>(v, key);
        else if(key == "otoc_output") c.otoc_output = take<std::string>(v, key);
        else if(key == "snapshot_output") c.snapshot_output = take<std::string>(v, key);
        else if(key == "checkpoint") c.checkpoint = take<std::string>(v, key);
        else if(key == "checkpoint_every") c.checkpoint_every = take<long>(v, key);
        else if(key == "resume") c.resume = take<bool>(v, key);
        else if(key == "halt_after_steps") c.halt_after_steps = take<long>(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    // model-dependent defaults for fields left out
    if(c.spec.model != Model::mixed_field_ising && !j.contains("hz")) c.spec.hz = 0.0;
    if(c.spec.model == Model::heisenberg_xxx) {
        if(!j.contains("hx")) c.spec.hx = 0.0;
        if(!j.contains("normalize_e0")) c.spec.normalize_e0 = false;
    }
    return c;
}

json load_json_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if(!in) throw ConfigError("cannot read config '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch(const json::exception &e) {
        throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
    }
}

std::vector<std::string> metadata_header(const RunConfig &cfg) {
    return {std::string("tool: ") + kToolVersion,
            "command: " + command_name(cfg.command),
            "config_hash: " + cfg.physics_hash(),
            "wall_clock: " + utc_now(),
            "seed: " + std::to_string(cfg.seed),
            "base_site: " + std::to_string(cfg.resolved_base_site()),
            "config: " + cfg.physics_json().dump()};
}

void write_otoc_csv(const OtocGrid &grid, std::ostream &out, const std::vector<std::string> &header) {
    if(grid.times.empty() || grid.probe_sites.empty()) throw std::runtime_error("empty OTOC grid");
    for(const auto &h : header) out << "# " << h << '\n';
    out << "t,x,C,norm\n";
    for(std::size_t k = 0; k < grid.times.size(); ++k)
        for(std::size_t p = 0; p < grid.probe_sites.size(); ++p)
            out << g17(grid.times[k]) << ',' << (grid.probe_sites[p] - grid.base_site) << ',' << g17(grid.values[p][k])
                << ',' << g17(grid.norms[k]) << '\n';
}

void write_otoc_csv(const OtocGrid &grid, const std::string &path, const std::vector<std::string> &header) {
    Sink s(path);
    write_otoc_csv(grid, s.stream(), header);
    s.close();
}

OtocGrid read_otoc_csv(const std::filesystem::path &path) {
    const auto t = read_table(path);
    if(t.columns != std::vector<std::string>{"t", "x", "C", "norm"})
        throw std::runtime_error("'" + path.string() + "' is not an OTOC CSV");
    int base = 0;
    if(auto it = t.meta.find("base_site"); it != t.meta.end()) base = std::stoi(it->second);
    OtocGrid g = make_otoc_grid(base, {}, Pauli::X);
    if(auto it = t.meta.find("config"); it != t.meta.end()) {
        const auto cj = json::parse(it->second, nullptr, false);
        if(cj.is_object() && cj.contains("probe_pauli")) g.probe_pauli = parse_pauli(cj["probe_pauli"].get<std::string>()[0]);
        if(cj.is_object() && cj.contains("evolved_pauli"))
            g.evolved_pauli = parse_pauli(cj["evolved_pauli"].get<std::string>()[0]);
    }
    std::map<int, std::size_t> probe_index;
    for(const auto &row : t.rows) {
        const double time = parse_double(row[0]);
        const int x = std::stoi(row[1]);
        if(g.times.empty() || g.times.back() != time) {
            g.times.push_back(time);
            g.norms.push_back(parse_double(row[3]));
        }
        auto [it, fresh] = probe_index.try_emplace(x, g.probe_sites.size());
        if(fresh) {
            g.probe_sites.push_back(base + x);
            g.values.emplace_back();
        }
        auto &series = g.values[it->second];
        if(series.size() + 1 != g.times.size()) throw std::runtime_error("OTOC CSV rows are not a full grid");
        series.push_back(parse_double(row[2]));
    }
    for(const auto &s : g.values)
        if(s.size() != g.times.size()) throw std::runtime_error("OTOC CSV rows are not a full grid");
    return g;
}

void write_entanglement_csv(const EntanglementProfile &p, std::ostream &out, const std::vector<std::string> &header) {
    if(p.times.empty() || p.cuts.empty()) throw std::runtime_error("empty entanglement profile");
    for(const auto &h : header) out << "# " << h << '\n';
    out << "t,cut,S_vn,S_renyi2\n";
    for(std::size_t k = 0; k < p.times.size(); ++k)
        for(std::size_t c = 0; c < p.cuts.size(); ++c)
            out << g17(p.times[k]) << ',' << p.cuts[c] << ',' << g17(p.s_vn[c][k]) << ',' << g17(p.s_renyi2[c][k]) << '\n';
}

void write_entanglement_csv(const EntanglementProfile &p, const std::string &path,
                            const std::vector<std::string> &header) {
    Sink s(path);
    write_entanglement_csv(p, s.stream(), header);
    s.close();
}

EntanglementProfile read_entanglement_csv(const std::filesystem::path &path) {
    const auto t = read_table(path);
    if(t.columns != std::vector<std::string>{"t", "cut", "S_vn", "S_renyi2"})
        throw std::runtime_error("'" + path.string() + "' is not an entanglement CSV");
    EntanglementProfile p;
    std::map<int, std::size_t> cut_index;
    for(const auto &row : t.rows) {
        const double time = parse_double(row[0]);
        const int cut = std::stoi(row[1]);
        if(p.times.empty() || p.times.back() != time) p.times.push_back(time);
        auto [it, fresh] = cut_index.try_emplace(cut, p.cuts.size());
        if(fresh) {
            p.cuts.push_back(cut);
            p.s_vn.emplace_back();
            p.s_renyi2.emplace_back();
        }
        p.s_vn[it->second].push_back(parse_double(row[2]));
        p.s_renyi2[it->second].push_back(parse_double(row[3]));
    }
    for(const auto &s : p.s_vn)
        if(s.size() != p.times.size()) throw std::runtime_error("entanglement CSV rows are not a full grid");
    return p;
}

std::vector<double> recorded_times(const RunConfig &cfg) {
    const long n = steps_for(cfg.t_max, cfg.dt);
    std::vector<double> out{0.0};
    for(long s = 1; s <= n; ++s)
        if(s % cfg.record_stride == 0 || s == n) out.push_back(static_cast<double>(s) * cfg.dt);
    return out;
}

TrajectoryOutput run_trajectory(const RunConfig &cfg, bool want_otoc, bool want_entanglement) {
    cfg.validate();
    const int L = cfg.spec.length;
    const int base = cfg.resolved_base_site();
    const auto plan = build_trotter_plan(cfg.spec, cfg.dt, cfg.order);
    const long n = steps_for(cfg.t_max, cfg.dt);

    TrajectoryOutput out;
    out.grid = make_otoc_grid(base, want_otoc ? cfg.resolved_probes() : std::vector<int>{}, cfg.probe_pauli,
                              cfg.evolved_pauli);
    out.profile = make_entanglement_profile(want_entanglement ? cfg.resolved_cuts() : std::vector<int>{});
    auto record = [&](double t, const MatrixProductOperator &w) {
        if(want_otoc) out.grid.append(t, w);
        if(want_entanglement) out.profile.append(t, w);
    };

    MatrixProductOperator w0 = local_pauli_mpo(L, base, cfg.evolved_pauli);
    long start = 0;
    if(cfg.resume) {
        const json side = load_json_file(sidecar_path(cfg.checkpoint));
        if(side.value("physics_hash", "") != cfg.physics_hash())
            throw ConfigError("checkpoint was written for a different configuration");
        start = side.at("step").get<long>();
        w0 = read_snapshot_file(cfg.checkpoint);
        if(w0.length() != L) throw ConfigError("checkpoint chain length does not match");
        const auto &o = side.at("otoc");
        out.grid.times = o.at("times").get<std::vector<double>>();
        out.grid.norms = o.at("norms").get<std::vector<double>>();
        out.grid.values = o.at("values").get<std::vector<std::vector<double>>>();
        const auto &e = side.at("entanglement");
        out.profile.times = e.at("times").get<std::vector<double>>();
        out.profile.s_vn = e.at("s_vn").get<std::vector<std::vector<double>>>();
        out.profile.s_renyi2 = e.at("s_renyi2").get<std::vector<std::vector<double>>>();
        if(want_otoc && out.grid.values.size() != out.grid.probe_sites.size())
            throw ConfigError("checkpoint holds a different probe set");
        if(want_entanglement && out.profile.s_vn.size() != out.profile.cuts.size())
            throw ConfigError("checkpoint holds a different cut set");
    } else {
        record(0.0, w0);
    }

    Evolver ev(std::move(w0), plan, Truncation{cfg.chi, cfg.eps_rel}, start);
    for(long s = start + 1; s <= n; ++s) {
        (void)ev.step();
        if(s % cfg.record_stride == 0 || s == n) record(ev.time(), ev.state());
        const bool halt = cfg.halt_after_steps >= 0 && s >= cfg.halt_after_steps && s < n;
        if(!cfg.checkpoint.empty() && ((cfg.checkpoint_every > 0 && s % cfg.checkpoint_every == 0) || halt))
            write_checkpoint(cfg, ev.state(), s, out.grid, out.profile);
        if(halt) {
            out.halted = true;
            break;
        }
    }
    out.steps_done = ev.steps_done();
    out.final_state = ev.state();
    return out;
}

int run(const RunConfig &cfg, std::ostream &log) {
    try {
        cfg.validate();
        const auto header = metadata_header(cfg);
        switch(cfg.command) {
        case Command::evolve:
        case Command::otoc:
        case Command::entanglement: {
            const bool otoc = cfg.command == Command::otoc || !cfg.otoc_output.empty();
            const bool ent = cfg.command != Command::otoc;
            const auto tr = run_trajectory(cfg, otoc, ent);
            if(tr.halted) {
                log << "halted after step " << tr.steps_done << "; checkpoint at " << cfg.checkpoint << '\n';
                return kOk;
            }
            if(cfg.command == Command::otoc) {
                tr.grid.check_range();
                write_otoc_csv(tr.grid, cfg.output, header);
            } else {
                write_entanglement_csv(tr.profile, cfg.output, header);
                if(!cfg.otoc_output.empty()) write_otoc_csv(tr.grid, cfg.otoc_output, header);
            }
            if(!cfg.snapshot_output.empty() && tr.final_state) write_snapshot_file(*tr.final_state, cfg.snapshot_output);
            return kOk;
        }
        case Command::oracle_ed: {
            EdSystem sys(cfg.spec);
            auto grid = make_otoc_grid(cfg.resolved_base_site(), cfg.resolved_probes(), cfg.probe_pauli, cfg.evolved_pauli);
            grid.times = recorded_times(cfg);
            grid.values = sys.otoc_grid(grid.base_site, cfg.evolved_pauli, grid.probe_sites, cfg.probe_pauli, grid.times);
            grid.norms.assign(grid.times.size(), 1.0);
            write_otoc_csv(grid, cfg.output, header);
            return kOk;
        }
        case Command::oracle_free: {
            FreeFermionSpec ff{cfg.spec.hx / cfg.spec.J, cfg.quadrature_points};
            auto grid = make_otoc_grid(cfg.resolved_base_site(), cfg.resolved_probes(), Pauli::X, Pauli::X);
            grid.times = recorded_times(cfg);
            grid.norms.assign(grid.times.size(), 1.0);
            for(std::size_t p = 0; p < grid.probe_sites.size(); ++p)
                for(double t : grid.times)
                    grid.values[p].push_back(free_fermion_otoc(ff, grid.probe_sites[p] - grid.base_site,
                                                               free_fermion_time(t, cfg.resolved_time_factor())));
            auto h = header;
            h.push_back("note: analytic infinite-chain values for X against X; time_factor " +
                        g17(cfg.resolved_time_factor()));
            write_otoc_csv(grid, cfg.output, h);
            return kOk;
        }
        case Command::bound_check: {
            Sink s(cfg.output);
            for(const auto &h : header) s.stream() << "# " << h << '\n';
            s.stream() << "t,cut,lhs,rhs,defined,satisfied,margin\n";
            int violations = 0;
            for(double t : cfg.times)
                for(int cut : cfg.resolved_cuts()) {
                    const auto b = renyi_bound_check(cfg.spec, cfg.resolved_base_site(), cut, t, cfg.bound_side,
                                                     cfg.evolved_pauli);
                    if(b.defined && !b.satisfied) ++violations;
                    s.stream() << g17(t) << ',' << cut << ',' << g17(b.lhs) << ',' << g17(b.rhs) << ','
                               << (b.defined ? 1 : 0) << ',' << (b.satisfied ? 1 : 0) << ',' << g17(b.margin) << '\n';
                }
            s.close();
            log << "bound violations: " << violations << '\n';
            return kOk;
        }
        case Command::fit:
        case Command::collapse: {
            const auto grid = read_otoc_csv(cfg.input);
            FitWindow window;
            try {
                window = extract_window(grid, cfg.window);
            } catch(const FitError &e) {
                log << "error: " << e.what() << '\n';
                return kConfigInvalid;
            }
            const auto fit = do_fit(cfg, window, grid);
            if(cfg.command == Command::fit) {
                auto j = to_json(fit);
                j["seed"] = cfg.seed;
                j["tool"] = kToolVersion;
                j["config_hash"] = cfg.physics_hash();
                j["input"] = cfg.input;
                Sink s(cfg.output);
                s.stream() << j.dump(2) << '\n';
                s.close();
            } else {
                if(fit.model != FitModel::xs_form) throw ConfigError("collapse needs fit_model xs_form");
                const auto pts = collapse(window, fit);
                Sink s(cfg.output);
                for(const auto &h : header) s.stream() << "# " << h << '\n';
                s.stream() << "# fit: " << to_json(fit).dump() << '\n';
                s.stream() << "u,log_C\n";
                for(const auto &p : pts) s.stream() << g17(p.u) << ',' << g17(p.log_c) << '\n';
                s.close();
            }
            if(!fit.converged) {
                log << "fit did not converge; best parameters written\n";
                return kFitNotConverged;
            }
            return kOk;
        }
        }
        return kOk;
    } catch(const EvolutionAbort &e) {
        log << "numerical abort: " << e.what() << '\n';
        return kNumericalAbort;
    } catch(const NonFiniteError &e) {
        log << "numerical abort: " << e.what() << '\n';
        return kNumericalAbort;
    } catch(const ConfigError &e) {
        log << "config error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch(const SpecError &e) {
        log << "config error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch(const OracleError &e) {
        log << "config error: " << e.what() << '\n';
        return kConfigInvalid;
    } catch(const std::exception &e) {
        log << "error: " << e.what() << '\n';
        return 1;
    }
}

namespace {

bool is_list_key(const std::string &k) { return k == "probe_sites" || k == "cuts" || k == "times"; }

json flag_value(const std::string &key, const std::string &text) {
    const std::string src = is_list_key(key) && (text.empty() || text.front() != '[') ? "[" + text + "]" : text;
    auto v = json::parse(src, nullptr, false);
    if(v.is_discarded()) return json(text);
    return v;
}

} // namespace

int main_entry(int argc, char **argv) {
    CLI::App app{"Operator-spreading dynamics on matrix product operators", "mpotoc"};
    app.set_version_flag("--version", std::string(kToolVersion));
    std::string command;
    std::string config_path;
    std::vector<std::string> sets;
    app.add_option("command", command,
                   "evolve | otoc | entanglement | fit | collapse | oracle-ed | oracle-free | bound-check")
        ->required();
    app.add_option("-c,--config", config_path, "JSON run configuration");
    app.add_option("--set", sets, "key=value override, repeatable");

    const std::vector<std::pair<std::string, std::string>> flags = {
        {"--model", "model"},         {"--length", "length"},       {"--J", "J"},
        {"--hx", "hx"},               {"--hz", "hz"},               {"--normalize-e0", "normalize_e0"},
        {"--chi", "chi"},             {"--eps-rel", "eps_rel"},     {"--dt", "dt"},
        {"--order", "order"},         {"--t-max", "t_max"},         {"--record-stride", "record_stride"},
        {"--evolved-pauli", "evolved_pauli"}, {"--base-site", "base_site"}, {"--probes", "probe_sites"},
        {"--probe-pauli", "probe_pauli"}, {"--cuts", "cuts"},       {"--times", "times"},
        {"--fit-model", "fit_model"}, {"--x-min", "x_min"},         {"--c-min", "c_min"},
        {"--c-max", "c_max"},         {"--seed", "seed"},           {"--restarts", "restarts"},
        {"--input", "input"},         {"-o,--output", "output"},    {"--otoc-output", "otoc_output"},
        {"--snapshot-output", "snapshot_output"}, {"--checkpoint", "checkpoint"},
        {"--checkpoint-every", "checkpoint_every"}, {"--halt-after-steps", "halt_after_steps"},
        {"--time-factor", "time_factor"}, {"--bound-side", "bound_side"}};
    std::vector<std::string> values(flags.size());
    for(std::size_t i = 0; i < flags.size(); ++i) app.add_option(flags[i].first, values[i], "sets '" + flags[i].second + "'");
    bool resume = false;
    app.add_flag("--resume", resume, "continue from the checkpoint");

    try {
        app.parse(argc, argv);
    } catch(const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigInvalid;
    }

    try {
        json j = config_path.empty() ? json::object() : load_json_file(config_path);
        if(!j.is_object()) throw ConfigError("config must be a JSON object");
        for(std::size_t i = 0; i < flags.size(); ++i)
            if(app.count(flags[i].first.substr(flags[i].first.rfind(',') + 1)) > 0)
                j[flags[i].second] = flag_value(flags[i].second, values[i]);
        for(const auto &kv : sets) {
            const auto eq = kv.find('=');
            if(eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + kv + "'");
            const auto key = kv.substr(0, eq);
            j[key] = flag_value(key, kv.substr(eq + 1));
        }
        if(resume) j["resume"] = true;
        j["command"] = command;
        return run(parse_config(j), std::cerr);
    } catch(const ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigInvalid;
    }
}

} // namespace mpotoc::cli
