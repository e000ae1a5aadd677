#pragma once

// Batch front-end: JSON run configurations, CSV artifacts, checkpointed
// trajectories and the command dispatcher.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpotoc/observables.hpp"
#include "mpotoc/wavefront_fit.hpp"

namespace mpotoc::cli {

inline constexpr const char *kToolVersion = "mpotoc 0.1.0";

enum ExitCode : int { kOk = 0, kConfigInvalid = 2, kNumericalAbort = 3, kFitNotConverged = 4 };

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Command { evolve, otoc, entanglement, fit, collapse, oracle_ed, oracle_free, bound_check };

[[nodiscard]] std::string command_name(Command c);
[[nodiscard]] Command parse_command(const std::string &name);

struct RunConfig {
    Command command = Command::otoc;
    HamiltonianSpec spec{Model::mixed_field_ising, 1.0, 1.05, 0.5, true, 201};
    std::size_t chi = 32;
    double eps_rel = 1e-14;
    double dt = 0.005;
    int order = 2;
    double t_max = 10.0;
    long record_stride = 20;
    Pauli evolved_pauli = Pauli::X;
    int base_site = 0;            // 0: chain center
    std::vector<int> probe_sites; // empty: every site
    Pauli probe_pauli = Pauli::X;
    std::vector<int> cuts;        // empty: every bond
    WindowConfig window;
    FitModel fit_model = FitModel::xs_form;
    std::optional<double> init_lambda, init_p, init_v_b, init_x0;
    int restarts = 8;
    std::uint64_t seed = 12345;
    int quadrature_points = 1024;
    std::optional<double> time_factor; // free-fermion clock; default 2 J / E0-factor
    std::vector<double> times;         // bound-check instants
    BoundSide bound_side = BoundSide::far;
    std::string input;
    std::string output = "-";
    std::string otoc_output;
    std::string snapshot_output;
    std::string checkpoint;
    long checkpoint_every = 0;
    bool resume = false;
    long halt_after_steps = -1; // stop (after checkpointing) once this many steps are done

    [[nodiscard]] int resolved_base_site() const;
    [[nodiscard]] std::vector<int> resolved_probes() const;
    [[nodiscard]] std::vector<int> resolved_cuts() const;
    [[nodiscard]] double resolved_time_factor() const;
    /// Throws ConfigError (or SpecError) on the first invalid field.
    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
    /// Fields that change the numbers; excludes paths and checkpoint cadence.
    [[nodiscard]] nlohmann::json physics_json() const;
    /// FNV-1a 64 of physics_json().dump(), hex.
    [[nodiscard]] std::string physics_hash() const;
};

/// Strict: unknown keys and wrong types raise ConfigError.
[[nodiscard]] RunConfig parse_config(const nlohmann::json &j);
[[nodiscard]] nlohmann::json load_json_file(const std::filesystem::path &path);

[[nodiscard]] std::vector<std::string> metadata_header(const RunConfig &cfg);

/// `t,x,C,norm` with x = probe - base; one row per (time, probe).
void write_otoc_csv(const OtocGrid &grid, std::ostream &out, const std::vector<std::string> &header);
void write_otoc_csv(const OtocGrid &grid, const std::string &path, const std::vector<std::string> &header);
[[nodiscard]] OtocGrid read_otoc_csv(const std::filesystem::path &path);

/// `t,cut,S_vn,S_renyi2`
void write_entanglement_csv(const EntanglementProfile &p, std::ostream &out, const std::vector<std::string> &header);
void write_entanglement_csv(const EntanglementProfile &p, const std::string &path,
                            const std::vector<std::string> &header);
[[nodiscard]] EntanglementProfile read_entanglement_csv(const std::filesystem::path &path);

struct TrajectoryOutput {
    OtocGrid grid;
    EntanglementProfile profile;
    std::optional<MatrixProductOperator> final_state;
    long steps_done = 0;
    bool halted = false;
};

/// Evolves P_base(t) with the configured plan, recording at step 0, every
/// record_stride steps and the last step. Writes a snapshot plus JSON sidecar
/// every checkpoint_every steps, and continues from them when resume is set.
[[nodiscard]] TrajectoryOutput run_trajectory(const RunConfig &cfg, bool want_otoc, bool want_entanglement);

/// Recording instants of a trajectory with this config.
[[nodiscard]] std::vector<double> recorded_times(const RunConfig &cfg);

/// Executes one command; returns the process exit status.
int run(const RunConfig &cfg, std::ostream &log);

/// argv front-end: --config file plus flag overrides.
int main_entry(int argc, char **argv);

} // namespace mpotoc::cli
