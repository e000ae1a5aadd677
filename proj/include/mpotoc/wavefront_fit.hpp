#pragma once

// Early-growth window extraction, the X/S wavefront form
// log C = -lambda (x - v_B t - x0)^{1+p} / t^p, competitor growth forms, and
// data-collapse coordinates.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mpotoc/observables.hpp"

namespace mpotoc {

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct WindowConfig {
    double c_min = 1e-15;
    double c_max = 0.1;
    int x_min = 10;
    /// Per probe, keep only samples before C first exceeds c_max.
    bool leading_edge_only = true;
    /// Keep only local maxima over a sliding window of `envelope_width` samples.
    bool envelope = false;
    int envelope_width = 5;

    void validate() const;
};

struct FitPoint {
    double x = 0.0;
    double t = 0.0;
    double log_c = 0.0;
};

struct FitWindow {
    WindowConfig config;
    std::vector<FitPoint> points;
};

/// x = |probe - base|. Throws FitError on an empty window.
[[nodiscard]] FitWindow extract_window(const OtocGrid &grid, const WindowConfig &cfg = {});

/// Same filter on raw (x, t, C) samples; each x must be sampled in increasing t.
[[nodiscard]] FitWindow extract_window(const std::vector<double> &xs, const std::vector<double> &ts,
                                       const std::vector<std::vector<double>> &c, const WindowConfig &cfg = {});

struct VelocityEstimate {
    double v_b = 0.0;
    double intercept = 0.0; // crossing time at x = 0
    std::vector<std::pair<double, double>> crossings; // (x, t)
};

/// Regression of first-crossing time against distance. Needs >= 3 crossings.
[[nodiscard]] VelocityEstimate estimate_velocity(const OtocGrid &grid, double threshold = 1e-6);

enum class FitModel { xs_form, perturbative, exponential, random_circuit, growth_diffusion };

[[nodiscard]] std::string fit_model_name(FitModel m);
[[nodiscard]] FitModel parse_fit_model(const std::string &name);

struct FitResult {
    FitModel model = FitModel::xs_form;
    std::vector<std::pair<std::string, double>> params;
    double rms_residual = 0.0;
    long iterations = 0;
    bool converged = false;
    WindowConfig window;
    std::size_t n_points = 0;

    [[nodiscard]] double param(const std::string &name) const;
};

/// Model log C at (x, t) for a fitted result.
[[nodiscard]] double model_log_c(const FitResult &fit, double x, double t);

struct XsInit {
    double lambda = 2.0;
    double p = 0.5;
    double v_b = 0.5;
    double x0 = 0.0;
};

struct FitOptions {
    int restarts = 8;
    std::uint64_t seed = 12345;
    long max_iterations = 500;   // per simplex run
    double tolerance = 1e-10;    // relative objective change
    double penalty = 100.0;      // weight of d^2 for points ahead of the front
};

/// Least squares in log C with uniform weights; lambda > 0, p in [0, 2], v_B > 0.
[[nodiscard]] FitResult fit_xs_form(const FitWindow &window, const XsInit &init = {}, const FitOptions &opt = {});

/// exponential: lambda t - mu x + c; growth_diffusion: lambda t - x^2/(D t) + c;
/// random_circuit: -(x - v t)^2/(D t) + c; perturbative: b x log(a t) - lgamma(b x + 1) + c.
[[nodiscard]] FitResult fit_competitor(const FitWindow &window, FitModel model, const FitOptions &opt = {});

struct CollapsePoint {
    double u = 0.0;
    double log_c = 0.0;
};

/// u = (x - v_B t - x0) / t^{p/(1+p)}, sorted by (u, log C).
[[nodiscard]] std::vector<CollapsePoint> collapse(const FitWindow &window, const FitResult &xs_fit);

/// Largest |log C + lambda max(u,0)^{1+p}| over the collapsed points.
[[nodiscard]] double collapse_scatter(const std::vector<CollapsePoint> &pts, const FitResult &xs_fit);

struct PowerLaw {
    double exponent = 0.0;
    double log_prefactor = 0.0;
};

/// log y = exponent log x + log_prefactor by least squares; positive data only.
[[nodiscard]] PowerLaw fit_power_law(const std::vector<double> &x, const std::vector<double> &y);

[[nodiscard]] nlohmann::json to_json(const FitResult &fit);

} // namespace mpotoc
