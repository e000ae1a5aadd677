#include "mpotoc/wavefront_fit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace mpotoc {

namespace {

using Vec = Eigen::VectorXd;
using Objective = std::function<double(const Vec &)>;

struct Minimum {
    Vec x;
    double f = std::numeric_limits<double>::infinity();
    long iterations = 0;
    bool converged = false;
};

// absolute floor: a sum of squared log residuals below 1e-20 is exact data
bool settled(double lo, double hi, double tol) { return hi - lo <= tol * std::abs(lo) + 1e-20; }

// Standard Nelder-Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
Minimum nelder_mead(const Objective &f, const Vec &start, const Vec &step, long max_iterations, double tol) {
    const auto n = start.size();
    std::vector<Vec> x(static_cast<std::size_t>(n + 1), start);
    std::vector<double> fx(static_cast<std::size_t>(n + 1));
    for(Eigen::Index i = 0; i < n; ++i) x[static_cast<std::size_t>(i + 1)](i) += step(i);
    for(std::size_t i = 0; i < x.size(); ++i) fx[i] = f(x[i]);

    std::vector<std::size_t> order(x.size());
    Minimum out;
    for(long it = 0; it < max_iterations; ++it) {
        for(std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fx[a] < fx[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        out.iterations = it;
        if(settled(fx[best], fx[worst], tol)) {
            out.converged = true;
            break;
        }
        Vec centroid = Vec::Zero(n);
        for(std::size_t i = 0; i < x.size(); ++i)
            if(i != worst) centroid += x[i];
        centroid /= static_cast<double>(n);

        const Vec xr = centroid + (centroid - x[worst]);
        const double fr = f(xr);
        if(fr < fx[best]) {
            const Vec xe = centroid + 2.0 * (centroid - x[worst]);
            const double fe = f(xe);
            if(fe < fr) {
                x[worst] = xe;
                fx[worst] = fe;
            } else {
                x[worst] = xr;
                fx[worst] = fr;
            }
            continue;
        }
        if(fr < fx[second]) {
            x[worst] = xr;
            fx[worst] = fr;
            continue;
        }
        const bool outside = fr < fx[worst];
        const Vec xc = outside ? Vec(centroid + 0.5 * (xr - centroid)) : Vec(centroid + 0.5 * (x[worst] - centroid));
        const double fc = f(xc);
        if(fc < std::min(fr, fx[worst])) {
            x[worst] = xc;
            fx[worst] = fc;
            continue;
        }
        for(std::size_t i = 0; i < x.size(); ++i)
            if(i != best) {
                x[i] = x[best] + 0.5 * (x[i] - x[best]);
                fx[i] = f(x[i]);
            }
    }
    const auto it = std::min_element(fx.begin(), fx.end());
    out.x = x[static_cast<std::size_t>(it - fx.begin())];
    out.f = *it;
    return out;
}

// Seeded restarts, then repeated restarts from the best point until the
// objective stops moving by more than `tol` (relative).
Minimum multistart(const Objective &f, const std::vector<Vec> &starts, const Vec &step, const FitOptions &opt) {
    Minimum best;
    long iterations = 0;
    for(const auto &s : starts) {
        auto m = nelder_mead(f, s, step, opt.max_iterations, opt.tolerance);
        iterations += m.iterations;
        if(m.f < best.f) best = m;
    }
    bool converged = false;
    Vec scale = step;
    for(int round = 0; round < 40; ++round) {
        auto m = nelder_mead(f, best.x, scale, opt.max_iterations, opt.tolerance);
        iterations += m.iterations;
        const double before = best.f;
        if(m.f < best.f) best = m;
        if(settled(best.f, before, opt.tolerance) && m.converged) {
            converged = true;
            break;
        }
        scale *= 0.5;
        if(scale.cwiseAbs().maxCoeff() < 1e-8) scale = step * 1e-3;
    }
    best.iterations = iterations;
    best.converged = converged;
    return best;
}

double xs_log_c(double lambda, double p, double v, double x0, double x, double t) {
    const double d = x - v * t - x0;
    if(d <= 0.0) return 0.0;
    return -lambda * std::pow(d, 1.0 + p) / std::pow(t, p);
}

double clamp_p(double p) { return std::clamp(p, 0.0, 2.0); }

// Residual vector for the X/S form; entries n..2n-1 carry the front penalty.
void xs_residuals(const std::vector<FitPoint> &pts, const Vec &th, double penalty, Vec &r) {
    const double lambda = std::exp(th(0)), p = clamp_p(th(1)), v = std::exp(th(2)), x0 = th(3);
    const auto n = static_cast<Eigen::Index>(pts.size());
    r.resize(2 * n);
    const double sk = std::sqrt(penalty);
    for(Eigen::Index i = 0; i < n; ++i) {
        const auto &q = pts[static_cast<std::size_t>(i)];
        const double d = q.x - v * q.t - x0;
        r(i) = q.log_c - xs_log_c(lambda, p, v, x0, q.x, q.t);
        r(n + i) = d <= 0.0 ? sk * d : 0.0;
    }
}

struct XsFunctor {
    using Scalar = double;
    using InputType = Vec;
    using ValueType = Vec;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    const std::vector<FitPoint> *pts;
    double penalty;
    int inputs() const { return 4; }
    int values() const { return static_cast<int>(2 * pts->size()); }
    int operator()(const Vec &th, Vec &r) const {
        xs_residuals(*pts, th, penalty, r);
        return 0;
    }
};

double rms_of(const std::vector<FitPoint> &pts, const std::function<double(double, double)> &model) {
    double s = 0.0;
    for(const auto &q : pts) {
        const double r = q.log_c - model(q.x, q.t);
        s += r * r;
    }
    return std::sqrt(s / static_cast<double>(pts.size()));
}

void check_fit_window(const FitWindow &w) {
    if(w.points.size() < 20) throw FitError("fit window needs at least 20 points");
    std::vector<double> xs;
    for(const auto &q : w.points) {
        if(!(q.t > 0.0)) throw FitError("fit window contains t <= 0");
        if(std::find(xs.begin(), xs.end(), q.x) == xs.end()) xs.push_back(q.x);
    }
    if(xs.size() < 3) throw FitError("fit window needs at least 3 distinct distances");
}

std::vector<Vec> seeded_starts(const Vec &first, const std::function<Vec(std::mt19937_64 &)> &draw, const FitOptions &opt) {
    std::mt19937_64 rng(opt.seed);
    std::vector<Vec> s{first};
    for(int k = 1; k < opt.restarts; ++k) s.push_back(draw(rng));
    return s;
}

} // namespace

void WindowConfig::validate() const {
    if(!(c_min > 0.0 && c_min < c_max && c_max <= 1.0)) throw FitError("window needs 0 < c_min < c_max <= 1");
    if(x_min < 0) throw FitError("x_min must be >= 0");
    if(envelope && envelope_width < 1) throw FitError("envelope width must be >= 1");
}

FitWindow extract_window(const std::vector<double> &xs, const std::vector<double> &ts,
                         const std::vector<std::vector<double>> &c, const WindowConfig &cfg) {
    cfg.validate();
    if(c.size() != xs.size()) throw FitError("one row of C per distance expected");
    FitWindow w;
    w.config = cfg;
    const int half = cfg.envelope_width / 2;
    for(std::size_t p = 0; p < xs.size(); ++p) {
        const auto &row = c[p];
        if(row.size() != ts.size()) throw FitError("row length does not match the time axis");
        if(xs[p] < cfg.x_min) continue;
        std::size_t end = row.size();
        if(cfg.leading_edge_only)
            for(std::size_t k = 0; k < row.size(); ++k)
                if(row[k] > cfg.c_max) {
                    end = k;
                    break;
                }
        for(std::size_t k = 0; k < end; ++k) {
            const double v = row[k];
            if(!(v >= cfg.c_min && v <= cfg.c_max) || !(ts[k] > 0.0)) continue;
            if(cfg.envelope) {
                const std::size_t lo = k >= static_cast<std::size_t>(half) ? k - static_cast<std::size_t>(half) : 0;
                const std::size_t hi = std::min(end - 1, k + static_cast<std::size_t>(half));
                bool peak = true;
                for(std::size_t j = lo; j <= hi; ++j)
                    if(row[j] > v) peak = false;
                if(!peak) continue;
            }
            w.points.push_back(FitPoint{xs[p], ts[k], std::log(v)});
        }
    }
    if(w.points.empty()) throw FitError("empty fit window");
    return w;
}

FitWindow extract_window(const OtocGrid &grid, const WindowConfig &cfg) {
    std::vector<double> xs;
    for(int q : grid.probe_sites) xs.push_back(std::abs(q - grid.base_site));
    return extract_window(xs, grid.times, grid.values, cfg);
}

VelocityEstimate estimate_velocity(const OtocGrid &grid, double threshold) {
    VelocityEstimate out;
    const auto arrive = arrival_times(grid, threshold);
    for(std::size_t p = 0; p < arrive.size(); ++p) {
        const double x = std::abs(grid.probe_sites[p] - grid.base_site);
        if(arrive[p] && x >= 1.0) out.crossings.emplace_back(x, *arrive[p]);
    }
    std::sort(out.crossings.begin(), out.crossings.end());
    if(out.crossings.size() < 3) throw FitError("velocity estimate needs at least 3 threshold crossings");
    Eigen::MatrixXd a(out.crossings.size(), 2);
    Eigen::VectorXd b(out.crossings.size());
    for(std::size_t i = 0; i < out.crossings.size(); ++i) {
        a(static_cast<Eigen::Index>(i), 0) = 1.0;
        a(static_cast<Eigen::Index>(i), 1) = out.crossings[i].first;
        b(static_cast<Eigen::Index>(i)) = out.crossings[i].second;
    }
    const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
    if(!(coef(1) > 0.0)) throw FitError("crossing times do not grow with distance");
    out.v_b = 1.0 / coef(1);
    out.intercept = coef(0);
    return out;
}

std::string fit_model_name(FitModel m) {
    switch(m) {
    case FitModel::xs_form: return "xs_form";
    case FitModel::perturbative: return "perturbative";
    case FitModel::exponential: return "exponential";
    case FitModel::random_circuit: return "random_circuit";
    case FitModel::growth_diffusion: return "growth_diffusion";
    }
    return "unknown";
}

FitModel parse_fit_model(const std::string &name) {
    for(FitModel m : {FitModel::xs_form, FitModel::perturbative, FitModel::exponential, FitModel::random_circuit,
                      FitModel::growth_diffusion})
        if(fit_model_name(m) == name) return m;
    throw FitError("unknown fit model '" + name + "'");
}

double FitResult::param(const std::string &name) const {
    for(const auto &[k, v] : params)
        if(k == name) return v;
    throw FitError("fit result has no parameter '" + name + "'");
}

double model_log_c(const FitResult &fit, double x, double t) {
    switch(fit.model) {
    case FitModel::xs_form:
        return xs_log_c(fit.param("lambda"), fit.param("p"), fit.param("v_B"), fit.param("x0"), x, t);
    case FitModel::exponential: return fit.param("lambda") * t - fit.param("mu") * x + fit.param("c");
    case FitModel::growth_diffusion:
        return fit.param("lambda") * t - x * x / (fit.param("D") * t) + fit.param("c");
    case FitModel::random_circuit: {
        const double d = x - fit.param("v") * t;
        return -d * d / (fit.param("D") * t) + fit.param("c");
    }
    case FitModel::perturbative: {
        const double bx = fit.param("b") * x;
        return bx * std::log(fit.param("a") * t) - std::lgamma(bx + 1.0) + fit.param("c");
    }
    }
    return 0.0;
}

FitResult fit_xs_form(const FitWindow &window, const XsInit &init, const FitOptions &opt) {
    check_fit_window(window);
    if(!(init.lambda > 0.0 && init.v_b > 0.0)) throw FitError("initial lambda and v_B must be positive");
    const auto &pts = window.points;
    Vec r;
    const Objective f = [&](const Vec &th) {
        xs_residuals(pts, th, opt.penalty, r);
        const double s = r.squaredNorm();
        return std::isfinite(s) ? s : std::numeric_limits<double>::max();
    };
    Vec first(4);
    first << std::log(init.lambda), clamp_p(init.p), std::log(init.v_b), init.x0;
    const auto starts = seeded_starts(
        first,
        [&](std::mt19937_64 &g) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            Vec s(4);
            s << first(0) + 3.0 * (u(g) - 0.5), 0.05 + 1.45 * u(g), first(2) + 0.8 * (u(g) - 0.5), init.x0 + 6.0 * (u(g) - 0.5);
            return s;
        },
        opt);
    Vec step(4);
    step << 0.3, 0.2, 0.1, 1.0;
    Minimum m = multistart(f, starts, step, opt);

    // Gauss-Newton style polish from the simplex minimum.
    XsFunctor fun{&pts, opt.penalty};
    Eigen::NumericalDiff<XsFunctor> nd(fun);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<XsFunctor>> lm(nd);
    lm.parameters.ftol = 1e-15;
    lm.parameters.xtol = 1e-15;
    lm.parameters.maxfev = 4000;
    Vec th = m.x;
    lm.minimize(th);
    const double fl = f(th);
    if(th(1) >= 0.0 && th(1) <= 2.0 && fl <= m.f) {
        m.x = th;
        m.f = fl;
    }

    FitResult out;
    out.model = FitModel::xs_form;
    out.params = {{"lambda", std::exp(m.x(0))}, {"p", clamp_p(m.x(1))}, {"v_B", std::exp(m.x(2))}, {"x0", m.x(3)}};
    out.iterations = m.iterations;
    out.converged = m.converged;
    out.window = window.config;
    out.n_points = pts.size();
    out.rms_residual = rms_of(pts, [&](double x, double t) { return model_log_c(out, x, t); });
    if(!std::isfinite(out.rms_residual)) throw FitError("non-finite fit residual");
    return out;
}

FitResult fit_competitor(const FitWindow &window, FitModel model, const FitOptions &opt) {
    check_fit_window(window);
    if(model == FitModel::xs_form) return fit_xs_form(window, {}, opt);
    const auto &pts = window.points;
    const auto n = static_cast<Eigen::Index>(pts.size());
    FitResult out;
    out.model = model;
    out.window = window.config;
    out.n_points = pts.size();

    if(model == FitModel::exponential || model == FitModel::growth_diffusion) {
        Eigen::MatrixXd a(n, 3);
        Vec b(n);
        for(Eigen::Index i = 0; i < n; ++i) {
            const auto &q = pts[static_cast<std::size_t>(i)];
            a(i, 0) = q.t;
            a(i, 1) = model == FitModel::exponential ? -q.x : -q.x * q.x / q.t;
            a(i, 2) = 1.0;
            b(i) = q.log_c;
        }
        const Vec c = a.colPivHouseholderQr().solve(b);
        if(model == FitModel::exponential)
            out.params = {{"lambda", c(0)}, {"mu", c(1)}, {"c", c(2)}};
        else
            out.params = {{"lambda", c(0)}, {"D", 1.0 / c(1)}, {"c", c(2)}};
        out.converged = true;
    } else {
        // random_circuit: (v, log D, c); perturbative: (log a, log b, c)
        const bool rc = model == FitModel::random_circuit;
        auto unpack = [&](const Vec &th) {
            FitResult r = out;
            if(rc)
                r.params = {{"v", th(0)}, {"D", std::exp(th(1))}, {"c", th(2)}};
            else
                r.params = {{"a", std::exp(th(0))}, {"b", std::exp(th(1))}, {"c", th(2)}};
            return r;
        };
        const Objective f = [&](const Vec &th) {
            const FitResult r = unpack(th);
            double s = 0.0;
            for(const auto &q : pts) {
                const double d = q.log_c - model_log_c(r, q.x, q.t);
                s += d * d;
            }
            return std::isfinite(s) ? s : std::numeric_limits<double>::max();
        };
        Vec first(3);
        if(rc)
            first << 0.5, 0.0, 0.0;
        else
            first << 0.0, 0.0, 0.0;
        const auto starts = seeded_starts(
            first,
            [&](std::mt19937_64 &g) {
                std::uniform_real_distribution<double> u(0.0, 1.0);
                Vec s(3);
                if(rc)
                    s << 0.1 + 1.4 * u(g), 4.0 * (u(g) - 0.5), 10.0 * (u(g) - 0.5);
                else
                    s << 4.0 * (u(g) - 0.5), 2.0 * (u(g) - 0.5), 10.0 * (u(g) - 0.5);
                return s;
            },
            opt);
        Vec step(3);
        step << 0.1, 0.3, 1.0;
        const Minimum m = multistart(f, starts, step, opt);
        out = unpack(m.x);
        out.iterations = m.iterations;
        out.converged = m.converged;
    }
    out.rms_residual = rms_of(pts, [&](double x, double t) { return model_log_c(out, x, t); });
    if(!std::isfinite(out.rms_residual)) throw FitError("non-finite fit residual");
    return out;
}

std::vector<CollapsePoint> collapse(const FitWindow &window, const FitResult &fit) {
    if(fit.model != FitModel::xs_form) throw FitError("collapse needs an xs_form fit");
    const double p = fit.param("p"), v = fit.param("v_B"), x0 = fit.param("x0");
    std::vector<CollapsePoint> out;
    out.reserve(window.points.size());
    for(const auto &q : window.points) {
        if(!(q.t > 0.0)) continue;
        out.push_back(CollapsePoint{(q.x - v * q.t - x0) / std::pow(q.t, p / (1.0 + p)), q.log_c});
    }
    std::sort(out.begin(), out.end(), [](const CollapsePoint &a, const CollapsePoint &b) {
        return a.u < b.u || (a.u == b.u && a.log_c < b.log_c);
    });
    return out;
}

double collapse_scatter(const std::vector<CollapsePoint> &pts, const FitResult &fit) {
    const double lambda = fit.param("lambda"), p = fit.param("p");
    double worst = 0.0;
    for(const auto &c : pts) worst = std::max(worst, std::abs(c.log_c + lambda * std::pow(std::max(c.u, 0.0), 1.0 + p)));
    return worst;
}

PowerLaw fit_power_law(const std::vector<double> &x, const std::vector<double> &y) {
    if(x.size() != y.size() || x.size() < 2) throw FitError("power law needs matching samples, at least 2");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
    Vec b(static_cast<Eigen::Index>(x.size()));
    for(std::size_t i = 0; i < x.size(); ++i) {
        if(!(x[i] > 0.0 && y[i] > 0.0)) throw FitError("power law needs positive data");
        a(static_cast<Eigen::Index>(i), 0) = std::log(x[i]);
        a(static_cast<Eigen::Index>(i), 1) = 1.0;
        b(static_cast<Eigen::Index>(i)) = std::log(y[i]);
    }
    const Eigen::Vector2d c = a.colPivHouseholderQr().solve(b);
    return PowerLaw{c(0), c(1)};
}

nlohmann::json to_json(const FitResult &fit) {
    nlohmann::json j;
    j["model"] = fit_model_name(fit.model);
    for(const char *k : {"lambda", "p", "v_B", "x0"}) {
        j[k] = nullptr;
        for(const auto &[name, v] : fit.params)
            if(name == k) j[k] = v;
    }
    nlohmann::json params = nlohmann::json::object();
    for(const auto &[name, v] : fit.params) params[name] = v;
    j["params"] = params;
    j["rms_residual"] = fit.rms_residual;
    j["converged"] = fit.converged;
    j["iterations"] = fit.iterations;
    j["window"] = {{"c_min", fit.window.c_min}, {"c_max", fit.window.c_max}, {"x_min", fit.window.x_min},
                   {"leading_edge_only", fit.window.leading_edge_only}, {"envelope", fit.window.envelope}};
    j["n_points"] = fit.n_points;
    j["weighting"] = "uniform in log C";
    return j;
}

} // namespace mpotoc
