#pragma once

#include <cstdint>
#include <fstream>
#include <string>

#include <json.hpp>

#include "lakevortex/continuum.hpp"
#include "lakevortex/depth.hpp"
#include "lakevortex/dynamics.hpp"
#include "lakevortex/errors.hpp"
#include "lakevortex/grid.hpp"

namespace lakevortex {

/// Raised for anything wrong with a config document; the CLI maps it to
/// exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    DepthField depth = DepthField::default_bump();
    GridGeometry grid{256, 8.0};
    int kernel_m = 17;

    int N = 64;
    double T = 1.0;
    double dt = 0.0; // 0 = automatic (pair-rotation rule)
    Regime regime = Regime::Physical;
    double alpha = 0.1;
    int sample_every = 10;
    uint64_t seed = 1;
    SampleMode sampling = SampleMode::Quadrature;

    int M = 0; // 0 = automatic (64 N)
    Omega0Spec omega0;
    double continuum_alpha_override = -1.0; // <0 = same alpha as sim

    double eta = 0.0; // 0 = automatic (1/N)
    double sobolev_s = -2.0;
    double eps_close = 0.0; // 0 = automatic (1/N)

    std::string output_dir = "out";
    std::string kernel_cache; // empty = <output_dir>/kernel.bin

    int continuum_M() const { return M > 0 ? M : 64 * N; }
    double eta_value() const { return eta > 0.0 ? eta : 1.0 / N; }
    double eps_close_value() const { return eps_close > 0.0 ? eps_close : 1.0 / N; }
    double continuum_alpha() const {
        return continuum_alpha_override >= 0.0 ? continuum_alpha_override : alpha;
    }
    std::string kernel_cache_path() const {
        return kernel_cache.empty() ? output_dir + "/kernel.bin" : kernel_cache;
    }
};

namespace detail {

inline DepthField depth_from_json(const nlohmann::json& j) {
    const std::string family = j.at("family").get<std::string>();
    const std::vector<double> params = j.at("params").get<std::vector<double>>();
    const double gamma = j.value("gamma", 1.0);
    if (family == "constant") return {DepthFamily::Constant, params, gamma};
    if (family == "radial-gaussian-bump") return {DepthFamily::RadialGaussianBump, params, gamma};
    if (family == "anisotropic-bump") return {DepthFamily::AnisotropicBump, params, gamma};
    throw ConfigError("unknown depth family \"" + family + "\"");
}

} // namespace detail

inline ExperimentConfig parse_config(const nlohmann::json& j) {
    ExperimentConfig c;
    try {
        if (j.contains("depth")) c.depth = detail::depth_from_json(j.at("depth"));
        if (j.contains("grid")) {
            const auto& g = j.at("grid");
            c.grid = GridGeometry(g.value("n", 256), g.value("L", 8.0));
            c.kernel_m = g.value("m", 17);
        }
        if (j.contains("sim")) {
            const auto& s = j.at("sim");
            c.N = s.value("N", c.N);
            c.T = s.value("T", c.T);
            c.dt = s.value("dt", c.dt);
            const std::string regime = s.value("regime", "physical");
            if (regime == "physical") c.regime = Regime::Physical;
            else if (regime == "rescaled") c.regime = Regime::Rescaled;
            else throw ConfigError("sim.regime must be \"physical\" or \"rescaled\"");
            if (s.contains("alpha")) {
                if (s.at("alpha").is_object())
                    c.alpha = alpha_from_epsilon(s.at("alpha").at("epsilon").get<double>(), c.N);
                else
                    c.alpha = s.at("alpha").get<double>();
            }
            c.sample_every = s.value("sample_every", c.sample_every);
            c.seed = s.value("seed", c.seed);
            const std::string mode = s.value("sampling", "quadrature");
            if (mode == "quadrature") c.sampling = SampleMode::Quadrature;
            else if (mode == "iid") c.sampling = SampleMode::Iid;
            else throw ConfigError("sim.sampling must be \"quadrature\" or \"iid\"");
        }
        if (j.contains("continuum")) {
            const auto& ct = j.at("continuum");
            c.M = ct.value("M", 0);
            if (ct.contains("omega0")) {
                const auto& o = ct.at("omega0");
                const std::string fam = o.value("family", "bump");
                if (fam != "bump") throw ConfigError("omega0.family must be \"bump\"");
                c.omega0.radius = o.value("radius", 1.0);
                if (o.contains("center")) {
                    const auto ctr = o.at("center").get<std::vector<double>>();
                    if (ctr.size() != 2) throw ConfigError("omega0.center must have 2 entries");
                    c.omega0.center = {ctr[0], ctr[1]};
                }
            }
            if (ct.contains("alpha")) c.continuum_alpha_override = ct.at("alpha").get<double>();
        }
        if (j.contains("diagnostics")) {
            const auto& d = j.at("diagnostics");
            c.eta = d.value("eta", 0.0);
            c.sobolev_s = d.value("s", -2.0);
            c.eps_close = d.value("eps_close", 0.0);
        }
        c.output_dir = j.value("output_dir", c.output_dir);
        c.kernel_cache = j.value("kernel_cache", c.kernel_cache);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    } catch (const DomainError& e) {
        // bad parameter values (depth families, alpha, geometry) surfaced
        // while constructing config objects are config errors to the caller
        throw ConfigError(e.what());
    }

    // preconditions checked up front, before any compute starts
    if (c.N < 1) throw ConfigError("sim.N must be >= 1");
    if (c.T < 0.0) throw ConfigError("sim.T must be >= 0");
    if (c.alpha < 0.0) throw ConfigError("sim.alpha must be >= 0");
    if (c.regime == Regime::Rescaled && c.alpha <= 0.0)
        throw ConfigError("rescaled regime needs alpha > 0");
    if (c.sample_every < 1) throw ConfigError("sim.sample_every must be >= 1");
    if (c.kernel_m < 2) throw ConfigError("grid.m must be >= 2");
    if (c.sobolev_s >= -1.0) throw ConfigError("diagnostics.s must be < -1");
    if (c.omega0.radius <= 0.0) throw ConfigError("omega0.radius must be positive");
    if (c.omega0.radius + c.omega0.center.norm() > c.grid.L / 2.0)
        throw ConfigError("omega0 support must fit in the inner half box");
    return c;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config is not valid JSON (" + path + "): " + e.what());
    }
    return parse_config(j);
}

inline nlohmann::json config_echo(const ExperimentConfig& c) {
    nlohmann::json j;
    j["depth"] = {{"family", c.depth.family_name()},
                  {"params", c.depth.params()},
                  {"gamma", c.depth.gamma()}};
    j["grid"] = {{"n", c.grid.n}, {"L", c.grid.L}, {"m", c.kernel_m}};
    j["sim"] = {{"N", c.N},
                {"T", c.T},
                {"dt", c.dt},
                {"regime", regime_name(c.regime)},
                {"alpha", c.alpha},
                {"sample_every", c.sample_every},
                {"seed", c.seed},
                {"sampling", c.sampling == SampleMode::Quadrature ? "quadrature" : "iid"}};
    j["continuum"] = {{"M", c.continuum_M()},
                      {"omega0",
                       {{"family", "bump"},
                        {"radius", c.omega0.radius},
                        {"center", {c.omega0.center.x, c.omega0.center.y}}}},
                      {"alpha", c.continuum_alpha()}};
    j["diagnostics"] = {{"eta", c.eta_value()}, {"s", c.sobolev_s}, {"eps_close", c.eps_close_value()}};
    j["output_dir"] = c.output_dir;
    j["kernel_cache"] = c.kernel_cache_path();
    return j;
}

} // namespace lakevortex
