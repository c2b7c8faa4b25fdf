// Batch front-end: kernel-cache management, single runs, mean-field sweeps
// and the fast selfcheck suite.
//
// Exit codes: 0 ok, 1 internal/selfcheck failure, 2 invalid config,
// 3 kernel build failure, 4 collision abort, 5 continuum support escape.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lakevortex/lakevortex.hpp"

namespace fs = std::filesystem;
using namespace lakevortex;

namespace {

constexpr const char* kVersion = "1.0.0";

void write_atomic(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
    }
    fs::rename(tmp, path);
}

KernelTable build_table(const ExperimentConfig& cfg) {
    validate_depth(cfg.depth, {20.0, 50.0, 100.0, 1000.0});
    KernelTable t = KernelTable::build(cfg.depth, cfg.grid, cfg.kernel_m);
    fs::path cache = cfg.kernel_cache_path();
    if (!cache.parent_path().empty()) fs::create_directories(cache.parent_path());
    t.save(cache.string());
    return t;
}

KernelTable load_or_build_table(const ExperimentConfig& cfg) {
    const std::string cache = cfg.kernel_cache_path();
    if (fs::exists(cache)) {
        try {
            KernelTable t = KernelTable::load(cache, cfg.depth);
            if (t.geom() == cfg.grid && t.m() == cfg.kernel_m) return t;
            std::cerr << "kernel cache geometry differs from config; rebuilding\n";
        } catch (const CacheMismatch& e) {
            std::cerr << "kernel cache rejected (" << e.what() << "); rebuilding\n";
        }
    }
    return build_table(cfg);
}

nlohmann::json manifest_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["config"] = config_echo(cfg);
    j["depth_fingerprint"] = to_hex(depth_fingerprint(cfg.depth));
    j["version"] = kVersion;
    return j;
}

nlohmann::json summary_json(const RunResult& run, const RunSummary& s) {
    nlohmann::json j;
    j["complete"] = run.record.complete;
    if (!run.record.complete) j["abort_reason"] = run.record.abort_reason;
    j["dt"] = run.dt;
    j["F_b_final"] = s.F_b_final;
    j["F_b_sup"] = s.F_b_sup;
    j["Hs_final"] = s.Hs_final;
    j["E_N_initial"] = s.E_N_initial;
    j["drift_E_N"] = s.drift_E_N;
    j["drift_Etot_candidate_1"] = s.drift_Etot1;
    j["drift_Etot_candidate_2"] = s.drift_Etot2;
    j["conserved_total_energy_candidate"] = s.conserved_candidate;
    j["level_set_drift"] = s.level_set_drift;
    return j;
}

int cmd_kernel_build(const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    try {
        KernelTable t = build_table(cfg);
        std::cout << "kernel table built: n=" << t.geom().n << " m=" << t.m()
                  << " max|S|=" << t.max_abs_S() << " cached at " << cfg.kernel_cache_path()
                  << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "kernel build failed: " << e.what() << "\n";
        return 3;
    }
}

int cmd_run(const std::string& config_path) {
    const ExperimentConfig cfg = load_config(config_path);
    KernelTable table;
    try {
        table = load_or_build_table(cfg);
    } catch (const std::exception& e) {
        std::cerr << "kernel build failed: " << e.what() << "\n";
        return 3;
    }

    RunResult run;
    try {
        run = run_simulation(cfg, cfg.depth, table);
    } catch (const SupportEscape& e) {
        std::cerr << "continuum support escape: " << e.what() << "\n";
        return 5;
    }

    const RunSummary s = summarize(run, cfg.depth);
    const fs::path dir = cfg.output_dir;
    fs::create_directories(dir);
    write_atomic(dir / "diagnostics.csv", diagnostics_csv(run.record));
    write_atomic(dir / "manifest.json", manifest_json(cfg).dump(2) + "\n");
    write_atomic(dir / "summary.json", summary_json(run, s).dump(2) + "\n");

    if (!run.record.complete) {
        std::cerr << "run aborted: " << run.record.abort_reason << " (partial output written)\n";
        return 4;
    }
    std::cout << "run complete: F_b(T)=" << s.F_b_final << " Hs(T)=" << s.Hs_final
              << " conserved total-energy candidate=" << s.conserved_candidate << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<int>& Ns) {
    if (Ns.size() < 2) {
        std::cerr << "sweep needs at least two N values\n";
        return 2;
    }
    for (size_t k = 1; k < Ns.size(); ++k) {
        if (Ns[k] <= Ns[k - 1]) {
            std::cerr << "sweep N list must be strictly ascending\n";
            return 2;
        }
    }
    ExperimentConfig cfg = load_config(config_path);
    KernelTable table;
    try {
        table = load_or_build_table(cfg);
    } catch (const std::exception& e) {
        std::cerr << "kernel build failed: " << e.what() << "\n";
        return 3;
    }

    std::string csv = "N,F_b_0,F_b_sup,Hs_T,E_N_0,wall_time\n";
    bool partial = false;
    for (int N : Ns) {
        ExperimentConfig c = cfg;
        c.N = N;
        const auto t0 = std::chrono::steady_clock::now();
        RunResult run;
        try {
            run = run_simulation(c, c.depth, table);
        } catch (const std::exception& e) {
            std::cerr << "sweep point N=" << N << " failed: " << e.what() << "\n";
            partial = true;
            break;
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!run.record.complete) {
            std::cerr << "sweep point N=" << N << " aborted: " << run.record.abort_reason << "\n";
            partial = true;
            break;
        }
        const RunSummary s = summarize(run, c.depth);
        csv += std::to_string(N) + ',' + format_g17(run.record.samples.front().F_b) + ',' +
               format_g17(s.F_b_sup) + ',' + format_g17(s.Hs_final) + ',' +
               format_g17(s.E_N_initial) + ',' + format_g17(wall) + '\n';
        std::cout << "N=" << N << ": F_b(0)=" << run.record.samples.front().F_b
                  << " sup F_b=" << s.F_b_sup << " Hs(T)=" << s.Hs_final << " (" << wall
                  << " s)\n";
    }
    if (partial) csv += "# partial sweep: a run failed, see stderr\n";
    fs::create_directories(cfg.output_dir);
    write_atomic(fs::path(cfg.output_dir) / "sweep.csv", csv);
    return partial ? 4 : 0;
}

int cmd_selfcheck() {
    int failures = 0;
    auto item = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "[pass] " : "[FAIL] ") << name << " (" << detail << ")\n";
        if (!ok) ++failures;
    };
    const DepthField bump = DepthField::default_bump();

    // ring mean-value identity of the log kernel
    {
        double worst = 0.0;
        const double eta = 0.1;
        for (double r : {0.0, eta / 2, 2 * eta}) {
            const auto [quad, closed] = ring_average_identity({r, 0.0}, {0.0, 0.0}, eta, 256);
            worst = std::max(worst, std::abs(quad - closed));
        }
        item("ring mean-value identity", worst <= 1e-10, "max defect " + format_g17(worst));
    }

    // |m_b - sqrt(b)| <= C eta, the linear upper bound
    {
        bool ok = true;
        double worst_ratio = 0.0;
        for (double eta : {0.1, 0.05, 0.025}) {
            for (Vec2 y : {Vec2{0.3, 0.2}, Vec2{1.0, 0.0}, Vec2{0.5, -0.7}}) {
                const double err = std::abs(m_b(y, eta, bump) - std::sqrt(bump.value(y)));
                worst_ratio = std::max(worst_ratio, err / eta);
            }
        }
        ok = worst_ratio <= 0.1; // measured C_b is ~1e-2 for the default bump
        item("m_b linear bound", ok, "max |m_b - sqrt b| / eta = " + format_g17(worst_ratio));
    }

    // constant depth degeneracies: zero kernel correction, Biot-Savart velocity
    {
        const DepthField flat = DepthField::constant(1.0);
        const GridGeometry geom(64, 8.0);
        KernelTable t = KernelTable::build(flat, geom, 5);
        const double s_max = std::abs(t.eval_S({1.0, 0.5}, {-0.3, 0.2}));
        const auto u = t.velocity_sum(flat, {{1.0, 0.0}}, {{{0.0, 0.0}, 1.0}});
        const double vel_err = (u[0] - Vec2{0.0, 1.0 / kTwoPi}).norm();
        item("constant-depth degeneracy", s_max <= 1e-12 && vel_err <= 1e-12,
             "|S| " + format_g17(s_max) + ", Biot-Savart defect " + format_g17(vel_err));
    }

    // two-vortex co-rotation period 4 pi^2 at coarse dt
    {
        const DepthField flat = DepthField::constant(1.0);
        const GridGeometry geom(64, 8.0);
        KernelTable t = KernelTable::build(flat, geom, 5);
        VortexEnsemble s;
        s.positions = {{0.5, 0.0}, {-0.5, 0.0}};
        s.alpha = 0.0;
        const double period = kTwoPi * kTwoPi; // 4 pi^2
        const double dt = 1e-2;
        const int steps = int(std::lround(period / dt));
        VortexEnsemble cur = s;
        for (int k = 0; k < steps; ++k) cur = step_rk4(cur, period / steps, t, flat);
        const double ret = (cur.positions[0] - s.positions[0]).norm();
        item("two-vortex period", ret <= 1e-2, "return distance " + format_g17(ret));
    }

    // manufactured lake-elliptic solution at n=128
    {
        const GridGeometry geom(128, 8.0);
        LakeEllipticSolver solver(bump, geom);
        ScalarGrid omega(geom), exact(geom);
        for (int j = 0; j < geom.n; ++j) {
            for (int i = 0; i < geom.n; ++i) {
                const Vec2 p = geom.node(i, j);
                const double e = std::exp(-p.norm2());
                const double b = bump.value(p);
                const Vec2 gpsi = -2.0 * e * p;
                const double lap = (4.0 * p.norm2() - 4.0) * e;
                // omega = -(1/b) lap psi* + (grad b / b^2) . grad psi*
                omega.at(i, j) = -lap / b + bump.gradient(p).dot(gpsi) / (b * b);
                exact.at(i, j) = e;
            }
        }
        ScalarGrid psi = solver.solve(omega);
        psi.shift(exact.mean() - psi.mean());
        double err = 0.0;
        for (size_t k = 0; k < psi.values().size(); ++k)
            err = std::max(err, std::abs(psi.values()[k] - exact.values()[k]));
        item("manufactured elliptic solution", err <= 5e-3, "Linf error " + format_g17(err));
    }

    std::cout << (failures == 0 ? "selfcheck passed\n" : "selfcheck FAILED\n");
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"lake point-vortex laboratory"};
    app.require_subcommand(1);

    auto* kernel = app.add_subcommand("kernel", "kernel table management");
    kernel->require_subcommand(1);
    std::string kb_config;
    auto* kernel_build = kernel->add_subcommand("build", "build and cache the kernel table");
    kernel_build->add_option("config", kb_config, "config JSON path")->required();

    std::string run_config;
    auto* run = app.add_subcommand("run", "run one experiment");
    run->add_option("config", run_config, "config JSON path")->required();

    std::string sweep_config, sweep_ns;
    auto* sweep = app.add_subcommand("sweep", "mean-field sweep over N");
    sweep->add_option("config", sweep_config, "config JSON path")->required();
    sweep->add_option("--N", sweep_ns, "ascending comma-separated N list")->required();

    auto* selfcheck = app.add_subcommand("selfcheck", "fast invariant suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (kernel_build->parsed()) return cmd_kernel_build(kb_config);
        if (run->parsed()) return cmd_run(run_config);
        if (sweep->parsed()) {
            std::vector<int> Ns;
            std::stringstream ss(sweep_ns);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                try {
                    Ns.push_back(std::stoi(tok));
                } catch (...) {
                    std::cerr << "bad N list entry: " << tok << "\n";
                    return 2;
                }
            }
            return cmd_sweep(sweep_config, Ns);
        }
        if (selfcheck->parsed()) return cmd_selfcheck();
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationFailure& e) {
        std::cerr << "validation failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
