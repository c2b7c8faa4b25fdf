#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "lakevortex/config.hpp"
#include "lakevortex/continuum.hpp"
#include "lakevortex/diagnostics.hpp"
#include "lakevortex/dynamics.hpp"
#include "lakevortex/kernel_table.hpp"

namespace lakevortex {

struct RunResult {
    DiagnosticsRecord record;
    std::vector<std::vector<Vec2>> trajectory; // vortex positions at sample times
    std::vector<Vec2> initial;
    double dt = 0.0;
};

/// Integrates the vortex system and its continuum reference over [0, T] with
/// fixed-step RK4 / RK2, sampling the full diagnostics row every
/// sample_every steps (plus t = 0 and t = T). A near-collision aborts the
/// run and flags the partial record instead of throwing.
inline RunResult run_simulation(const ExperimentConfig& c, const DepthField& depth,
                                const KernelTable& table) {
    RunResult out;

    VortexEnsemble state;
    state.positions = sample_vortices(c.omega0, c.N, c.sampling, c.seed);
    state.alpha = c.alpha;
    state.regime = c.regime;
    out.initial = state.positions;

    ContinuumVorticity omega = ContinuumVorticity::from_omega0(c.omega0, c.continuum_M());
    LakeEllipticSolver solver(depth, c.grid);

    double dt = c.dt > 0.0 ? c.dt : default_dt(state);
    int nsteps = (c.T > 0.0) ? std::max(1, int(std::lround(c.T / dt))) : 0;
    if (nsteps > 0) dt = c.T / nsteps; // land exactly on T
    out.dt = dt;

    DiagnosticsRecord& rec = out.record;
    rec.N = c.N;
    rec.regime = c.regime;
    rec.alpha = c.alpha;
    rec.grid = c.grid;
    rec.seed = c.seed;

    const double eps_close = c.eps_close_value();
    auto sample = [&]() {
        DiagnosticsSample s;
        s.t = state.time;
        s.E_N = interaction_energy(state.positions, table, depth);
        s.I_N = moment_inertia(state.positions);
        const auto [e1, e2] = total_energy_candidates(state.positions, table, depth, c.alpha);
        s.Etot1 = e1;
        s.Etot2 = e2;
        s.F_b = modulated_energy(state.positions, omega, depth, solver, table);
        s.Hs = sobolev_distance(state.positions, omega.deposit(c.grid), c.sobolev_s,
                                kTwoPi / 2.0 / c.grid.h());
        s.min_sep = c.N >= 2 ? min_separation(state) : 0.0;
        s.close_pairs = count_close_pairs(state.positions, eps_close);
        rec.samples.push_back(s);
        out.trajectory.push_back(state.positions);
    };

    sample();
    for (int step = 1; step <= nsteps; ++step) {
        try {
            state = step_rk4(state, dt, table, depth);
            if (c.regime == Regime::Physical)
                omega.advance_lake(solver, depth, c.continuum_alpha(), dt);
            else
                omega.advance_transport(depth, dt);
        } catch (const CollisionImminent& e) {
            rec.complete = false;
            rec.abort_reason = e.what();
            break;
        }
        if (step % c.sample_every == 0 || step == nsteps) sample();
    }
    return out;
}

inline std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string diagnostics_csv(const DiagnosticsRecord& rec) {
    std::string s = "t,E_N,I_N,Etot1,Etot2,F_b,Hs,min_sep,close_pairs\n";
    for (const auto& r : rec.samples) {
        s += format_g17(r.t) + ',' + format_g17(r.E_N) + ',' + format_g17(r.I_N) + ',' +
             format_g17(r.Etot1) + ',' + format_g17(r.Etot2) + ',' + format_g17(r.F_b) + ',' +
             format_g17(r.Hs) + ',' + format_g17(r.min_sep) + ',' +
             std::to_string(r.close_pairs) + '\n';
    }
    return s;
}

/// Scalar outcomes of a run, for the summary document.
struct RunSummary {
    double F_b_final = 0.0;
    double F_b_sup = 0.0;
    double Hs_final = 0.0;
    double E_N_initial = 0.0;
    double drift_Etot1 = 0.0; // max |Etot(t) - Etot(0)|
    double drift_Etot2 = 0.0;
    double drift_E_N = 0.0;
    double level_set_drift = 0.0; // max |b(q(t)) - b(q(0))| over vortices, N small
    int conserved_candidate = 0;  // 1 or 2, whichever drifts less (0 if tie/empty)
};

inline RunSummary summarize(const RunResult& run, const DepthField& depth) {
    RunSummary s;
    const auto& rows = run.record.samples;
    if (rows.empty()) return s;
    s.E_N_initial = rows.front().E_N;
    s.F_b_final = rows.back().F_b;
    s.Hs_final = rows.back().Hs;
    s.F_b_sup = rows.front().F_b; // F_b is signed; do not clamp at zero
    for (const auto& r : rows) {
        s.F_b_sup = std::max(s.F_b_sup, r.F_b);
        s.drift_Etot1 = std::max(s.drift_Etot1, std::abs(r.Etot1 - rows.front().Etot1));
        s.drift_Etot2 = std::max(s.drift_Etot2, std::abs(r.Etot2 - rows.front().Etot2));
        s.drift_E_N = std::max(s.drift_E_N, std::abs(r.E_N - rows.front().E_N));
    }
    s.conserved_candidate = s.drift_Etot1 < s.drift_Etot2 ? 1 : 2;
    if (run.record.N <= 64) {
        for (size_t k = 0; k < run.trajectory.size(); ++k)
            for (size_t i = 0; i < run.trajectory[k].size(); ++i)
                s.level_set_drift =
                    std::max(s.level_set_drift, std::abs(depth.value(run.trajectory[k][i]) -
                                                         depth.value(run.initial[i])));
    }
    return s;
}

} // namespace lakevortex
