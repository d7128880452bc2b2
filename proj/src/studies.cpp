#include "studies.hpp"

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "artifacts.hpp"
#include "ifcable/errors.hpp"
#include "ifcable/experiments.hpp"
#include "ifcable/model.hpp"
#include "ifcable/rectangles.hpp"
#include "ifcable/solver.hpp"
#include "ifcable/source.hpp"

namespace ifcable::cli {

namespace {

using nlohmann::ordered_json;
using Array = solver::Array<double>;

constexpr double kTwoPi = 2 * EIGEN_PI;

struct StudyBody {
    ordered_json diagnostics = ordered_json::object();
    ordered_json checks = ordered_json::object();
};

bool wants(const RunConfig& cfg, const std::string& fmt) {
    for (const auto& f : cfg.output.formats)
        if (f == fmt) return true;
    return false;
}

std::string artifact_path(const RunConfig& cfg, const std::string& name) {
    return cfg.output.directory + "/" + name;
}

/// Centered-frame initial data per the study's `initial` choice.
solver::FieldState<double> make_initial(const RunConfig& cfg, const solver::Grid<double>& grid) {
    solver::FieldState<double> st;
    st.t = 0;
    st.u1 = Array::Zero(grid.n_points);
    st.u2 = Array::Zero(grid.n_points);
    if (cfg.study.initial == "bump") {
        const Array xs = grid.points();
        const Array bump = (-(xs / cfg.study.bump_width).square()).exp();
        st.u1 = cfg.study.bump_amp1 * bump;
        st.u2 = cfg.study.bump_amp2 * bump;
    }
    return st;
}

double snapped_dt(double interval, double target, long& n_sub) {
    n_sub = std::max(1L, long(std::ceil(interval / target - 1e-12)));
    return interval / double(n_sub);
}

StudyBody run_equilibrium(const RunConfig& cfg) {
    StudyBody body;
    const auto& mp = cfg.model;
    const auto adm = cfg.model.delta_witness
                         ? model::check_admissible(mp.beta, mp.gamma,
                                                   std::vector<double>{*cfg.model.delta_witness})
                         : model::check_admissible(mp.beta, mp.gamma);
    ordered_json j;
    body.checks["admissible"] = adm.admissible;
    if (!adm.admissible) {
        j["admissible"] = false;
        body.checks["cubic_residual_small"] = false;
        body.checks["bounds_satisfied"] = false;
    } else {
        const auto eq = model::solve_equilibrium(mp.beta, mp.gamma, 1e-12);
        const double delta = *adm.witness;
        const auto bounds = model::equilibrium_bounds(eq, mp.beta, mp.gamma, delta);
        const double cubic = std::abs(model::h_cubic(eq.v0, mp.beta, mp.gamma));
        const double recovery = std::abs(mp.gamma * eq.w0 - eq.v0 - mp.beta);
        j["v0"] = eq.v0;
        j["w0"] = eq.w0;
        j["residuals"] = {{"cubic", cubic}, {"recovery", recovery}};
        j["bounds_satisfied"] = bounds.lower_ok && bounds.upper_ok;
        j["witness_delta"] = delta;
        body.checks["cubic_residual_small"] = cubic <= 1e-12;
        body.checks["bounds_satisfied"] = bounds.lower_ok && bounds.upper_ok;
        body.diagnostics["bounds"] = {{"lower", bounds.lower}, {"upper", bounds.upper}};
    }
    if (wants(cfg, "json")) write_json(artifact_path(cfg, "equilibrium.json"), j);
    return body;
}

StudyBody run_admissible(const RunConfig& cfg) {
    StudyBody body;
    const auto& mp = cfg.model;
    const auto adm = model::check_admissible(mp.beta, mp.gamma);
    ordered_json j;
    j["admissible"] = adm.admissible;
    if (adm.witness)
        j["witness_delta"] = *adm.witness;
    else
        j["witness_delta"] = nullptr;
    j["discriminant"] = model::admissible_discriminant(mp.beta, mp.gamma);
    if (wants(cfg, "json")) write_json(artifact_path(cfg, "admissible.json"), j);
    body.checks["admissible"] = adm.admissible;
    return body;
}

StudyBody run_rectangle(const RunConfig& cfg) {
    StudyBody body;
    const auto& mp = cfg.model;
    const auto& sp = cfg.source;
    const auto& s = cfg.study;
    const auto grid = effective_grid(cfg);
    const auto eq = model::solve_equilibrium(mp.beta, mp.gamma, 1e-12);
    const double M = source::sup_amplitude(sp);
    const double Delta = s.Delta >= 0 ? s.Delta : M;

    ordered_json j;
    j["Delta"] = Delta;
    const auto rect = rectangles::find_rectangle(eq.v0, mp.gamma, Delta, s.bound);
    body.checks["rectangle_found"] = bool(rect);
    if (!rect) {
        j["rect"] = nullptr;
        body.checks["margin_negative"] = false;
        body.checks["invariant"] = false;
        if (wants(cfg, "json")) write_json(artifact_path(cfg, "certification.json"), j);
        return body;
    }
    j["rect"] = {{"L", rect->L}, {"S", rect->S}};

    const double T_face = kTwoPi / sp.eta;  // envelope period
    const double margin = rectangles::face_flux_margin<double>(
        rectangles::FieldKind::H, *rect, sp, mp, eq, s.x_samples, s.t_samples, T_face, nullptr,
        grid.half_extent, cfg.seed);
    j["margin"] = margin;
    j["samples"] = {{"x", s.x_samples + 2}, {"t", s.t_samples}};
    body.checks["margin_negative"] = margin < 0;

    // Invariance run from initial data at the requested gauge.
    const double T_inv = s.invariance_T > 0 ? s.invariance_T : 100 / sp.eta;
    long n_sub = 0;
    const double dt_pas = snapped_dt(
        T_inv, kTwoPi / sp.eta / cfg.time.dt_policy.slow_steps_per_period, n_sub);
    solver::FieldState<double> init;
    init.t = 0;
    const Array xs = grid.points();
    const Array bump = (-(xs / (grid.half_extent / 8)).square()).exp();
    init.u1 = s.initial_gauge * rect->L * bump;
    init.u2 = s.initial_gauge * rect->S * bump;
    const auto pas_spec = solver::make_pas_system(mp, sp, eq);
    solver::SimDiagnostics<double> sim_diag;
    const long n_steps = long(std::ceil(T_inv / dt_pas - 1e-12));
    const long sample_every = std::max(1L, n_steps / 1000);
    const auto traj = solver::simulate(pas_spec, grid, init, T_inv, dt_pas, sample_every,
                                       &sim_diag);
    const auto inv = rectangles::monitor_invariance(traj, *rect, 1e-6);
    j["invariant"] = inv.invariant;
    j["max_gauge"] = inv.max_gauge;
    body.checks["invariant"] = inv.invariant;
    body.diagnostics["invariance"] = {{"T", T_inv},
                                      {"dt", dt_pas},
                                      {"samples", traj.size()},
                                      {"initial_gauge", s.initial_gauge}};
    if (inv.first_exit_time) body.diagnostics["invariance"]["first_exit_time"] = *inv.first_exit_time;

    // Error-rectangle scale from measured bounds: C1 from the averaged run,
    // C2 from the closed-form coefficient bound, C3 from a linear-error run.
    const double C1 = solver::y_norm(traj, 1);
    const double C2 = M * M + 2 * M * (std::abs(eq.v0) + C1);
    const double T_err = std::min(cfg.time.T, T_inv);
    long n_sub_f = 0;
    const double dt_fast = snapped_dt(
        T_err, kTwoPi / sp.omega2() / cfg.time.dt_policy.fast_steps_per_period, n_sub_f);
    const auto lin_spec = solver::make_linear_error_system(mp, sp, eq, grid, traj);
    solver::FieldState<double> zero;
    zero.t = 0;
    zero.u1 = Array::Zero(grid.n_points);
    zero.u2 = Array::Zero(grid.n_points);
    const long nf_steps = long(std::ceil(T_err / dt_fast - 1e-12));
    const auto ftraj = solver::simulate(lin_spec, grid, zero, T_err, dt_fast,
                                        std::max(1L, nf_steps / 1000));
    const double C3 = solver::y_norm(ftraj, 1);
    const double eps_margin = mp.gamma * rect->S / rect->L - 1;
    rectangles::ErrorRectangleInputs<double> eri{C1, C2, C3, eps_margin, eq.v0, mp.gamma};
    const auto er = rectangles::error_rectangle(eri);
    if (er)
        j["L_hat"] = er->L_hat;
    else
        j["L_hat"] = nullptr;
    body.diagnostics["error_rectangle"] = {{"C1", C1}, {"C2", C2}, {"C3", C3},
                                           {"eps_margin", eps_margin}};

    if (wants(cfg, "json")) write_json(artifact_path(cfg, "certification.json"), j);
    return body;
}

StudyBody run_simulate(const RunConfig& cfg) {
    StudyBody body;
    const auto& mp = cfg.model;
    const auto& sp = cfg.source;
    const auto grid = effective_grid(cfg);
    const auto eq = model::solve_equilibrium(mp.beta, mp.gamma, 1e-12);
    const std::string& system = cfg.study.system;

    // dt per policy: averaged dynamics resolve eta, everything else omega2.
    long n_sub = 0;
    const double target = system == "pas"
                              ? kTwoPi / sp.eta / cfg.time.dt_policy.slow_steps_per_period
                              : kTwoPi / sp.omega2() / cfg.time.dt_policy.fast_steps_per_period;
    const double dt = snapped_dt(cfg.time.T, target, n_sub);

    // Coupled prerequisites for the error systems.
    solver::Trajectory<double> V_traj, F_traj;
    const bool needs_V =
        system == "linear_error" || system == "nonlinear_error" || system == "remainder";
    if (needs_V) {
        long n_slow = 0;
        const double dt_slow = snapped_dt(
            cfg.time.T, kTwoPi / sp.eta / cfg.time.dt_policy.slow_steps_per_period, n_slow);
        V_traj = solver::simulate(solver::make_pas_system(mp, sp, eq), grid,
                                  make_initial(cfg, grid), cfg.time.T, dt_slow, 1);
    }
    if (system == "remainder") {
        solver::FieldState<double> zero;
        zero.t = 0;
        zero.u1 = Array::Zero(grid.n_points);
        zero.u2 = Array::Zero(grid.n_points);
        F_traj = solver::simulate(solver::make_linear_error_system(mp, sp, eq, grid, V_traj), grid,
                                  zero, cfg.time.T, dt, 16);
    }

    solver::SystemSpec<double> spec;
    if (system == "full")
        spec = solver::make_full_system(mp, sp, eq);
    else if (system == "centered")
        spec = solver::make_centered_system(mp, sp, eq);
    else if (system == "pas")
        spec = solver::make_pas_system(mp, sp, eq);
    else if (system == "linear_error")
        spec = solver::make_linear_error_system(mp, sp, eq, grid, V_traj);
    else if (system == "nonlinear_error")
        spec = solver::make_nonlinear_error_system(mp, sp, eq, grid, V_traj);
    else
        spec = solver::make_remainder_system(mp, sp, eq, grid, V_traj, F_traj);

    solver::FieldState<double> init = make_initial(cfg, grid);
    if (system == "full") {
        init.u1 += eq.v0;
        init.u2 += eq.w0;
    }
    if (system == "linear_error" || system == "nonlinear_error" || system == "remainder") {
        init.u1.setZero();  // error systems start from zero data by definition
        init.u2.setZero();
    }

    const long n_steps = long(std::ceil(cfg.time.T / dt - 1e-12));
    const long sample_every =
        cfg.time.sample_every > 0 ? cfg.time.sample_every : std::max(1L, n_steps / 200);
    solver::SimDiagnostics<double> diag;
    const auto traj = solver::simulate(spec, grid, init, cfg.time.T, dt, sample_every, &diag);

    if (wants(cfg, "csv")) {
        const Array xs = grid.points();
        std::vector<std::vector<double>> rows;
        rows.reserve(traj.size() * std::size_t(grid.n_points));
        for (const auto& st : traj)
            for (Eigen::Index i = 0; i < grid.n_points; ++i)
                rows.push_back({st.t, xs[i], st.u1[i], st.u2[i]});
        write_csv(artifact_path(cfg, "trajectory.csv"), {"t", "x", "u1", "u2"}, rows);

        const double td = cfg.study.source_dump_time;
        std::vector<std::vector<double>> srows;
        const Array A = source::profile_A(sp, xs), B = source::profile_B(sp, xs);
        const Array I = source::source_I(sp, xs, td), J0 = source::source_J0(sp, xs, td);
        const Array env = source::source_envelope(sp, xs, td);
        for (Eigen::Index i = 0; i < grid.n_points; ++i)
            srows.push_back({xs[i], A[i], B[i], I[i], J0[i], env[i]});
        write_csv(artifact_path(cfg, "source.csv"), {"x", "A", "B", "I", "J0", "envelope"}, srows);
    }

    const auto trunc = solver::truncation_report(sp, grid);
    body.diagnostics["grid"] = {{"half_extent", grid.half_extent},
                                {"n_points", grid.n_points},
                                {"dx", grid.dx()}};
    body.diagnostics["dt"] = diag.dt;
    body.diagnostics["steps_taken"] = diag.steps_taken;
    body.diagnostics["sample_every"] = sample_every;
    body.diagnostics["samples"] = traj.size();
    body.diagnostics["truncation"] = {{"A_at_boundary", trunc.A_at_boundary},
                                      {"B_at_boundary", trunc.B_at_boundary},
                                      {"relative_to_delta", trunc.relative_to_delta}};
    body.diagnostics["warnings"] = diag.warnings;
    body.checks["completed"] = true;
    return body;
}

StudyBody run_average_check(const RunConfig& cfg) {
    StudyBody body;
    const auto& mp = cfg.model;
    const auto& s = cfg.study;
    const auto eq = model::solve_equilibrium(mp.beta, mp.gamma, 1e-12);

    std::vector<double> omegas = s.omega_list;
    if (omegas.empty()) omegas = {100 * cfg.source.eta, 200 * cfg.source.eta, 400 * cfg.source.eta};
    std::vector<double> ts = s.t_values;
    if (ts.empty()) ts = {10 * kTwoPi / 100, 25 * kTwoPi / 100, 40 * kTwoPi / 100};

    std::vector<std::vector<double>> rows;
    // residuals[k] holds one entry per (V,x,t) grid point, in a fixed order
    std::vector<std::vector<double>> res1(omegas.size()), res2(omegas.size());
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        source::SourceParams<double> sp = cfg.source;
        sp.omega1 = omegas[k];
        for (double V : s.V_values)
            for (double x : s.x_values)
                for (double t : ts) {
                    const auto r = experiments::verify_pas_derivation(sp, mp, eq, V, s.W, x, t);
                    res1[k].push_back(r.residual1);
                    res2[k].push_back(r.residual2);
                    rows.push_back({sp.omega1, V, s.W, x, t, r.residual1, r.residual2});
                }
    }
    if (wants(cfg, "csv"))
        write_csv(artifact_path(cfg, "average_check.csv"),
                  {"omega1", "V", "W", "x", "t", "residual1", "residual2"}, rows);

    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
    for (std::size_t k = 0; k + 1 < omegas.size(); ++k)
        for (std::size_t i = 0; i < res1[k].size(); ++i) {
            const double r1 = res1[k + 1][i] / res1[k][i];
            const double r2 = res2[k + 1][i] / res2[k][i];
            lo1 = std::min(lo1, r1);
            hi1 = std::max(hi1, r1);
            lo2 = std::min(lo2, r2);
            hi2 = std::max(hi2, r2);
        }
    body.diagnostics["ratio1"] = {{"min", lo1}, {"max", hi1}};
    body.diagnostics["ratio2"] = {{"min", lo2}, {"max", hi2}};
    body.checks["residual1_halves"] = lo1 >= 0.4 && hi1 <= 0.6;
    body.checks["residual2_halves"] = lo2 >= 0.4 && hi2 <= 0.6;
    return body;
}

StudyBody run_oscillatory(const RunConfig& cfg) {
    StudyBody body;
    const auto& s = cfg.study;
    const auto eq = model::solve_equilibrium(cfg.model.beta, cfg.model.gamma, 1e-12);
    std::vector<double> omegas = s.omega_list;
    if (omegas.empty()) omegas = {50, 100, 200, 400, 800};

    std::vector<std::pair<std::string, experiments::OscillatoryProfile>> profiles;
    if (s.profile == "constant" || s.profile == "both")
        profiles.emplace_back("constant", experiments::OscillatoryProfile::constant);
    if (s.profile == "gaussian_cos" || s.profile == "both")
        profiles.emplace_back("gaussian_cos", experiments::OscillatoryProfile::gaussian_cos);

    bool all_in_range = true;
    for (const auto& [name, prof] : profiles) {
        const double c = eq.v0 * eq.v0 - 1;
        std::function<double(double, double)> f;
        if (prof == experiments::OscillatoryProfile::constant)
            f = [](double, double) { return 1.0; };
        else
            f = [](double y, double t) { return std::exp(-y * y) * std::cos(t); };
        std::vector<std::vector<double>> rows;
        std::vector<double> mags;
        for (double w : omegas) {
            const double m = std::abs(experiments::oscillatory_integral(c, s.d, w, f, s.x, s.t));
            mags.push_back(m);
            rows.push_back({w, m});
        }
        const double slope = experiments::fit_loglog_slope(omegas, mags);
        if (wants(cfg, "csv"))
            write_csv(artifact_path(cfg, "oscillatory_" + name + ".csv"), {"omega", "abs_I"},
                      rows);
        body.diagnostics["slope_" + name] = slope;
        all_in_range = all_in_range && slope >= -1.3 && slope <= -0.7;
    }
    body.checks["decay_order_in_range"] = all_in_range;
    return body;
}

StudyBody run_sweep(const RunConfig& cfg) {
    StudyBody body;
    const auto& mp = cfg.model;
    const auto& sp = cfg.source;
    const auto grid = effective_grid(cfg);

    experiments::SweepOptions<double> opts;
    opts.sample_interval = cfg.study.sample_interval;
    opts.fast_steps_per_period = cfg.time.dt_policy.fast_steps_per_period;
    opts.slow_steps_per_period = cfg.time.dt_policy.slow_steps_per_period;
    opts.n_threads = cfg.threads;
    const double M = source::sup_amplitude(sp);
    if (cfg.study.monitor_bound > 0) {
        const auto eq = model::solve_equilibrium(mp.beta, mp.gamma, 1e-12);
        const auto rect =
            rectangles::find_rectangle(eq.v0, mp.gamma, M, cfg.study.monitor_bound);
        if (rect) {
            opts.monitor = *rect;
            body.diagnostics["monitor_rect"] = {{"L", rect->L}, {"S", rect->S}};
        } else {
            body.diagnostics["monitor_rect"] = nullptr;
        }
    }

    const auto res = experiments::approximation_study(mp, sp, cfg.study.omega_list, cfg.time.T,
                                                      grid, make_initial(cfg, grid), opts);

    if (wants(cfg, "csv")) {
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < res.omega_values.size(); ++i)
            rows.push_back({res.omega_values[i], res.errors_v[i], res.errors_w[i], res.alpha[i],
                            res.fv_ynorm_times_omega[i]});
        write_csv(artifact_path(cfg, "sweep.csv"),
                  {"omega1", "error_v", "error_w", "alpha", "Fv_ynorm_times_omega"}, rows);
    }

    const auto sd = experiments::check_small_data(res.sup_V, M, mp.gamma, mp.beta);
    bool monotone = true;
    for (std::size_t i = 0; i + 1 < res.errors_v.size(); ++i)
        monotone = monotone && res.errors_v[i + 1] < res.errors_v[i];
    double fvmax = 0, fvmin = 1e300;
    for (double v : res.fv_ynorm_times_omega) {
        fvmax = std::max(fvmax, v);
        fvmin = std::min(fvmin, v);
    }
    bool alpha_ok = true;
    if (sd.ok)
        for (double a : res.alpha) alpha_ok = alpha_ok && a < 1;

    body.diagnostics["fitted_order"] = res.fitted_order;
    body.diagnostics["sup_V"] = res.sup_V;
    body.diagnostics["sup_dxV"] = res.sup_dxV;
    body.diagnostics["sup_dtV"] = res.sup_dtV;
    body.diagnostics["small_data"] = {{"ok", sd.ok},
                                      {"threshold_v", sd.threshold_v},
                                      {"threshold_m", sd.threshold_m},
                                      {"slack_v", sd.slack_v},
                                      {"slack_m", sd.slack_m}};
    if (opts.monitor) {
        body.diagnostics["pas_invariant"] = res.pas_invariant;
        body.diagnostics["pas_max_gauge"] = res.pas_max_gauge;
        body.checks["pas_invariant"] = res.pas_invariant;
    }
    body.checks["order_in_range"] =
        res.omega_values.size() < 2 || (res.fitted_order >= 0.7 && res.fitted_order <= 1.3);
    body.checks["errors_monotone"] = monotone;
    body.checks["fv_bounded"] = fvmin > 0 && fvmax / fvmin < 3;
    body.checks["alpha_lt_1_when_small_data"] = alpha_ok;
    return body;
}

}  // namespace

StudyOutcome run_study(const RunConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    ensure_directory(cfg.output.directory);

    StudyOutcome out;
    out.manifest["study"] = cfg.study.kind;
    out.manifest["config"] = echo_config(cfg);

    StudyBody body;
    try {
        if (cfg.study.kind == "equilibrium")
            body = run_equilibrium(cfg);
        else if (cfg.study.kind == "admissible")
            body = run_admissible(cfg);
        else if (cfg.study.kind == "rectangle")
            body = run_rectangle(cfg);
        else if (cfg.study.kind == "simulate")
            body = run_simulate(cfg);
        else if (cfg.study.kind == "average-check")
            body = run_average_check(cfg);
        else if (cfg.study.kind == "oscillatory")
            body = run_oscillatory(cfg);
        else if (cfg.study.kind == "sweep")
            body = run_sweep(cfg);
        else
            throw ConfigError("config validation: study.kind: unknown study");
    } catch (const BlowUpError& e) {
        out.manifest["error"] = {{"type", "blow-up"}, {"what", e.what()}, {"time", e.time}};
        out.exit_code = 2;
    } catch (const Error& e) {
        out.manifest["error"] = {{"type", "abort"}, {"what", e.what()}};
        out.exit_code = 2;
    }

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.manifest["diagnostics"] = body.diagnostics;
    out.manifest["checks"] = body.checks;
    out.manifest["wall_time_seconds"] = wall;

    if (out.exit_code == 0) {
        bool pass = true;
        for (const auto& [_, v] : body.checks.items()) pass = pass && v.get<bool>();
        out.manifest["pass"] = pass;
        out.exit_code = pass ? 0 : 1;
    } else {
        out.manifest["pass"] = false;
    }
    write_json(artifact_path(cfg, "manifest.json"), out.manifest);
    return out;
}

}  // namespace ifcable::cli
