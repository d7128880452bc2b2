#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ifcable/detail/gauss_legendre.hpp"
#include "ifcable/errors.hpp"
#include "ifcable/model.hpp"
#include "ifcable/rectangles.hpp"
#include "ifcable/solver.hpp"
#include "ifcable/source.hpp"

namespace ifcable::experiments {

/// @brief Mean of f over the fast window [t - pi/omega1, t + pi/omega1].
template <class Scalar, class F>
Scalar window_average(F&& f, Scalar t, Scalar omega1, int quad_points = 64) {
    if (!(omega1 > 0)) throw PreconditionError("window_average: omega1 must be positive");
    if (quad_points < 8) throw PreconditionError("window_average: quad_points must be >= 8");
    const Scalar half = Scalar(EIGEN_PI) / omega1;
    const std::size_t panels = std::max<std::size_t>(4, std::size_t((quad_points + 7) / 8));
    return ifcable::detail::composite_gl8(f, t - half, t + half, panels) / (2 * half);
}

namespace detail {

/// Instantaneous right-hand side of the centered voltage equation, evaluated
/// at v = V + J0(x,s) and shifted by the second x-derivative of J0. This is
/// the quantity whose fast-window average the averaged system approximates.
template <class Scalar>
Scalar psi1_direct(const source::SourceParams<Scalar>& sp, const model::Equilibrium<Scalar>& eq,
                   Scalar V, Scalar W, Scalar x, Scalar s) {
    using std::sin;
    const auto f = source::eval_profiles(sp, x);
    const Scalar s1 = sin(sp.omega1 * s), s2 = sin(sp.omega2() * s);
    const Scalar J = f.A * s1 + f.B * s2;
    const Scalar Jxx = f.A_xx * s1 + f.B_xx * s2;
    const Scalar v0 = eq.v0, v = V + J;
    return (1 - v0 * v0) * v - v0 * v * v - v * v * v / 3 - W + Jxx;
}

/// Same quantity written as slow terms minus the bookkeeping fields
/// X1 = J0^2 + 2 v0 J0 and the oscillatory remainder Z.
template <class Scalar>
Scalar psi1_decomposed(const source::SourceParams<Scalar>& sp, const model::Equilibrium<Scalar>& eq,
                       Scalar V, Scalar W, Scalar x, Scalar s) {
    using std::sin;
    const auto f = source::eval_profiles(sp, x);
    const Scalar s1 = sin(sp.omega1 * s), s2 = sin(sp.omega2() * s);
    const Scalar J = f.A * s1 + f.B * s2;
    const Scalar Jxx = f.A_xx * s1 + f.B_xx * s2;
    const Scalar v0 = eq.v0;
    const Scalar X1 = J * J + 2 * v0 * J;
    const Scalar Z = -f.A * s1 - f.B * s2 + f.A * f.A * f.A / 3 * s1 * s1 * s1 +
                     f.B * f.B * f.B / 3 * s2 * s2 * s2 + f.A * V * V * s1 + f.B * V * V * s2 +
                     f.A * f.A * f.B * s1 * s1 * s2 + f.A * f.B * f.B * s1 * s2 * s2 - Jxx +
                     v0 * v0 * J;
    return (1 - v0 * v0) * V - v0 * V * V - V * V * V / 3 - W - V * X1 - Z - v0 * J * J;
}

template <class Scalar>
Scalar psi2(const model::ModelParams<Scalar>& mp, const source::SourceParams<Scalar>& sp, Scalar V,
            Scalar W, Scalar x, Scalar s) {
    using std::sin;
    const auto f = source::eval_profiles(sp, x);
    const Scalar J = f.A * sin(sp.omega1 * s) + f.B * sin(sp.omega2() * s);
    return mp.epsilon * (V - mp.gamma * W) + mp.epsilon * J;
}

}  // namespace detail

template <class Scalar>
struct PasResiduals {
    Scalar residual1{};  // |window mean of the fast voltage RHS - averaged RHS|
    Scalar residual2{};  // same for the recovery equation
};

/// @brief Compares the fast-window mean of the instantaneous right-hand sides
/// with the averaged-system right-hand sides at frozen (V, W, x, t). Both
/// residuals decay like 1/omega1 once omega1 dominates eta.
template <class Scalar>
PasResiduals<Scalar> verify_pas_derivation(const source::SourceParams<Scalar>& sp,
                                           const model::ModelParams<Scalar>& mp,
                                           const model::Equilibrium<Scalar>& eq, Scalar V, Scalar W,
                                           Scalar x, Scalar t, int quad_points = 256) {
    using std::abs;
    source::validate(sp);
    const Scalar v0 = eq.v0;
    const auto tf = source::eval_time_fields(sp, x, t);
    const Scalar rhs1 = (1 - v0 * v0 - tf.envelope) * V - v0 * V * V - V * V * V / 3 - W -
                        tf.envelope * v0;
    const Scalar rhs2 = mp.epsilon * (V - mp.gamma * W);

    const Scalar mean1 = window_average(
        [&](Scalar s) { return detail::psi1_decomposed(sp, eq, V, W, x, s); }, t, sp.omega1,
        quad_points);
    const Scalar mean2 = window_average(
        [&](Scalar s) { return detail::psi2(mp, sp, V, W, x, s); }, t, sp.omega1, quad_points);
    return {abs(mean1 - rhs1), abs(mean2 - rhs2)};
}

enum class OscillatoryProfile { constant, gaussian_cos };

/// @brief Heat-semigroup integral of a damped oscillatory Lorentzian source,
///
///   I = e^{i w t} \int_0^t e^{-(i w + c) s} psi(x, s) ds,
///   psi(x, s) = pi^{-1/2} \int e^{-z^2} f(x - 2 sqrt(s) z, t - s)
///               / (d^2 + (x - 2 sqrt(s) z)^2) dz,
///
/// evaluated by composite Gauss-Legendre panels with doubling refinement.
/// Throws AccuracyError if successive refinements fail to agree to rel_tol.
template <class Scalar>
std::complex<Scalar> oscillatory_integral(Scalar c, Scalar d, Scalar omega,
                                          const std::function<Scalar(Scalar, Scalar)>& f, Scalar x,
                                          Scalar t, Scalar rel_tol = Scalar(1e-4)) {
    using std::abs;
    using std::ceil;
    using std::exp;
    using std::sqrt;
    if (!(c > 0)) throw PreconditionError("oscillatory_integral: decay rate must be positive");
    if (!(d > 0)) throw PreconditionError("oscillatory_integral: d must be positive");
    if (!(omega > 0)) throw PreconditionError("oscillatory_integral: omega must be positive");
    if (!(t > 0)) throw PreconditionError("oscillatory_integral: t must be positive");
    if (!f) throw PreconditionError("oscillatory_integral: missing profile");

    const auto psi = [&](Scalar s) {
        const Scalar rs = sqrt(s);
        return ifcable::detail::composite_gl8(
                   [&](Scalar z) {
                       const Scalar y = x - 2 * rs * z;
                       return exp(-z * z) * f(y, t - s) / (d * d + y * y);
                   },
                   Scalar(-8), Scalar(8), 24) /
               sqrt(Scalar(EIGEN_PI));
    };
    const auto eval = [&](std::size_t panels) {
        const std::complex<Scalar> rate(c, omega);
        return std::exp(std::complex<Scalar>(0, omega * t)) *
               ifcable::detail::composite_gl8(
                   [&](Scalar s) { return std::exp(-rate * s) * psi(s); }, Scalar(0), t, panels);
    };

    const std::size_t base =
        std::max<std::size_t>(16, std::size_t(ceil(2 * omega * t / Scalar(EIGEN_PI))));
    std::complex<Scalar> prev = eval(base);
    for (int level = 1; level <= 6; ++level) {
        const std::complex<Scalar> cur = eval(base << level);
        if (abs(cur - prev) <= rel_tol * abs(cur)) return cur;
        prev = cur;
    }
    throw AccuracyError("oscillatory_integral: refinement did not converge");
}

/// @brief Least-squares slope of log(y) against log(x).
template <class Scalar>
Scalar fit_loglog_slope(const std::vector<Scalar>& xs, const std::vector<Scalar>& ys) {
    using std::log;
    if (xs.size() != ys.size() || xs.size() < 2)
        throw PreconditionError("fit_loglog_slope: need two or more matched points");
    Scalar sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0) || !(ys[i] > 0))
            throw PreconditionError("fit_loglog_slope: entries must be positive");
        const Scalar lx = log(xs[i]), ly = log(ys[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const Scalar n = Scalar(xs.size());
    const Scalar denom = n * sxx - sx * sx;
    if (denom == 0) throw PreconditionError("fit_loglog_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / denom;
}

/// @brief Log-log decay slope of |I(omega)| across `omega_list` (about -1 in
/// the oscillatory regime) for a built-in source profile choice.
template <class Scalar>
Scalar oscillatory_decay_check(const model::Equilibrium<Scalar>& eq, Scalar d,
                               const std::vector<Scalar>& omega_list, OscillatoryProfile profile,
                               Scalar x, Scalar t) {
    using std::abs;
    using std::cos;
    using std::exp;
    if (omega_list.size() < 2)
        throw PreconditionError("oscillatory_decay_check: need at least two frequencies");
    const Scalar c = eq.v0 * eq.v0 - 1;
    std::function<Scalar(Scalar, Scalar)> f;
    switch (profile) {
        case OscillatoryProfile::constant:
            f = [](Scalar, Scalar) { return Scalar(1); };
            break;
        case OscillatoryProfile::gaussian_cos:
            f = [](Scalar y, Scalar s) { return exp(-y * y) * cos(s); };
            break;
    }
    std::vector<Scalar> mags;
    mags.reserve(omega_list.size());
    for (Scalar w : omega_list) mags.push_back(abs(oscillatory_integral(c, d, w, f, x, t)));
    return fit_loglog_slope(omega_list, mags);
}

/// @brief Contraction constant of the linear-error fixed-point map.
template <class Scalar>
Scalar compute_alpha(const solver::Trajectory<Scalar>& V_traj, Scalar M,
                     const model::Equilibrium<Scalar>& eq, Scalar gamma) {
    if (!(gamma > 0)) throw InvalidParameterError("compute_alpha: gamma must be positive");
    if (!(eq.v0 * eq.v0 > 1)) throw PreconditionError("compute_alpha: need v0^2 > 1");
    return solver::detail::alpha_constant(V_traj, M, eq, gamma);
}

template <class Scalar>
struct SmallDataReport {
    bool ok{};
    Scalar threshold_v{};  // admissible sup of |V|
    Scalar threshold_m{};  // admissible sup of the source amplitude
    Scalar slack_v{};      // threshold_v - ||V||_Y
    Scalar slack_m{};      // threshold_m - M
};

/// @brief Small-data hypotheses on the averaged trajectory and the source
/// amplitude under which the linear-error analysis applies; `v_norm` is the
/// measured Y-norm of V.
template <class Scalar>
SmallDataReport<Scalar> check_small_data(Scalar v_norm, Scalar M, Scalar gamma, Scalar beta) {
    using std::max;
    using std::min;
    using std::sqrt;
    if (!(gamma > 0) || !(beta > 0))
        throw InvalidParameterError("check_small_data: gamma and beta must be positive");
    if (M < 0 || v_norm < 0)
        throw InvalidParameterError("check_small_data: norms must be nonnegative");
    const Scalar big = max(sqrt(Scalar(3)), beta);
    SmallDataReport<Scalar> r;
    r.threshold_v = min(Scalar(1), 1 / (gamma * (1 + 2 * big)));
    r.threshold_m = min(1 / sqrt(gamma), 1 / (2 * gamma * (1 + big)));
    r.slack_v = r.threshold_v - v_norm;
    r.slack_m = r.threshold_m - M;
    r.ok = r.slack_v >= 0 && r.slack_m >= 0;
    return r;
}

template <class Scalar>
SmallDataReport<Scalar> check_small_data(const solver::Trajectory<Scalar>& V_traj, Scalar M,
                                         Scalar gamma, Scalar beta) {
    return check_small_data(solver::y_norm(V_traj, 1), M, gamma, beta);
}

template <class Scalar>
struct SweepOptions {
    Scalar sample_interval{-1};      // <= 0 selects T/400
    int slow_steps_per_period{200};  // averaged system, per 2 pi / eta
    int fast_steps_per_period{40};   // full and error systems, per 2 pi / omega2
    std::optional<rectangles::Rectangle<Scalar>> monitor{};  // gauge monitoring
    int n_threads{1};
};

template <class Scalar>
struct SweepResult {
    std::vector<Scalar> omega_values;
    std::vector<Scalar> errors_v;  // sup |f - (v0 + V + J0)|
    std::vector<Scalar> errors_w;  // sup |g - (w0 + W)|
    std::vector<Scalar> alpha;     // contraction constant (omega-independent)
    std::vector<Scalar> fv_ynorm_times_omega;
    Scalar fitted_order{};  // -slope of log errors_v vs log omega1
    Scalar sup_V{}, sup_dxV{}, sup_dtV{};
    bool pas_invariant{true};
    Scalar pas_max_gauge{};
};

namespace detail {

template <class Scalar>
Scalar snapped_dt(Scalar interval, Scalar target, Eigen::Index& n_sub) {
    using std::ceil;
    n_sub = std::max<Eigen::Index>(1, Eigen::Index(ceil(interval / target - Scalar(1e-12))));
    return interval / Scalar(n_sub);
}

}  // namespace detail

/// @brief Sweeps the carrier frequency: one averaged solve is shared across
/// all omega1 values; each value gets a full solve and a linear-error solve
/// at 1/fast_steps_per_period of the fast period. Blow-up anywhere aborts the
/// sweep and reports the offending frequency.
template <class Scalar>
SweepResult<Scalar> approximation_study(const model::ModelParams<Scalar>& mp,
                                        const source::SourceParams<Scalar>& sp_base,
                                        const std::vector<Scalar>& omega_list, Scalar T,
                                        const solver::Grid<Scalar>& grid,
                                        const solver::FieldState<Scalar>& initial,
                                        const SweepOptions<Scalar>& opts = {}) {
    using std::ceil;
    using std::max;
    source::validate(sp_base);
    solver::validate(grid);
    if (!(T > 0)) throw PreconditionError("approximation_study: T must be positive");
    if (omega_list.empty()) throw PreconditionError("approximation_study: empty frequency list");
    for (Scalar w : omega_list)
        if (!(w > 0)) throw PreconditionError("approximation_study: frequencies must be positive");
    if (opts.slow_steps_per_period < 1 || opts.fast_steps_per_period < 1)
        throw PreconditionError("approximation_study: steps per period must be >= 1");
    if (!model::check_admissible(mp.beta, mp.gamma).admissible)
        throw PreconditionError("approximation_study: parameters are not admissible");
    const auto eq = model::solve_equilibrium(mp.beta, mp.gamma, Scalar(1e-12));

    const Scalar interval_raw = opts.sample_interval > 0 ? opts.sample_interval : T / 400;
    const Eigen::Index n_out = max<Eigen::Index>(1, Eigen::Index(ceil(T / interval_raw - 1e-9)));
    const Scalar interval = T / Scalar(n_out);

    // Averaged solve, independent of omega1.
    Eigen::Index n_sub_pas = 0;
    const Scalar dt_pas = detail::snapped_dt(
        interval, Scalar(2 * EIGEN_PI) / sp_base.eta / Scalar(opts.slow_steps_per_period),
        n_sub_pas);
    const auto pas_spec = solver::make_pas_system(mp, sp_base, eq);
    const auto pas_traj = solver::simulate(pas_spec, grid, initial, T, dt_pas, n_sub_pas);

    SweepResult<Scalar> out;
    out.omega_values = omega_list;
    const std::size_t n_omega = omega_list.size();
    out.errors_v.resize(n_omega);
    out.errors_w.resize(n_omega);
    out.alpha.resize(n_omega);
    out.fv_ynorm_times_omega.resize(n_omega);

    const Scalar dx = grid.dx();
    out.sup_V = solver::y_norm(pas_traj, 1);
    for (std::size_t j = 0; j + 1 < pas_traj.size(); ++j) {
        const Scalar hs = pas_traj[j + 1].t - pas_traj[j].t;
        out.sup_dtV =
            max(out.sup_dtV, ((pas_traj[j + 1].u1 - pas_traj[j].u1).abs() / hs).maxCoeff());
    }
    for (const auto& st : pas_traj) {
        const auto diff = st.u1.tail(st.u1.size() - 1) - st.u1.head(st.u1.size() - 1);
        out.sup_dxV = max(out.sup_dxV, diff.abs().maxCoeff() / dx);
    }
    if (opts.monitor) {
        const auto rep = rectangles::monitor_invariance(pas_traj, *opts.monitor);
        out.pas_invariant = rep.invariant;
        out.pas_max_gauge = rep.max_gauge;
    }

    const Scalar M = source::sup_amplitude(sp_base);
    const Scalar alpha = solver::detail::alpha_constant(pas_traj, M, eq, mp.gamma);

    const auto run_one = [&](std::size_t i) {
        source::SourceParams<Scalar> sp = sp_base;
        sp.omega1 = omega_list[i];
        try {
            Eigen::Index n_sub = 0;
            const Scalar dt = detail::snapped_dt(
                interval, Scalar(2 * EIGEN_PI) / sp.omega2() / Scalar(opts.fast_steps_per_period),
                n_sub);

            solver::FieldState<Scalar> init_full;
            init_full.t = 0;
            init_full.u1 = eq.v0 + initial.u1;
            init_full.u2 = eq.w0 + initial.u2;
            const auto full_spec = solver::make_full_system(mp, sp, eq);
            const auto full = solver::simulate(full_spec, grid, init_full, T, dt, n_sub);
            if (full.size() != pas_traj.size())
                throw NumericError("approximation_study: sample misalignment");

            const auto xs = grid.points();
            Scalar ev = 0, ew = 0;
            for (std::size_t j = 0; j < full.size(); ++j) {
                const auto J = source::source_J0(sp, xs, full[j].t);
                ev = max(ev, (full[j].u1 - (eq.v0 + pas_traj[j].u1 + J)).abs().maxCoeff());
                ew = max(ew, (full[j].u2 - (eq.w0 + pas_traj[j].u2)).abs().maxCoeff());
            }
            out.errors_v[i] = ev;
            out.errors_w[i] = ew;
            out.alpha[i] = alpha;

            const auto lin_spec = solver::make_linear_error_system(mp, sp, eq, grid, pas_traj);
            solver::FieldState<Scalar> zero;
            zero.t = 0;
            zero.u1 = solver::Array<Scalar>::Zero(grid.n_points);
            zero.u2 = solver::Array<Scalar>::Zero(grid.n_points);
            const auto ftraj = solver::simulate(lin_spec, grid, zero, T, dt, n_sub);
            out.fv_ynorm_times_omega[i] = solver::y_norm(ftraj, 1) * sp.omega1;
        } catch (const BlowUpError& e) {
            throw BlowUpError(
                "sweep: blow-up at omega1 = " + std::to_string(double(omega_list[i])) + ": " +
                    e.what(),
                e.time);
        }
    };

    const int n_threads = std::max(1, opts.n_threads);
    if (n_threads == 1 || n_omega == 1) {
        for (std::size_t i = 0; i < n_omega; ++i) run_one(i);
    } else {
        std::vector<std::exception_ptr> errors(n_omega);
        std::vector<std::thread> pool;
        const std::size_t width = std::min<std::size_t>(std::size_t(n_threads), n_omega);
        for (std::size_t k = 0; k < width; ++k) {
            pool.emplace_back([&, k] {
                for (std::size_t i = k; i < n_omega; i += width) {
                    try {
                        run_one(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }

    out.fitted_order = omega_list.size() >= 2
                           ? -fit_loglog_slope(out.omega_values, out.errors_v)
                           : Scalar(0);
    return out;
}

}  // namespace ifcable::experiments
