#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ifcable/errors.hpp"
#include "ifcable/model.hpp"
#include "ifcable/source.hpp"

namespace ifcable::solver {

template <class Scalar>
using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// Uniform symmetric grid over [-X, X]; boundary truncation of the line.
template <class Scalar>
struct Grid {
    Scalar half_extent{};
    Eigen::Index n_points{};

    Scalar dx() const { return 2 * half_extent / Scalar(n_points - 1); }
    Array<Scalar> points() const {
        return Array<Scalar>::LinSpaced(n_points, -half_extent, half_extent);
    }
};

template <class Scalar>
void validate(const Grid<Scalar>& g) {
    if (!(g.half_extent > 0)) throw InvalidGridError("grid: half_extent must be positive");
    if (g.n_points < 3) throw InvalidGridError("grid: need at least 3 points");
}

/// One sampled time slice of a two-component field.
template <class Scalar>
struct FieldState {
    Scalar t{};
    Array<Scalar> u1;
    Array<Scalar> u2;
};

template <class Scalar>
using Trajectory = std::vector<FieldState<Scalar>>;

enum class SystemTag { full, centered, pas, linear_error, nonlinear_error, remainder };

/// Right-hand-side description of one reaction-diffusion system.
/// Component diffusivities are (1, rho).  `reaction` excludes any additive
/// forcing covered by `forcing_antiderivative`, which supplies the exact time
/// antiderivative of that forcing (the step then adds its exact increment).
template <class Scalar>
struct SystemSpec {
    SystemTag tag{};
    Scalar rho{};
    std::function<void(const Array<Scalar>& u1, const Array<Scalar>& u2, const Array<Scalar>& xs,
                       Scalar t, Array<Scalar>& r1, Array<Scalar>& r2)>
        reaction;
    std::function<void(const Array<Scalar>& xs, Scalar t, Array<Scalar>& p1, Array<Scalar>& p2)>
        forcing_antiderivative;  // optional; null means no separated forcing
    Scalar dirichlet1{};
    Scalar dirichlet2{};
    Scalar explicit_rate_bound{};  // crude reaction rate scale, drives dt warnings
    const Trajectory<Scalar>* coupled_V = nullptr;  // PAS samples for the error systems
    const Trajectory<Scalar>* coupled_F = nullptr;  // linear-error samples for the remainder
};

/// Linear-in-time interpolation of a stored trajectory at time t.
/// Clamps within 1e-9 beyond the last sample; throws ConfigError past that.
template <class Scalar>
void interp_trajectory(const Trajectory<Scalar>& traj, Scalar t, Array<Scalar>& u1,
                       Array<Scalar>& u2) {
    if (traj.empty()) throw ConfigError("interp_trajectory: empty trajectory");
    const Scalar t_last = traj.back().t;
    if (t > t_last + Scalar(1e-9) * std::max<Scalar>(1, std::abs(t_last)))
        throw ConfigError("interp_trajectory: query time beyond stored coverage");
    if (t <= traj.front().t) {
        u1 = traj.front().u1;
        u2 = traj.front().u2;
        return;
    }
    if (t >= t_last) {
        u1 = traj.back().u1;
        u2 = traj.back().u2;
        return;
    }
    auto it = std::lower_bound(traj.begin(), traj.end(), t,
                               [](const FieldState<Scalar>& s, Scalar tt) { return s.t < tt; });
    const auto& hi = *it;
    const auto& lo = *(it - 1);
    const Scalar w = (t - lo.t) / (hi.t - lo.t);
    u1 = (1 - w) * lo.u1 + w * hi.u1;
    u2 = (1 - w) * lo.u2 + w * hi.u2;
}

namespace detail {

/// Thomas solve of the constant-coefficient system
/// (1+2a) x_i - a (x_{i-1} + x_{i+1}) = d_i, i = 0..m-1, with x_{-1}=x_m=0.
/// Boundary contributions must already be folded into d.  Overwrites d with x.
template <class Scalar>
void thomas_constant(Scalar a, Array<Scalar>& d, Array<Scalar>& cp) {
    const Eigen::Index m = d.size();
    const Scalar b = 1 + 2 * a;
    cp.resize(m);
    cp[0] = -a / b;
    d[0] /= b;
    for (Eigen::Index i = 1; i < m; ++i) {
        const Scalar denom = b + a * cp[i - 1];
        cp[i] = -a / denom;
        d[i] = (d[i] + a * d[i - 1]) / denom;
    }
    for (Eigen::Index i = m - 2; i >= 0; --i) d[i] -= cp[i] * d[i + 1];
}

}  // namespace detail

/// One IMEX step: Crank-Nicolson diffusion combined with a Heun-type
/// predictor-corrector for the reaction, plus the exact increment of any
/// separated forcing.  Second order in time; boundaries pinned to the
/// Dirichlet values (component 2 evolves unpinned when rho = 0).
template <class Scalar>
class ImexStepper {
  public:
    ImexStepper(SystemSpec<Scalar> spec, Grid<Scalar> grid)
        : spec_(std::move(spec)), grid_(grid), xs_(grid.points()) {
        validate(grid_);
        if (!spec_.reaction) throw ConfigError("stepper: spec has no reaction");
    }

    const Grid<Scalar>& grid() const { return grid_; }
    const SystemSpec<Scalar>& spec() const { return spec_; }

    /// Advances `st` in place from st.t to st.t + dt.
    void advance(FieldState<Scalar>& st, Scalar dt) {
        using std::ceil;
        const Scalar t0 = st.t, t1 = st.t + dt;
        const Eigen::Index n = grid_.n_points;
        if (st.u1.size() != n || st.u2.size() != n)
            throw ConfigError("stepper: state size does not match grid");

        if (spec_.forcing_antiderivative) {
            spec_.forcing_antiderivative(xs_, t0, p1a_, p2a_);
            spec_.forcing_antiderivative(xs_, t1, p1b_, p2b_);
            p1b_ -= p1a_;  // exact forcing increments over the step
            p2b_ -= p2a_;
        }

        spec_.reaction(st.u1, st.u2, xs_, t0, r1a_, r2a_);

        // Predictor: CN diffusion + explicit Euler reaction.
        e1_ = dt * r1a_;
        e2_ = dt * r2a_;
        if (spec_.forcing_antiderivative) {
            e1_ += p1b_;
            e2_ += p2b_;
        }
        star1_ = st.u1;
        star2_ = st.u2;
        apply_component(star1_, e1_, dt, Scalar(1), spec_.dirichlet1);
        apply_component(star2_, e2_, dt, spec_.rho, spec_.dirichlet2);

        // Corrector: CN diffusion + trapezoidal reaction.
        spec_.reaction(star1_, star2_, xs_, t1, r1b_, r2b_);
        e1_ = (dt / 2) * (r1a_ + r1b_);
        e2_ = (dt / 2) * (r2a_ + r2b_);
        if (spec_.forcing_antiderivative) {
            e1_ += p1b_;
            e2_ += p2b_;
        }
        apply_component(st.u1, e1_, dt, Scalar(1), spec_.dirichlet1);
        apply_component(st.u2, e2_, dt, spec_.rho, spec_.dirichlet2);
        st.t = t1;

        if (!st.u1.allFinite() || !st.u2.allFinite())
            throw BlowUpError("step_imex: state became non-finite at t = " + std::to_string(double(t1)),
                              double(t1));
    }

  private:
    /// u <- CN update of one component: (I - a*Dxx) u_new = u + a*Dxx u + expl.
    void apply_component(Array<Scalar>& u, const Array<Scalar>& expl, Scalar dt, Scalar nu,
                         Scalar dirichlet) {
        const Eigen::Index n = u.size(), m = n - 2;
        if (nu == Scalar(0)) {
            u += expl;  // pure ODE pointwise; no spatial coupling, no pinning
            return;
        }
        const Scalar dx = grid_.dx();
        const Scalar a = dt * nu / (2 * dx * dx);
        rhs_ = u.segment(1, m) + a * (u.head(m) - 2 * u.segment(1, m) + u.tail(m)) +
               expl.segment(1, m);
        rhs_[0] += a * dirichlet;
        rhs_[m - 1] += a * dirichlet;
        detail::thomas_constant(a, rhs_, cp_);
        u[0] = dirichlet;
        u.segment(1, m) = rhs_;
        u[n - 1] = dirichlet;
    }

    SystemSpec<Scalar> spec_;
    Grid<Scalar> grid_;
    Array<Scalar> xs_;
    Array<Scalar> r1a_, r2a_, r1b_, r2b_, e1_, e2_, star1_, star2_;
    Array<Scalar> p1a_, p2a_, p1b_, p2b_;
    Array<Scalar> rhs_, cp_;
};

/// Single-step convenience wrapper.
template <class Scalar>
FieldState<Scalar> step_imex(const FieldState<Scalar>& state, Scalar dt,
                             const SystemSpec<Scalar>& spec, const Grid<Scalar>& grid) {
    ImexStepper<Scalar> stepper(spec, grid);
    FieldState<Scalar> st = state;
    stepper.advance(st, dt);
    return st;
}

template <class Scalar>
struct SimDiagnostics {
    std::vector<std::string> warnings;
    Eigen::Index steps_taken{};
    Scalar dt{};
};

/// Integrates from t=0 to T with fixed step dt, sampling every `sample_every`
/// steps (initial and final states always included).
template <class Scalar>
Trajectory<Scalar> simulate(const SystemSpec<Scalar>& spec, const Grid<Scalar>& grid,
                            const FieldState<Scalar>& initial, Scalar T, Scalar dt,
                            Eigen::Index sample_every, SimDiagnostics<Scalar>* diag = nullptr) {
    using std::abs;
    using std::ceil;
    validate(grid);
    if (!(dt > 0)) throw ConfigError("simulate: dt must be positive");
    if (sample_every < 1) throw ConfigError("simulate: sample_every must be >= 1");
    if (initial.u1.size() != grid.n_points || initial.u2.size() != grid.n_points)
        throw ConfigError("simulate: initial state size does not match grid");
    if (!initial.u1.allFinite() || !initial.u2.allFinite())
        throw ConfigError("simulate: initial state is not finite");
    for (const Trajectory<Scalar>* coupled : {spec.coupled_V, spec.coupled_F}) {
        if (coupled && (coupled->empty() || coupled->back().t < T - Scalar(1e-9)))
            throw ConfigError("simulate: coupled trajectory does not cover [0,T]");
    }
    if (diag) {
        diag->dt = dt;
        if (spec.explicit_rate_bound > 0 && dt * spec.explicit_rate_bound > 1)
            diag->warnings.push_back("dt exceeds the explicit reaction stability estimate");
    }

    FieldState<Scalar> st;
    st.t = 0;
    st.u1 = initial.u1;
    st.u2 = initial.u2;
    st.u1[0] = spec.dirichlet1;
    st.u1[grid.n_points - 1] = spec.dirichlet1;
    if (spec.rho > 0) {
        st.u2[0] = spec.dirichlet2;
        st.u2[grid.n_points - 1] = spec.dirichlet2;
    }

    ImexStepper<Scalar> stepper(spec, grid);
    const Eigen::Index n_steps =
        (T > 0) ? Eigen::Index(ceil(T / dt - Scalar(1e-12))) : Eigen::Index(0);

    Trajectory<Scalar> traj;
    traj.reserve(std::size_t(n_steps / sample_every) + 2);
    traj.push_back(st);
    for (Eigen::Index step = 1; step <= n_steps; ++step) {
        const Scalar h = std::min(dt, T - st.t);
        stepper.advance(st, h);
        if (step % sample_every == 0 || step == n_steps) traj.push_back(st);
    }
    if (diag) diag->steps_taken = n_steps;
    return traj;
}

/// Discrete convolution against the mass-normalized heat kernel of variance
/// 2*sigma*t, truncated at 8 standard deviations; identity for sigma*t = 0.
/// Off-grid mass is treated as zero (consistent with Dirichlet truncation).
template <class Scalar>
Array<Scalar> heat_propagate(const Array<Scalar>& field, Scalar sigma, Scalar t,
                             const Grid<Scalar>& grid, std::vector<std::string>* warnings = nullptr) {
    using std::ceil;
    using std::exp;
    using std::sqrt;
    validate(grid);
    if (field.size() != grid.n_points)
        throw ConfigError("heat_propagate: field size does not match grid");
    if (t < 0) throw PreconditionError("heat_propagate: t must be nonnegative");
    if (sigma == Scalar(0) || t == Scalar(0)) return field;

    const Scalar dx = grid.dx();
    const Scalar sd = sqrt(2 * sigma * t);
    const Eigen::Index w = Eigen::Index(ceil(8 * sd / dx));
    if (warnings && 2 * Scalar(w) * dx > 2 * grid.half_extent)
        warnings->push_back("heat_propagate: kernel wider than the domain; truncation is severe");

    Array<Scalar> kernel(2 * w + 1);
    for (Eigen::Index j = -w; j <= w; ++j)
        kernel[j + w] = exp(-(Scalar(j) * dx) * (Scalar(j) * dx) / (4 * sigma * t));
    kernel /= kernel.sum();

    const Eigen::Index n = field.size();
    Array<Scalar> out = Array<Scalar>::Zero(n);
    for (Eigen::Index j = -w; j <= w; ++j) {
        const Scalar k = kernel[j + w];
        const Eigen::Index lo = std::max<Eigen::Index>(0, j);
        const Eigen::Index hi = std::min<Eigen::Index>(n, n + j);
        if (hi > lo) out.segment(lo, hi - lo) += k * field.segment(lo - j, hi - lo);
    }
    return out;
}

/// Sup over samples and grid of |component| (the trajectory Y-norm).
template <class Scalar>
Scalar y_norm(const Trajectory<Scalar>& traj, int component) {
    if (traj.empty()) throw PreconditionError("y_norm: empty trajectory");
    Scalar m = 0;
    for (const auto& st : traj)
        m = std::max(m, (component == 1 ? st.u1 : st.u2).abs().maxCoeff());
    return m;
}

namespace detail {

/// Contraction constant of the linear-error Picard iteration.
template <class Scalar>
Scalar alpha_constant(const Trajectory<Scalar>& V_traj, Scalar M,
                      const model::Equilibrium<Scalar>& eq, Scalar gamma) {
    if (V_traj.empty()) throw PreconditionError("alpha: empty trajectory");
    const Scalar v0 = eq.v0;
    Scalar coef = 0, shift = 0;
    for (const auto& st : V_traj) {
        coef = std::max(coef, (v0 * v0 - (v0 + st.u1).square()).abs().maxCoeff());
        shift = std::max(shift, (v0 + st.u1).abs().maxCoeff());
    }
    return (coef + M * M + 2 * M * shift + 1 / gamma) / (v0 * v0 - 1);
}

}  // namespace detail

template <class Scalar>
struct PicardDiagnostics {
    std::vector<Scalar> distances;  // sup distance between successive iterates
    Scalar alpha{};
    Scalar dt{};
};

/// Picard iteration of the linear error system in Duhamel form: the k-th
/// iterate is propagated step by step with the exponential-weight heat
/// semigroup, the integral handled by the trapezoidal rule.  Returns the
/// n_iters-th iterate on the internal fast-resolved time grid.
template <class Scalar>
Trajectory<Scalar> picard_linear_error(const model::ModelParams<Scalar>& mp,
                                       const source::SourceParams<Scalar>& sp,
                                       const model::Equilibrium<Scalar>& eq,
                                       const Trajectory<Scalar>& V_traj, const Grid<Scalar>& grid,
                                       Scalar T, int n_iters,
                                       PicardDiagnostics<Scalar>* diag = nullptr) {
    using std::ceil;
    using std::cos;
    using std::exp;
    using std::sin;
    validate(grid);
    source::validate(sp);
    if (!(T > 0)) throw PreconditionError("picard: T must be positive");
    if (n_iters < 0) throw PreconditionError("picard: n_iters must be nonnegative");
    if (V_traj.empty() || V_traj.back().t < T - Scalar(1e-9))
        throw ConfigError("picard: PAS trajectory does not cover [0,T]");

    const Scalar M = source::sup_amplitude(sp);
    const Scalar alpha = detail::alpha_constant(V_traj, M, eq, mp.gamma);
    if (!(alpha < 1)) throw PreconditionError("picard: contraction constant alpha(T) >= 1");

    const Scalar w1 = sp.omega1, w2 = sp.omega2();
    const Eigen::Index n_steps = Eigen::Index(ceil(T / (2 * EIGEN_PI / (40 * w2)) - Scalar(1e-9)));
    const Scalar dt = T / Scalar(std::max<Eigen::Index>(n_steps, 1));
    const Eigen::Index nt = std::max<Eigen::Index>(n_steps, 1);
    if (diag) {
        diag->alpha = alpha;
        diag->dt = dt;
        diag->distances.clear();
    }

    const Array<Scalar> xs = grid.points();
    const Array<Scalar> A = source::profile_A(sp, xs);
    const Array<Scalar> B = source::profile_B(sp, xs);
    const Array<Scalar> Axx = source::profile_A_xx(sp, xs);
    const Array<Scalar> Bxx = source::profile_B_xx(sp, xs);
    const Scalar v0 = eq.v0;
    const Scalar decay1 = exp((1 - v0 * v0) * dt);     // weight of the voltage semigroup
    const Scalar decay2 = exp(-mp.epsilon * mp.gamma * dt);

    // Per-level coefficient fields; V is slow so linear interpolation suffices.
    Array<Scalar> Vt, Wt, u;
    auto rhs_v = [&](const std::vector<Array<Scalar>>& Fv, const std::vector<Array<Scalar>>& Fw,
                     Eigen::Index j) -> Array<Scalar> {
        const Scalar t = Scalar(j) * dt;
        interp_trajectory(V_traj, t, Vt, Wt);
        u = v0 + Vt;
        const Scalar s1 = sin(w1 * t), s2 = sin(w2 * t);
        const Array<Scalar> J0 = A * s1 + B * s2;
        const Array<Scalar> phi1 = -J0.square() - 2 * u * J0;
        const Array<Scalar> phi3 = Axx * s1 + Bxx * s2 - J0.cube() / 3 + (1 - u.square()) * J0 +
                                   u * (A.square() / 2 * cos(2 * w1 * t) +
                                        B.square() / 2 * cos(2 * w2 * t) +
                                        A * B * cos((w1 + w2) * t));
        return ((v0 * v0 - u.square() + phi1) * Fv[j] - Fw[j] + phi3).eval();
    };
    auto rhs_w = [&](const std::vector<Array<Scalar>>& Fv, Eigen::Index j) -> Array<Scalar> {
        const Scalar t = Scalar(j) * dt;
        return (mp.epsilon * (Fv[j] + A * sin(w1 * t) + B * sin(w2 * t))).eval();
    };

    const Array<Scalar> zero = Array<Scalar>::Zero(grid.n_points);
    std::vector<Array<Scalar>> Fv(nt + 1, zero), Fw(nt + 1, zero);
    std::vector<Array<Scalar>> Gv(nt + 1), Gw(nt + 1);

    Scalar prev_dist = -1;
    for (int k = 0; k < n_iters; ++k) {
        Gv[0] = zero;
        Array<Scalar> rv_prev = rhs_v(Fv, Fw, 0);
        for (Eigen::Index j = 0; j < nt; ++j) {
            Array<Scalar> carry = Gv[j] + (dt / 2) * rv_prev;
            carry = decay1 * heat_propagate(carry, Scalar(1), dt, grid);
            rv_prev = rhs_v(Fv, Fw, j + 1);
            Gv[j + 1] = carry + (dt / 2) * rv_prev;
        }
        Gw[0] = zero;
        Array<Scalar> rw_prev = rhs_w(Gv, 0);
        for (Eigen::Index j = 0; j < nt; ++j) {
            Array<Scalar> carry = Gw[j] + (dt / 2) * rw_prev;
            carry = decay2 * (mp.rho > 0 ? heat_propagate(carry, mp.rho, dt, grid) : carry);
            rw_prev = rhs_w(Gv, j + 1);
            Gw[j + 1] = carry + (dt / 2) * rw_prev;
        }

        Scalar dist = 0;
        for (Eigen::Index j = 0; j <= nt; ++j) {
            dist = std::max(dist, (Gv[j] - Fv[j]).abs().maxCoeff());
            dist = std::max(dist, (Gw[j] - Fw[j]).abs().maxCoeff());
        }
        if (diag) diag->distances.push_back(dist);
        if (prev_dist >= 0 && dist > prev_dist * (1 + Scalar(1e-9)) && dist > Scalar(1e-14))
            throw ContractionError("picard: successive iterate distance grew");
        prev_dist = dist;
        Fv.swap(Gv);
        Fw.swap(Gw);
    }

    Trajectory<Scalar> out;
    out.reserve(std::size_t(nt) + 1);
    for (Eigen::Index j = 0; j <= nt; ++j)
        out.push_back({Scalar(j) * dt, Fv[std::size_t(j)], Fw[std::size_t(j)]});
    return out;
}

// ---------------------------------------------------------------------------
// System factories.  Reactions are bound as vectorized Eigen expressions.
// ---------------------------------------------------------------------------

/// Non-centered system in (f,g); boundaries rest at the equilibrium.
template <class Scalar>
SystemSpec<Scalar> make_full_system(const model::ModelParams<Scalar>& mp,
                                    const source::SourceParams<Scalar>& sp,
                                    const model::Equilibrium<Scalar>& eq) {
    source::validate(sp);
    SystemSpec<Scalar> s;
    s.tag = SystemTag::full;
    s.rho = mp.rho;
    s.dirichlet1 = eq.v0;
    s.dirichlet2 = eq.w0;
    const Scalar amp = std::abs(eq.v0) + 1;
    s.explicit_rate_bound = std::max(1 + amp * amp, mp.epsilon * mp.gamma);
    s.reaction = [mp](const Array<Scalar>& f, const Array<Scalar>& g, const Array<Scalar>&,
                      Scalar, Array<Scalar>& r1, Array<Scalar>& r2) {
        r1 = f - f.cube() / 3 - g;
        r2 = mp.epsilon * (f - mp.gamma * g + mp.beta);
    };
    s.forcing_antiderivative = [sp](const Array<Scalar>& xs, Scalar t, Array<Scalar>& p1,
                                    Array<Scalar>& p2) {
        p1 = source::source_J0(sp, xs, t);  // d/dt J0 = I
        p2 = Array<Scalar>::Zero(xs.size());
    };
    return s;
}

/// Centered system in (v,w) = (f,g) - (v0,w0).
template <class Scalar>
SystemSpec<Scalar> make_centered_system(const model::ModelParams<Scalar>& mp,
                                        const source::SourceParams<Scalar>& sp,
                                        const model::Equilibrium<Scalar>& eq) {
    source::validate(sp);
    SystemSpec<Scalar> s;
    s.tag = SystemTag::centered;
    s.rho = mp.rho;
    const Scalar v0 = eq.v0;
    const Scalar amp = std::abs(v0) + 1;
    s.explicit_rate_bound = std::max(1 + amp * amp, mp.epsilon * mp.gamma);
    s.reaction = [mp, v0](const Array<Scalar>& v, const Array<Scalar>& w, const Array<Scalar>&,
                          Scalar, Array<Scalar>& r1, Array<Scalar>& r2) {
        r1 = (1 - v0 * v0) * v - v0 * v.square() - v.cube() / 3 - w;
        r2 = mp.epsilon * (v - mp.gamma * w);
    };
    s.forcing_antiderivative = [sp](const Array<Scalar>& xs, Scalar t, Array<Scalar>& p1,
                                    Array<Scalar>& p2) {
        p1 = source::source_J0(sp, xs, t);
        p2 = Array<Scalar>::Zero(xs.size());
    };
    return s;
}

/// Partially averaged system in (V,W); only the slow envelope remains.
template <class Scalar>
SystemSpec<Scalar> make_pas_system(const model::ModelParams<Scalar>& mp,
                                   const source::SourceParams<Scalar>& sp,
                                   const model::Equilibrium<Scalar>& eq) {
    source::validate(sp);
    SystemSpec<Scalar> s;
    s.tag = SystemTag::pas;
    s.rho = mp.rho;
    const Scalar v0 = eq.v0;
    const Scalar amp = std::abs(v0) + 1;
    s.explicit_rate_bound = std::max(1 + amp * amp, mp.epsilon * mp.gamma);
    s.reaction = [mp, sp, v0](const Array<Scalar>& V, const Array<Scalar>& W,
                              const Array<Scalar>& xs, Scalar t, Array<Scalar>& r1,
                              Array<Scalar>& r2) {
        const Array<Scalar> env = source::source_envelope(sp, xs, t);
        r1 = (1 - v0 * v0 - env) * V - v0 * V.square() - V.cube() / 3 - W - env * v0;
        r2 = mp.epsilon * (V - mp.gamma * W);
    };
    return s;
}

namespace detail {

/// Shared coefficient evaluation for the three error systems.
template <class Scalar>
struct ErrorFields {
    Array<Scalar> A, B, Axx, Bxx;
    Scalar v0, w1, w2;

    ErrorFields(const source::SourceParams<Scalar>& sp, const model::Equilibrium<Scalar>& eq,
                const Array<Scalar>& xs)
        : A(source::profile_A(sp, xs)),
          B(source::profile_B(sp, xs)),
          Axx(source::profile_A_xx(sp, xs)),
          Bxx(source::profile_B_xx(sp, xs)),
          v0(eq.v0),
          w1(sp.omega1),
          w2(sp.omega2()) {}

    Array<Scalar> J0(Scalar t) const {
        using std::sin;
        return A * sin(w1 * t) + B * sin(w2 * t);
    }
    Array<Scalar> phi1(const Array<Scalar>& u, const Array<Scalar>& J) const {
        return -J.square() - 2 * u * J;
    }
    Array<Scalar> phi3(const Array<Scalar>& u, const Array<Scalar>& J, Scalar t) const {
        using std::cos;
        using std::sin;
        // The bare +J term: subtracting the averaged system from the centered one
        // leaves (1 - u^2) J, not -u^2 J; without it E != v - V - J identically.
        return Axx * sin(w1 * t) + Bxx * sin(w2 * t) - J.cube() / 3 + (1 - u.square()) * J +
               u * (A.square() / 2 * cos(2 * w1 * t) + B.square() / 2 * cos(2 * w2 * t) +
                    A * B * cos((w1 + w2) * t));
    }
};

}  // namespace detail

/// Linear error system for (F_v, F_w); V is interpolated from `V_traj`,
/// which must remain alive for the lifetime of the returned spec.
template <class Scalar>
SystemSpec<Scalar> make_linear_error_system(const model::ModelParams<Scalar>& mp,
                                            const source::SourceParams<Scalar>& sp,
                                            const model::Equilibrium<Scalar>& eq,
                                            const Grid<Scalar>& grid,
                                            const Trajectory<Scalar>& V_traj) {
    source::validate(sp);
    validate(grid);
    SystemSpec<Scalar> s;
    s.tag = SystemTag::linear_error;
    s.rho = mp.rho;
    s.coupled_V = &V_traj;
    const Scalar amp = std::abs(eq.v0) + 1;
    s.explicit_rate_bound = std::max(1 + amp * amp, mp.epsilon * mp.gamma);
    auto fields = std::make_shared<detail::ErrorFields<Scalar>>(sp, eq, grid.points());
    s.reaction = [mp, fields, &V_traj](const Array<Scalar>& Fv, const Array<Scalar>& Fw,
                                       const Array<Scalar>&, Scalar t, Array<Scalar>& r1,
                                       Array<Scalar>& r2) {
        Array<Scalar> V, W;
        interp_trajectory(V_traj, t, V, W);
        const Array<Scalar> u = fields->v0 + V;
        const Array<Scalar> J = fields->J0(t);
        r1 = (1 - u.square() + fields->phi1(u, J)) * Fv - Fw + fields->phi3(u, J, t);
        r2 = mp.epsilon * (Fv - mp.gamma * Fw + J);
    };
    return s;
}

/// Full (nonlinear) error system for (E_v, E_w).
template <class Scalar>
SystemSpec<Scalar> make_nonlinear_error_system(const model::ModelParams<Scalar>& mp,
                                               const source::SourceParams<Scalar>& sp,
                                               const model::Equilibrium<Scalar>& eq,
                                               const Grid<Scalar>& grid,
                                               const Trajectory<Scalar>& V_traj) {
    source::validate(sp);
    validate(grid);
    SystemSpec<Scalar> s;
    s.tag = SystemTag::nonlinear_error;
    s.rho = mp.rho;
    s.coupled_V = &V_traj;
    const Scalar amp = std::abs(eq.v0) + 1;
    s.explicit_rate_bound = std::max(1 + amp * amp, mp.epsilon * mp.gamma);
    auto fields = std::make_shared<detail::ErrorFields<Scalar>>(sp, eq, grid.points());
    s.reaction = [mp, fields, &V_traj](const Array<Scalar>& Ev, const Array<Scalar>& Ew,
                                       const Array<Scalar>&, Scalar t, Array<Scalar>& r1,
                                       Array<Scalar>& r2) {
        Array<Scalar> V, W;
        interp_trajectory(V_traj, t, V, W);
        const Array<Scalar> u = fields->v0 + V;
        const Array<Scalar> J = fields->J0(t);
        const Array<Scalar> phi2 = -(u + J);
        r1 = (1 - u.square() + fields->phi1(u, J)) * Ev + phi2 * Ev.square() - Ev.cube() / 3 -
             Ew + fields->phi3(u, J, t);
        r2 = mp.epsilon * (Ev - mp.gamma * Ew + J);
    };
    return s;
}

/// Remainder system for (R_v, R_w) = (E_v - F_v, E_w - F_w); both the PAS and
/// the linear-error trajectories are interpolated couplings.
template <class Scalar>
SystemSpec<Scalar> make_remainder_system(const model::ModelParams<Scalar>& mp,
                                         const source::SourceParams<Scalar>& sp,
                                         const model::Equilibrium<Scalar>& eq,
                                         const Grid<Scalar>& grid,
                                         const Trajectory<Scalar>& V_traj,
                                         const Trajectory<Scalar>& F_traj) {
    source::validate(sp);
    validate(grid);
    SystemSpec<Scalar> s;
    s.tag = SystemTag::remainder;
    s.rho = mp.rho;
    s.coupled_V = &V_traj;
    s.coupled_F = &F_traj;
    const Scalar amp = std::abs(eq.v0) + 1;
    s.explicit_rate_bound = std::max(1 + amp * amp, mp.epsilon * mp.gamma);
    auto fields = std::make_shared<detail::ErrorFields<Scalar>>(sp, eq, grid.points());
    s.reaction = [mp, fields, &V_traj, &F_traj](const Array<Scalar>& Rv, const Array<Scalar>& Rw,
                                                const Array<Scalar>&, Scalar t, Array<Scalar>& r1,
                                                Array<Scalar>& r2) {
        Array<Scalar> V, W, Fv, Fw;
        interp_trajectory(V_traj, t, V, W);
        interp_trajectory(F_traj, t, Fv, Fw);
        const Array<Scalar> u = fields->v0 + V;
        const Array<Scalar> J = fields->J0(t);
        const Array<Scalar> phi2 = -(u + J);
        r1 = (1 - u.square() + fields->phi1(u, J)) * Rv - Rv.cube() / 3 - Rw -
             Rv.square() * Fv - Rv * Fv.square() - Fv.cube() / 3 + phi2 * (Rv + Fv).square();
        r2 = mp.epsilon * (Rv - mp.gamma * Rw);
    };
    return s;
}

/// Boundary truncation levels of the two source profiles on a grid.
template <class Scalar>
struct TruncationReport {
    Scalar A_at_boundary{};
    Scalar B_at_boundary{};
    Scalar relative_to_delta{};
};

template <class Scalar>
TruncationReport<Scalar> truncation_report(const source::SourceParams<Scalar>& sp,
                                           const Grid<Scalar>& grid) {
    using std::abs;
    using std::max;
    const Scalar X = grid.half_extent;
    const auto at = [&](Scalar x) { return source::eval_profiles(sp, x); };
    TruncationReport<Scalar> r;
    r.A_at_boundary = max(abs(at(X).A), abs(at(-X).A));
    r.B_at_boundary = max(abs(at(X).B), abs(at(-X).B));
    const Scalar delta = source::sup_amplitude(sp);
    r.relative_to_delta = delta > 0 ? (r.A_at_boundary + r.B_at_boundary) / delta : Scalar(0);
    return r;
}

/// Default half extent: far enough that both profiles decayed to a few parts
/// in 1e4 of the closed-form amplitude bound.
template <class Scalar>
Scalar default_half_extent(const source::SourceParams<Scalar>& sp) {
    using std::abs;
    using std::max;
    return 40 * max(max(sp.d1, sp.d2), abs(sp.x0) + sp.d2);
}

}  // namespace ifcable::solver
