#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "ifcable/errors.hpp"
#include "ifcable/model.hpp"
#include "ifcable/solver.hpp"
#include "ifcable/source.hpp"

namespace ifcable::rectangles {

/// Centered rectangle [-L,L] x [-S,S].
template <class Scalar>
struct Rectangle {
    Scalar L{};
    Scalar S{};
};

/// Membership in the contracting region D(Delta) for voltage equilibrium v0:
/// 0 < L < |v0|,  1/gamma < S/L < v0^2-1,  and the amplitude-limited third
/// inequality below.
template <class Scalar>
bool in_D_Delta(const Rectangle<Scalar>& rect, Scalar v0, Scalar gamma, Scalar Delta) {
    const Scalar L = rect.L, S = rect.S;
    if (!(L > 0) || !(L < -v0)) return false;
    const Scalar ratio = S / L;
    if (!(ratio > 1 / gamma) || !(ratio < v0 * v0 - 1)) return false;
    const Scalar denom = Delta * Delta * (-v0 - L) / (L * L) + (-v0 - L / 3);
    return L < (v0 * v0 - 1 - ratio) / denom;
}

/// Constructive search for a small rectangle in D(Delta) with max(L,S) <=
/// bound: the slope S/L is fixed at the midpoint of its admissible interval
/// (1/gamma, v0^2-1) and L is halved until membership holds.
template <class Scalar>
std::optional<Rectangle<Scalar>> find_rectangle(Scalar v0, Scalar gamma, Scalar Delta,
                                                Scalar bound) {
    using std::min;
    if (!(v0 * v0 - 1 > 1 / gamma) || !(bound > 0)) return std::nullopt;
    const Scalar ratio = (1 / gamma + (v0 * v0 - 1)) / 2;  // (1+eps)/gamma, midpoint
    Scalar L = Scalar(0.9) * min(min(-v0, bound), bound / ratio);
    for (; L >= Scalar(1e-9); L /= 2) {
        const Rectangle<Scalar> rect{L, ratio * L};
        if (in_D_Delta(rect, v0, gamma, Delta)) return rect;
    }
    return std::nullopt;
}

enum class FieldKind { H, X };

/// Measured Y-norm bounds entering the worst-case face evaluation of the
/// remainder field X: C1 >= |V|, C2 >= |phi1|, C3 >= |F_v|.
template <class Scalar>
struct FaceAux {
    Scalar C1{};
    Scalar C2{};
    Scalar C3{};
};

namespace detail {

template <class Scalar>
std::vector<Scalar> face_samples(Scalar lo, Scalar hi, Eigen::Index count, unsigned seed,
                                 std::mt19937* rng) {
    std::vector<Scalar> out;
    out.reserve(std::size_t(count));
    if (count == 1) {
        out.push_back((lo + hi) / 2);
        return out;
    }
    const Scalar h = (hi - lo) / Scalar(count - 1);
    for (Eigen::Index i = 0; i < count; ++i) {
        Scalar v = lo + h * Scalar(i);
        if (seed != 0 && rng && i > 0 && i + 1 < count) {
            std::uniform_real_distribution<double> jit(-0.5, 0.5);
            v += Scalar(jit(*rng)) * h;
        }
        out.push_back(v);
    }
    return out;
}

}  // namespace detail

/// Maximum outward flux n . field over the four rectangle faces, sampled in x
/// (always including the source centers) and t in [0,T].  Both fields are
/// linear in the free face coordinate, so corner evaluation is exact per
/// sample.  A negative return certifies contraction at this resolution.
/// For field X the evaluation is the worst case over the aux bounds, with
/// |J0(x,t)| evaluated pointwise.
template <class Scalar>
Scalar face_flux_margin(FieldKind kind, const Rectangle<Scalar>& rect,
                        const source::SourceParams<Scalar>& sp,
                        const model::ModelParams<Scalar>& mp,
                        const model::Equilibrium<Scalar>& eq, Eigen::Index x_samples,
                        Eigen::Index t_samples, Scalar T,
                        const FaceAux<Scalar>* aux = nullptr, Scalar half_extent = Scalar(-1),
                        unsigned seed = 0) {
    using std::abs;
    using std::max;
    source::validate(sp);
    if (x_samples < 2 || t_samples < 2)
        throw PreconditionError("face_flux_margin: need at least 2 samples per axis");
    if (kind == FieldKind::X && aux == nullptr)
        throw PreconditionError("face_flux_margin: field X requires aux bounds");
    const Scalar X = half_extent > 0 ? half_extent : solver::default_half_extent(sp);
    const Scalar L = rect.L, S = rect.S, v0 = eq.v0;

    std::mt19937 rng(seed);
    auto xs = detail::face_samples<Scalar>(-X, X, x_samples, seed, &rng);
    xs.push_back(0);
    xs.push_back(sp.x0);
    const auto ts = detail::face_samples<Scalar>(0, T, t_samples, seed, &rng);

    // Top/bottom faces carry no (x,t) dependence for either field.
    Scalar margin = mp.epsilon * (L - mp.gamma * S);

    for (const Scalar x : xs) {
        const auto prof = source::eval_profiles(sp, x);
        for (const Scalar t : ts) {
            if (kind == FieldKind::H) {
                using std::cos;
                const Scalar env = prof.A * prof.A / 2 + prof.B * prof.B / 2 +
                                   prof.A * prof.B * cos(sp.eta * t);
                const auto H1 = [&](Scalar V, Scalar W) {
                    return (1 - v0 * v0) * V - env * (V + v0) - v0 * V * V - V * V * V / 3 - W;
                };
                margin = max(margin, max(H1(L, -S), H1(L, S)));      // right face
                margin = max(margin, max(-H1(-L, -S), -H1(-L, S)));  // left face
            } else {
                using std::sin;
                const Scalar J0 =
                    abs(prof.A * sin(sp.omega1 * t) + prof.B * sin(sp.omega2() * t));
                const Scalar C1 = aux->C1, C2 = aux->C2, C3 = aux->C3;
                const Scalar lat = L * (-(v0 * v0 - 1) + (2 * abs(v0) + C1) * C1 + C2) + S +
                                   L * L * C3 + L * C3 * C3 + C3 * C3 * C3 / 3 +
                                   (abs(v0) + C1 + J0) * (L + C3) * (L + C3);
                margin = max(margin, lat);
            }
        }
    }
    return margin;
}

/// Scale-invariant gauge of a state against the rectangle: the smallest r with
/// (u1,u2) in r*R at every grid point.
template <class Scalar>
Scalar gauge_norm(const solver::FieldState<Scalar>& state, const Rectangle<Scalar>& rect) {
    using std::max;
    if (state.u1.size() == 0) return 0;
    return max((state.u1.abs() / rect.L).maxCoeff(), (state.u2.abs() / rect.S).maxCoeff());
}

template <class Scalar>
struct InvarianceReport {
    bool invariant{};
    Scalar max_gauge{};
    std::optional<Scalar> first_exit_time{};
};

/// Checks gauge_norm <= 1+tol at every sample of the trajectory.
template <class Scalar>
InvarianceReport<Scalar> monitor_invariance(const solver::Trajectory<Scalar>& traj,
                                            const Rectangle<Scalar>& rect,
                                            Scalar tol = Scalar(1e-6)) {
    InvarianceReport<Scalar> rep;
    rep.invariant = true;
    for (const auto& st : traj) {
        const Scalar g = gauge_norm(st, rect);
        rep.max_gauge = std::max(rep.max_gauge, g);
        if (g > 1 + tol && !rep.first_exit_time) {
            rep.invariant = false;
            rep.first_exit_time = st.t;
        }
    }
    return rep;
}

/// Inputs for the nonlinear-error rectangle: measured bounds C1,C2,C3 and the
/// slope margin eps of S = (1+eps)L/gamma.
template <class Scalar>
struct ErrorRectangleInputs {
    Scalar C1{};
    Scalar C2{};
    Scalar C3{};
    Scalar eps_margin{};
    Scalar v0{};
    Scalar gamma{};
};

template <class Scalar>
struct ErrorRectangleResult {
    Scalar P{};
    Scalar Q{};
    Scalar R{};
    Scalar L_hat{};
    bool degenerate{};  // P = 0 limit; L_hat = 0 carries no content
};

/// Closed-form smallest positive root L_hat of P - Q L + R L^2 = 0, valid when
/// Q > 0 and 4PR < Q^2; none signals the smallness conditions fail.
template <class Scalar>
std::optional<ErrorRectangleResult<Scalar>> error_rectangle(
    const ErrorRectangleInputs<Scalar>& in) {
    using std::abs;
    using std::sqrt;
    if (in.C1 < 0 || in.C2 < 0 || in.C3 < 0)
        throw InvalidParameterError("error_rectangle: C bounds must be nonnegative");
    if (!(in.eps_margin > 0) || !(in.gamma > 0))
        throw InvalidParameterError("error_rectangle: eps_margin and gamma must be positive");
    if (!(in.v0 * in.v0 - 1 - (1 + in.eps_margin) / in.gamma > 0))
        throw InvalidParameterError("error_rectangle: slope margin leaves no contraction slack");

    const Scalar av0 = abs(in.v0);
    ErrorRectangleResult<Scalar> r;
    r.P = in.C3 * in.C3 * in.C3 / 3 + (av0 + in.C1 + 1) * in.C3 * in.C3;
    r.Q = (in.v0 * in.v0 - 1 - (1 + in.eps_margin) / in.gamma) -
          ((2 * av0 + in.C1) * in.C1 + in.C2 + in.C3 * in.C3 +
           2 * (av0 + in.C1 + 1) * in.C3);
    r.R = (av0 + in.C1 + 1) + in.C3;
    if (!(r.Q > 0)) return std::nullopt;
    const Scalar disc = r.Q * r.Q - 4 * r.P * r.R;
    if (!(disc > 0)) return std::nullopt;
    r.L_hat = 2 * r.P / (r.Q + sqrt(disc));  // stable form of (Q - sqrt(disc)) / (2R)
    r.degenerate = (r.P == Scalar(0));
    return r;
}

/// Empirical largest Delta for which find_rectangle still succeeds at the
/// given bound (bisection; the region offers no closed form).
template <class Scalar>
Scalar empirical_delta_star(Scalar v0, Scalar gamma, Scalar bound, Scalar tol = Scalar(1e-6)) {
    if (!find_rectangle(v0, gamma, Scalar(0), bound))
        throw PreconditionError("empirical_delta_star: region empty already at Delta = 0");
    Scalar lo = 0, hi = 1;
    int guard = 0;
    while (find_rectangle(v0, gamma, hi, bound) && guard++ < 60) {
        lo = hi;
        hi *= 2;
    }
    while (hi - lo > tol) {
        const Scalar mid = (lo + hi) / 2;
        (find_rectangle(v0, gamma, mid, bound) ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace ifcable::rectangles
