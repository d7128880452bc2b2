#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "ifcable/errors.hpp"

namespace ifcable::model {

/// Reaction constants and recovery diffusivity.  `delta_witness`, when present,
/// is a value in (0, 1/4) for which both admissibility inequalities hold.
template <class Scalar>
struct ModelParams {
    Scalar epsilon{};
    Scalar gamma{};
    Scalar beta{};
    Scalar rho{};
    std::optional<Scalar> delta_witness{};
};

/// Unique rest state of the reaction system; w0 = (v0+beta)/gamma exactly.
template <class Scalar>
struct Equilibrium {
    Scalar v0{};
    Scalar w0{};
};

template <class Scalar>
struct AdmissibleResult {
    bool admissible{};
    std::optional<Scalar> witness{};
};

/// Cubic whose unique real root is the equilibrium voltage.
template <class Scalar>
Scalar h_cubic(Scalar v, Scalar beta, Scalar gamma) {
    return v * v * v - 3 * (1 - 1 / gamma) * v + 3 * beta / gamma;
}

template <class Scalar>
Scalar h_cubic_deriv(Scalar v, Scalar gamma) {
    return 3 * v * v - 3 * (1 - 1 / gamma);
}

/// First admissibility inequality (positive cubic discriminant combination).
template <class Scalar>
Scalar admissible_discriminant(Scalar beta, Scalar gamma) {
    const Scalar q = (1 - gamma) / gamma;
    return q * q * q + Scalar(2.25) * beta * beta / (gamma * gamma);
}

/// Second admissibility inequality, evaluated at a candidate delta.
template <class Scalar>
Scalar admissible_delta_condition(Scalar beta, Scalar gamma, Scalar delta) {
    using std::sqrt;
    return sqrt(1 + 1 / (delta * gamma)) * (2 - (3 + 1 / delta) / gamma) + 3 * beta / gamma;
}

/// Log-spaced delta search grid over [1e-4, 0.2499].
template <class Scalar>
std::vector<Scalar> default_delta_grid(std::size_t n = 64) {
    using std::exp;
    using std::log;
    std::vector<Scalar> grid(n);
    const Scalar lo = log(Scalar(1e-4)), hi = log(Scalar(0.2499));
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = exp(lo + (hi - lo) * Scalar(i) / Scalar(n - 1));
    return grid;
}

/// Checks the two-part admissibility condition; `witness` is the first grid
/// delta satisfying the second inequality.
template <class Scalar>
AdmissibleResult<Scalar> check_admissible(Scalar beta, Scalar gamma,
                                          const std::vector<Scalar>& delta_grid) {
    if (!(beta > 0) || !(gamma > 0))
        throw InvalidParameterError("check_admissible: beta and gamma must be positive");
    if (delta_grid.empty())
        throw InvalidGridError("check_admissible: delta grid is empty");
    for (Scalar d : delta_grid)
        if (!(d > 0) || !(d < Scalar(0.25)))
            throw InvalidGridError("check_admissible: delta grid entries must lie in (0, 1/4)");

    if (!(admissible_discriminant(beta, gamma) > 0)) return {false, std::nullopt};
    for (Scalar d : delta_grid)
        if (admissible_delta_condition(beta, gamma, d) > 0) return {true, d};
    return {false, std::nullopt};
}

template <class Scalar>
AdmissibleResult<Scalar> check_admissible(Scalar beta, Scalar gamma) {
    return check_admissible(beta, gamma, default_delta_grid<Scalar>());
}

/// Solves for the unique real root of the cubic: bisection on
/// [-max(beta,sqrt(3))-1, 0] to width 1e-6, then Newton to |h| <= tol.
template <class Scalar>
Equilibrium<Scalar> solve_equilibrium(Scalar beta, Scalar gamma, Scalar tol) {
    using std::abs;
    using std::max;
    using std::sqrt;
    if (!check_admissible(beta, gamma).admissible)
        throw PreconditionError("solve_equilibrium: parameters are not admissible");

    Scalar lo = -max(beta, sqrt(Scalar(3))) - 1, hi = 0;
    Scalar flo = h_cubic(lo, beta, gamma), fhi = h_cubic(hi, beta, gamma);
    if (!(flo < 0) || !(fhi > 0))
        throw NumericError("solve_equilibrium: root not bracketed on the standard interval");
    while (hi - lo > Scalar(1e-6)) {
        const Scalar mid = (lo + hi) / 2;
        if (h_cubic(mid, beta, gamma) < 0)
            lo = mid;
        else
            hi = mid;
    }
    Scalar v = (lo + hi) / 2;
    for (int it = 0; it < 100 && abs(h_cubic(v, beta, gamma)) > tol; ++it)
        v -= h_cubic(v, beta, gamma) / h_cubic_deriv(v, gamma);
    if (!(abs(h_cubic(v, beta, gamma)) <= tol))
        throw NumericError("solve_equilibrium: Newton refinement did not reach tolerance");
    return {v, (v + beta) / gamma};
}

/// Enforces the ModelParams domain: positive rates, nonnegative diffusivity,
/// and (when present) a delta_witness that actually witnesses admissibility.
template <class Scalar>
void validate(const ModelParams<Scalar>& p) {
    if (!(p.epsilon > 0)) throw InvalidParameterError("model: epsilon must be positive");
    if (!(p.gamma > 0)) throw InvalidParameterError("model: gamma must be positive");
    if (!(p.beta > 0)) throw InvalidParameterError("model: beta must be positive");
    if (!(p.rho >= 0)) throw InvalidParameterError("model: rho must be nonnegative");
    if (p.delta_witness) {
        const Scalar d = *p.delta_witness;
        if (!(d > 0) || !(d < Scalar(0.25)))
            throw InvalidParameterError("model: delta_witness must lie in (0, 1/4)");
        if (!(admissible_discriminant(p.beta, p.gamma) > 0) ||
            !(admissible_delta_condition(p.beta, p.gamma, d) > 0))
            throw InvalidParameterError(
                "model: delta_witness does not witness admissibility for (beta, gamma)");
    }
}

template <class Scalar>
struct BoundsReport {
    bool lower_ok{};   // min{-beta, -sqrt(3)} <= v0
    bool upper_ok{};   // v0 < -sqrt(1 + 1/(delta*gamma))
    Scalar lower{};
    Scalar upper{};
};

/// Verifies the equilibrium voltage bounds for the given witness delta.
template <class Scalar>
BoundsReport<Scalar> equilibrium_bounds(const Equilibrium<Scalar>& eq, Scalar beta, Scalar gamma,
                                        Scalar delta) {
    using std::min;
    using std::sqrt;
    BoundsReport<Scalar> r;
    r.lower = min(-beta, -sqrt(Scalar(3)));
    r.upper = -sqrt(1 + 1 / (delta * gamma));
    r.lower_ok = r.lower <= eq.v0;
    r.upper_ok = eq.v0 < r.upper;
    return r;
}

}  // namespace ifcable::model
