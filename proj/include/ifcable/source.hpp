#pragma once

#include <Eigen/Core>
#include <cmath>

#include "ifcable/errors.hpp"
#include "ifcable/model.hpp"

namespace ifcable::source {

/// Two-source interferential stimulation parameters; omega2 = omega1 + eta.
template <class Scalar>
struct SourceParams {
    Scalar a{};
    Scalar b{};
    Scalar d1{1};
    Scalar d2{1};
    Scalar x0{};
    Scalar omega1{1};
    Scalar eta{1};

    Scalar omega2() const { return omega1 + eta; }
};

template <class Scalar>
void validate(const SourceParams<Scalar>& p) {
    if (!(p.d1 > 0) || !(p.d2 > 0))
        throw InvalidParameterError("source: d1 and d2 must be positive");
    if (!(p.omega1 > 0)) throw InvalidParameterError("source: omega1 must be positive");
    if (!(p.eta > 0)) throw InvalidParameterError("source: eta must be positive");
}

/// Spatial profiles and their exact second derivatives at one point.
template <class Scalar>
struct SourceFields {
    Scalar A{};
    Scalar B{};
    Scalar A_xx{};
    Scalar B_xx{};
};

/// A = a/(d1^2+x^2), B = b/(d2^2+(x-x0)^2), with analytic second derivatives.
template <class Scalar>
SourceFields<Scalar> eval_profiles(const SourceParams<Scalar>& p, Scalar x) {
    const Scalar q1 = p.d1 * p.d1 + x * x;
    const Scalar dx2 = x - p.x0;
    const Scalar q2 = p.d2 * p.d2 + dx2 * dx2;
    SourceFields<Scalar> f;
    f.A = p.a / q1;
    f.B = p.b / q2;
    f.A_xx = p.a * (6 * x * x - 2 * p.d1 * p.d1) / (q1 * q1 * q1);
    f.B_xx = p.b * (6 * dx2 * dx2 - 2 * p.d2 * p.d2) / (q2 * q2 * q2);
    return f;
}

template <class Derived>
auto profile_A(const SourceParams<typename Derived::Scalar>& p,
               const Eigen::ArrayBase<Derived>& x) {
    return (p.a / (p.d1 * p.d1 + x.square())).eval();
}

template <class Derived>
auto profile_B(const SourceParams<typename Derived::Scalar>& p,
               const Eigen::ArrayBase<Derived>& x) {
    return (p.b / (p.d2 * p.d2 + (x - p.x0).square())).eval();
}

template <class Derived>
auto profile_A_xx(const SourceParams<typename Derived::Scalar>& p,
                  const Eigen::ArrayBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Scalar d2 = p.d1 * p.d1;
    return (p.a * (6 * x.square() - 2 * d2) / (d2 + x.square()).cube()).eval();
}

template <class Derived>
auto profile_B_xx(const SourceParams<typename Derived::Scalar>& p,
                  const Eigen::ArrayBase<Derived>& x) {
    using Scalar = typename Derived::Scalar;
    const Scalar d2 = p.d2 * p.d2;
    return (p.b * (6 * (x - p.x0).square() - 2 * d2) / (d2 + (x - p.x0).square()).cube()).eval();
}

/// Instantaneous source values at one (x,t).
template <class Scalar>
struct TimeFields {
    Scalar I{};         // injected current A*w1*cos(w1 t) + B*w2*cos(w2 t)
    Scalar J0{};        // oscillatory voltage part A*sin(w1 t) + B*sin(w2 t)
    Scalar envelope{};  // slow envelope A^2/2 + B^2/2 + A*B*cos(eta t)
};

template <class Scalar>
TimeFields<Scalar> eval_time_fields(const SourceParams<Scalar>& p, Scalar x, Scalar t) {
    using std::cos;
    using std::sin;
    const auto f = eval_profiles(p, x);
    const Scalar w2 = p.omega2();
    TimeFields<Scalar> out;
    out.I = f.A * p.omega1 * cos(p.omega1 * t) + f.B * w2 * cos(w2 * t);
    out.J0 = f.A * sin(p.omega1 * t) + f.B * sin(w2 * t);
    out.envelope = f.A * f.A / 2 + f.B * f.B / 2 + f.A * f.B * cos(p.eta * t);
    return out;
}

template <class Derived>
auto source_I(const SourceParams<typename Derived::Scalar>& p,
              const Eigen::ArrayBase<Derived>& x, typename Derived::Scalar t) {
    using std::cos;
    const auto w2 = p.omega2();
    return (profile_A(p, x) * (p.omega1 * cos(p.omega1 * t)) +
            profile_B(p, x) * (w2 * cos(w2 * t)))
        .eval();
}

template <class Derived>
auto source_J0(const SourceParams<typename Derived::Scalar>& p,
               const Eigen::ArrayBase<Derived>& x, typename Derived::Scalar t) {
    using std::sin;
    return (profile_A(p, x) * sin(p.omega1 * t) + profile_B(p, x) * sin(p.omega2() * t)).eval();
}

template <class Derived>
auto source_envelope(const SourceParams<typename Derived::Scalar>& p,
                     const Eigen::ArrayBase<Derived>& x, typename Derived::Scalar t) {
    using std::cos;
    const auto A = profile_A(p, x);
    const auto B = profile_B(p, x);
    return (A.square() / 2 + B.square() / 2 + A * B * cos(p.eta * t)).eval();
}

/// Error-system coefficient fields at one (x,t), for a frozen PAS sample V.
template <class Scalar>
struct ErrorCoefficients {
    Scalar phi1{};
    Scalar phi2{};
    Scalar phi3{};
};

/// Pointwise coefficient combinations phi1, phi2, phi3 entering the error
/// analysis.  Note: the evolution systems in solver.hpp carry an additional
/// bare +J0 forcing term produced by the change of variables E_v = v - V - J0;
/// phi3 here is the coefficient combination only.
template <class Scalar>
ErrorCoefficients<Scalar> error_coefficients(const SourceParams<Scalar>& p,
                                             const model::Equilibrium<Scalar>& eq, Scalar x,
                                             Scalar t, Scalar V) {
    using std::cos;
    using std::sin;
    const auto f = eval_profiles(p, x);
    const Scalar w1 = p.omega1, w2 = p.omega2();
    const Scalar J0 = f.A * sin(w1 * t) + f.B * sin(w2 * t);
    const Scalar J0xx = f.A_xx * sin(w1 * t) + f.B_xx * sin(w2 * t);
    const Scalar u = eq.v0 + V;
    ErrorCoefficients<Scalar> c;
    c.phi1 = -J0 * J0 - 2 * u * J0;
    c.phi2 = -(u + J0);
    c.phi3 = J0xx - J0 * J0 * J0 / 3 - u * u * J0 +
             u * (f.A * f.A / 2 * cos(2 * w1 * t) + f.B * f.B / 2 * cos(2 * w2 * t) +
                  f.A * f.B * cos((w1 + w2) * t));
    return c;
}

/// Closed-form amplitude bound Delta = |a|/d1^2 + |b|/d2^2 (also the M of the
/// linear error estimate); an upper bound for sup_x |A|+|B| when x0 != 0.
template <class Scalar>
Scalar sup_amplitude(const SourceParams<Scalar>& p) {
    using std::abs;
    return abs(p.a) / (p.d1 * p.d1) + abs(p.b) / (p.d2 * p.d2);
}

/// Dense-grid maximum of |A|+|B|; reported alongside the closed form.
template <class Derived>
typename Derived::Scalar grid_sup_amplitude(const SourceParams<typename Derived::Scalar>& p,
                                            const Eigen::ArrayBase<Derived>& x) {
    return (profile_A(p, x).abs() + profile_B(p, x).abs()).maxCoeff();
}

}  // namespace ifcable::source
