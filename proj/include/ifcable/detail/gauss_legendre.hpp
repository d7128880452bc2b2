#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <type_traits>

namespace ifcable::detail {

/// 8-point Gauss-Legendre nodes on [-1,1] (positive half; rule is symmetric).
template <class Scalar>
struct GaussLegendre8 {
    static constexpr std::array<Scalar, 4> nodes = {
        Scalar(0.18343464249564980494L), Scalar(0.52553240991632898582L),
        Scalar(0.79666647741362673959L), Scalar(0.96028985649753623168L)};
    static constexpr std::array<Scalar, 4> weights = {
        Scalar(0.36268378337836198297L), Scalar(0.31370664587788728734L),
        Scalar(0.22238103445337447054L), Scalar(0.10122853629037625915L)};
};

/// Single 8-point Gauss-Legendre panel over [a,b]; value type follows f.
template <class Scalar, class F>
auto gl8_panel(F&& f, Scalar a, Scalar b) {
    using Value = std::decay_t<decltype(f(a))>;
    const Scalar mid = (a + b) / 2, half = (b - a) / 2;
    Value acc{};
    for (std::size_t i = 0; i < 4; ++i) {
        const Scalar z = GaussLegendre8<Scalar>::nodes[i] * half;
        acc += GaussLegendre8<Scalar>::weights[i] * (f(mid - z) + f(mid + z));
    }
    return acc * half;
}

/// Composite 8-point Gauss-Legendre rule with `panels` equal panels.
template <class Scalar, class F>
auto composite_gl8(F&& f, Scalar a, Scalar b, std::size_t panels) {
    using Value = std::decay_t<decltype(f(a))>;
    if (panels == 0) panels = 1;
    const Scalar h = (b - a) / Scalar(panels);
    Value acc{};
    for (std::size_t p = 0; p < panels; ++p)
        acc += gl8_panel(f, a + h * Scalar(p), a + h * Scalar(p + 1));
    return acc;
}

}  // namespace ifcable::detail
