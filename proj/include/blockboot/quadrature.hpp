#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>

namespace blockboot {

inline constexpr std::size_t default_quadrature_intervals = std::size_t{1} << 14;

// Composite trapezoid rule with `intervals` uniform panels on [a, b].
// For smooth 2 pi periodic integrands on [-pi, pi] this is spectrally
// accurate: a trigonometric polynomial of degree below `intervals`
// integrates exactly.
template <typename F>
auto trapezoid(F&& f, double a, double b, std::size_t intervals = default_quadrature_intervals)
    -> decltype(f(a)) {
    if (!(intervals >= 1))
        throw std::invalid_argument("trapezoid: need at least one interval");
    if (!(a < b))
        throw std::invalid_argument("trapezoid: require a < b");
    const double h = (b - a) / static_cast<double>(intervals);
    auto sum = 0.5 * (f(a) + f(b));
    for (std::size_t j = 1; j < intervals; ++j)
        sum += f(a + h * static_cast<double>(j));
    return sum * h;
}

namespace detail {

// Smallest power of two >= `want`, but never below `at_least`.
inline std::size_t quadrature_grid_for(std::size_t want, std::size_t at_least = default_quadrature_intervals) {
    std::size_t grid = at_least;
    while (grid < want)
        grid <<= 1;
    return grid;
}

}  // namespace detail

}  // namespace blockboot
