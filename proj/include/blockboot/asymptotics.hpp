#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

#include "blockboot/ar1.hpp"
#include "blockboot/block.hpp"
#include "blockboot/series.hpp"

namespace blockboot {

// Scheme-specific constant c in the leading variance c (2 pi f(0))^2 ell / n:
// 2 for the stationary and nonoverlapping schemes, 4/3 for the fixed
// overlapping ones (moving, circular, and tapered with rectangular taper).
// Non-rectangular tapers have no closed constant here.
inline double variance_constant(Method method, const TaperWindow* taper = nullptr) {
    switch (method) {
        case Method::sb:
        case Method::nbb:
            return 2.0;
        case Method::mbb:
        case Method::cbb:
            return 4.0 / 3.0;
        case Method::tbb:
            if (taper && taper->name == "rectangular")
                return 4.0 / 3.0;
            throw std::invalid_argument(
                "variance_constant: no closed constant for the tapered scheme with a "
                "non-rectangular taper");
    }
    throw std::invalid_argument("variance_constant: unknown method");
}

namespace detail {

inline void require_positive_ell(double ell) {
    if (!std::isfinite(ell) || !(ell > 0.0))
        throw std::invalid_argument("asymptotics: block length must be positive");
}

inline void require_positive_n(std::size_t n) {
    if (n == 0)
        throw std::invalid_argument("asymptotics: n must be positive");
}

}  // namespace detail

// Leading-order variance of the block-bootstrap variance estimator:
//   c (2 pi f(0))^2 ell / n.
inline double asymptotic_variance(const Ar1Model& model, Method method, std::size_t n,
                                  double ell, const TaperWindow* taper = nullptr) {
    detail::require_positive_n(n);
    detail::require_positive_ell(ell);
    const double v = long_run_variance(model);
    return variance_constant(method, taper) * v * v * ell / static_cast<double>(n);
}

// Leading-order bias, common to all schemes: -G/ell with G = sum |k| r(k).
inline double asymptotic_bias(const Ar1Model& model, double ell) {
    detail::require_positive_ell(ell);
    return -bias_constant(model) / ell;
}

// Leading-order mean squared error: variance plus squared bias.
inline double asymptotic_mse(const Ar1Model& model, Method method, std::size_t n,
                             double ell, const TaperWindow* taper = nullptr) {
    const double b = asymptotic_bias(model, ell);
    return asymptotic_variance(model, method, n, ell, taper) + b * b;
}

// Minimizer of the leading-order MSE over real ell:
//   |G / (2 pi f(0))|^{2/3} n^{1/3}, times (3/2)^{1/3} for the fixed
//   overlapping schemes (their variance constant is 4/3 instead of 2).
// Undefined when G = 0 (the bias term vanishes and the MSE is increasing).
inline double optimal_block(const Ar1Model& model, Method method, std::size_t n,
                            const TaperWindow* taper = nullptr) {
    detail::require_positive_n(n);
    const double c = variance_constant(method, taper);
    const double g = bias_constant(model);
    if (g == 0.0)
        throw std::invalid_argument(
            "optimal_block: bias constant is zero, the leading-order MSE has no "
            "interior minimum");
    const double v = long_run_variance(model);
    const double base = std::pow(std::abs(g / v), 2.0 / 3.0) * std::cbrt(static_cast<double>(n));
    if (c == 2.0)
        return base;
    return std::cbrt(1.5) * base;
}

// Best-achievable MSE ratio, circular scheme over stationary scheme, when
// both use their own optimal block length. The closed-form limit (2/3)^{2/3}
// (about 0.763) holds at every n because the optimized leading-order MSE
// scales as c^{2/3} and everything else cancels.
inline double sb_vs_cbb_efficiency() {
    return std::pow(2.0 / 3.0, 2.0 / 3.0);
}

inline double sb_vs_cbb_efficiency(const Ar1Model& model, std::size_t n) {
    const double mse_cbb =
        asymptotic_mse(model, Method::cbb, n, optimal_block(model, Method::cbb, n));
    const double mse_sb =
        asymptotic_mse(model, Method::sb, n, optimal_block(model, Method::sb, n));
    return mse_cbb / mse_sb;
}

// variance ~ variance_coeff * ell / n, bias ~ bias_coeff / ell,
// mse evaluated at the supplied (n, ell); ell_opt absent when G = 0.
struct AsymptoticSummary {
    Method method;
    double variance_coeff;
    double bias_coeff;
    double mse;
    std::optional<double> ell_opt;
};

inline AsymptoticSummary asymptotic_summary(const Ar1Model& model, Method method,
                                            std::size_t n, double ell,
                                            const TaperWindow* taper = nullptr) {
    const double v = long_run_variance(model);
    AsymptoticSummary s{};
    s.method = method;
    s.variance_coeff = variance_constant(method, taper) * v * v;
    s.bias_coeff = -bias_constant(model);
    s.mse = asymptotic_mse(model, method, n, ell, taper);
    if (bias_constant(model) != 0.0)
        s.ell_opt = optimal_block(model, method, n, taper);
    return s;
}

// Data-driven block length: plug flat-top-window estimates of G and
// 2 pi f(0) into the optimal_block formula.
//   lambda(t) = max(min(1, 2(1 - |t|)), 0), truncation m = max(2, 2 ceil(n^{1/5})),
//   G_hat    = 2 sum_{k=1}^{m} lambda(k/m) k r_hat(k),
//   v_hat    = r_hat(0) + 2 sum_{k=1}^{m} lambda(k/m) r_hat(k).
// Falls back to the rule of thumb ceil(n^{1/3}) when the estimated bias
// constant is negligible (|G_hat| < 1e-8 r_hat(0)) or v_hat fails to be
// positive. Result clamped to [1, n].
inline double plugin_optimal_block(const TimeSeries& series, Method method,
                                   const TaperWindow* taper = nullptr) {
    const std::size_t n = series.n();
    if (n < 50)
        throw std::invalid_argument("plugin_optimal_block: need n >= 50");
    const double c = variance_constant(method, taper);

    const double nn = static_cast<double>(n);
    // Tiny downward nudge so an exact integer fifth root is not pushed up a
    // whole lag by one ulp of pow.
    std::size_t m = 2 * static_cast<std::size_t>(std::ceil(std::pow(nn, 0.2) - 1e-9));
    m = std::max<std::size_t>(m, 2);
    m = std::min<std::size_t>(m, n - 1);

    const auto dev = detail::centered(series);
    const double r0 = detail::autocov(dev, 0);
    double g_hat = 0.0;
    double v_hat = r0;
    for (std::size_t k = 1; k <= m; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(m);
        const double lambda = std::max(std::min(1.0, 2.0 * (1.0 - t)), 0.0);
        if (lambda == 0.0)
            continue;
        const double rk = detail::autocov(dev, k);
        g_hat += 2.0 * lambda * static_cast<double>(k) * rk;
        v_hat += 2.0 * lambda * rk;
    }

    double ell;
    if (std::abs(g_hat) < 1e-8 * r0 || !(v_hat > 0.0)) {
        ell = std::ceil(std::cbrt(nn));
    } else {
        ell = std::pow(std::abs(g_hat / v_hat), 2.0 / 3.0) * std::cbrt(nn);
        if (c != 2.0)
            ell *= std::cbrt(1.5);
    }
    return std::min(std::max(ell, 1.0), nn);
}

}  // namespace blockboot
