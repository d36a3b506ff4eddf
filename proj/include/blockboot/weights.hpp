#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "blockboot/ar1.hpp"
#include "blockboot/block.hpp"
#include "blockboot/errors.hpp"
#include "blockboot/quadrature.hpp"
#include "blockboot/series.hpp"

namespace blockboot {

// A lag-weight estimator of n * Var(sample mean): T = sum_{k=0}^{n-1} a_k r_hat(k),
// normalized so a_0 = 1, with the factor 2 for positive lags folded into a_k.
// Every scheme here except the nonoverlapping one is of this form.
struct WeightScheme {
    std::vector<double> a;
    std::string label;

    std::size_t n() const noexcept { return a.size(); }
};

inline WeightScheme make_weight_scheme(std::vector<double> a, std::string label,
                                       double cap = 1e3) {
    if (a.size() < 2)
        throw std::invalid_argument("make_weight_scheme: need weights for n >= 2 lags");
    if (a[0] != 1.0)
        throw std::invalid_argument("make_weight_scheme: a_0 must equal 1");
    for (double w : a)
        if (!std::isfinite(w) || std::abs(w) > cap)
            throw std::invalid_argument("make_weight_scheme: weights must be finite and |a_k| <= cap");
    return WeightScheme{std::move(a), std::move(label)};
}

inline WeightScheme weights_for(Method method, std::size_t n, const BlockSpec& spec,
                                const TaperWindow* taper = nullptr) {
    if (n < 2)
        throw std::invalid_argument("weights_for: need n >= 2");
    switch (method) {
        case Method::sb:
            detail::require_sb_spec(spec);
            return make_weight_scheme(detail::sb_weights(n, spec), "sb");
        case Method::mbb:
            return make_weight_scheme(
                detail::mbb_weights(n, detail::require_fixed_ell(spec, n)), "mbb");
        case Method::cbb:
            return make_weight_scheme(
                detail::cbb_weights(n, detail::require_fixed_ell(spec, n)), "cbb");
        case Method::tbb: {
            const TaperWindow window = taper ? *taper : TaperWindow::trapezoid();
            return make_weight_scheme(
                detail::taper_weights(n, detail::require_fixed_ell(spec, n), window),
                "tbb(" + window.name + ")");
        }
        case Method::nbb:
            throw std::invalid_argument(
                "weights_for: the nonoverlapping scheme is not a lag-weight estimator");
    }
    throw std::invalid_argument("weights_for: unknown method");
}

inline double lag_weighted_sum(const TimeSeries& series, const WeightScheme& w) {
    detail::require_n2(series);
    if (w.n() != series.n())
        throw std::invalid_argument("lag_weighted_sum: scheme length must match series length");
    return detail::weighted_autocov_sum(detail::centered(series), w.a);
}

// A = sum_{k>=1} a_k^2 (1 - k/n)^2. To leading order the variance of T is
// A * (2 pi f(0))^2 / n: this is the factor a scheme contributes on its own.
inline double leading_variance_factor(const WeightScheme& w) {
    const std::size_t n = w.n();
    double sum = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double c = w.a[k] * (static_cast<double>(n - k) / static_cast<double>(n));
        sum += c * c;
    }
    return sum;
}

// B = 1/n + (sum_{k>=1} |a_k|)^2 log(n)/n^2 + (1/n) sum_{k>=1} |a_k| (k/n)(1 - k/n):
// the order bound on every term the leading variance factor ignores.
inline double remainder_factor(const WeightScheme& w) {
    const std::size_t n = w.n();
    const double nn = static_cast<double>(n);
    double abs_sum = 0.0;
    double triangle = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double aa = std::abs(w.a[k]);
        abs_sum += aa;
        triangle += aa * (static_cast<double>(k) / nn) * (static_cast<double>(n - k) / nn);
    }
    return 1.0 / nn + abs_sum * abs_sum * std::log(nn) / (nn * nn) + triangle / nn;
}

// H(omega) = sum_{k=1}^{n-1} a_k (1 - k/n) e^{-i k omega}, by Horner's rule
// in e^{-i omega}.
inline std::complex<double> smoothing_window(const WeightScheme& w, double omega) {
    if (!std::isfinite(omega))
        throw std::invalid_argument("smoothing_window: omega must be finite");
    const std::size_t n = w.n();
    const std::complex<double> z = std::polar(1.0, -omega);
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t k = n - 1; k >= 1; --k) {
        const double c = w.a[k] * (static_cast<double>(n - k) / static_cast<double>(n));
        acc = acc * z + c;
    }
    return acc * z;
}

// K(omega) = |H(omega)|^2 / (2 pi A): nonnegative and, by Parseval,
// integrating to one over (-pi, pi] whenever A > 0.
inline double spectral_kernel(const WeightScheme& w, double omega) {
    const double A = leading_variance_factor(w);
    if (!(A > 0.0))
        throw numerical_error("spectral_kernel: leading variance factor vanishes");
    return std::norm(smoothing_window(w, omega)) / (two_pi * A);
}

// Fejer kernel (sin(n omega/2) / sin(omega/2))^2 / (2 pi n): the spectral
// kernel of the triangular weights. 2 pi periodic; the removable singularity
// at omega = 0 is filled by the quadratic Taylor expansion of the sine ratio.
inline double fejer_kernel(std::size_t n, double omega) {
    if (n == 0)
        throw std::invalid_argument("fejer_kernel: n must be positive");
    if (!std::isfinite(omega))
        throw std::invalid_argument("fejer_kernel: omega must be finite");
    const double reduced = omega - two_pi * std::round(omega / two_pi);
    const double x = 0.5 * reduced;
    const double nn = static_cast<double>(n);
    double ratio;
    if (std::abs(x) < 1e-8)
        ratio = nn * (1.0 - (nn * nn - 1.0) * x * x / 6.0);
    else
        ratio = std::sin(nn * x) / std::sin(x);
    return ratio * ratio / (two_pi * nn);
}

// Smoothing action of the Fejer kernel on a single harmonic:
//   integral e^{i k lambda} Kf_n(omega - lambda) dlambda = (1 - k/n) e^{i k omega}.
// Both sides are evaluated (trapezoid quadrature vs closed form); disagreement
// beyond `tol` raises numerical_error, otherwise the closed form is returned.
inline std::complex<double> fejer_convolution(std::size_t n, std::size_t k, double omega,
                                              double tol = 1e-6) {
    if (n == 0)
        throw std::invalid_argument("fejer_convolution: n must be positive");
    if (k >= n)
        throw std::out_of_range("fejer_convolution: require 0 <= k < n");
    if (!std::isfinite(omega))
        throw std::invalid_argument("fejer_convolution: omega must be finite");
    // The integrand is a trigonometric polynomial of degree < n + k, so a
    // uniform grid finer than that integrates it exactly (up to rounding).
    const std::size_t grid = detail::quadrature_grid_for(n + k + 2);
    const double pi_half_period = 0.5 * two_pi;
    const double kk = static_cast<double>(k);
    const auto integrand = [&](double lam) {
        return std::polar(1.0, kk * lam) * fejer_kernel(n, omega - lam);
    };
    const std::complex<double> quad =
        trapezoid(integrand, -pi_half_period, pi_half_period, grid);
    const std::complex<double> closed =
        (static_cast<double>(n - k) / static_cast<double>(n)) * std::polar(1.0, kk * omega);
    if (std::abs(quad - closed) > tol)
        throw numerical_error("fejer_convolution: quadrature disagrees with closed form");
    return closed;
}

// Resolution envelope of an n-point kernel: n on the central band
// |omega| <= 1/n (after reduction to (-pi, pi]), 1/|omega| outside it.
inline double resolution_bound(std::size_t n, double omega) {
    if (n == 0)
        throw std::invalid_argument("resolution_bound: n must be positive");
    if (!std::isfinite(omega))
        throw std::invalid_argument("resolution_bound: omega must be finite");
    const double reduced = omega - two_pi * std::round(omega / two_pi);
    const double nn = static_cast<double>(n);
    if (std::abs(reduced) <= 1.0 / nn)
        return nn;
    return 1.0 / std::abs(reduced);
}

// integral over (-pi, pi] of K(omega) f(omega)^2 for an AR(1) spectral
// density, by two independent routes:
//   exact      (2 pi A)^{-1} sum_{j,k>=1} c_j c_k g(j - k), where
//              c_k = a_k (1 - k/n) and g(d) = integral e^{i d w} f(w)^2 dw
//              in closed form,
//   quadrature trapezoid rule applied to K * f^2 directly.
// The two must agree to `tol` relative, else numerical_error. Returns the
// exact route.
inline double kernel_spectral_integral(const WeightScheme& w, const Ar1Model& model,
                                       double tol = 1e-8) {
    const std::size_t n = w.n();
    const double A = leading_variance_factor(w);
    if (!(A > 0.0))
        throw numerical_error("kernel_spectral_integral: leading variance factor vanishes");

    std::vector<double> c(n, 0.0);
    double peak = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        c[k] = w.a[k] * (static_cast<double>(n - k) / static_cast<double>(n));
        peak = std::max(peak, std::abs(c[k]));
    }
    const double cutoff = detail::negligible_weight_ratio * peak;
    std::vector<std::size_t> lags;
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs(c[k]) > cutoff)
            lags.push_back(k);

    std::vector<double> g(n, 0.0);
    for (std::size_t d = 0; d < n; ++d)
        g[d] = spectral_square_coeff(model, static_cast<long long>(d));

    double exact = 0.0;
    for (std::size_t j : lags) {
        double inner = 0.0;
        for (std::size_t k : lags) {
            const std::size_t d = j > k ? j - k : k - j;
            inner += c[k] * g[d];
        }
        exact += c[j] * inner;
    }
    exact /= two_pi * A;

    // K has harmonics only up to |n - 2|; the grid needs headroom past that
    // only for the geometric tail of f^2.
    const std::size_t grid = detail::quadrature_grid_for(n + 2048);
    const double pi_half_period = 0.5 * two_pi;
    const double norm_factor = two_pi * A;
    const auto integrand = [&](double omega) {
        const double f = spectral_density(model, omega);
        return std::norm(smoothing_window(w, omega)) / norm_factor * f * f;
    };
    const double quad = trapezoid(integrand, -pi_half_period, pi_half_period, grid);

    const double rel = std::abs(quad - exact) / std::max(std::abs(exact), 1e-300);
    if (rel > tol)
        throw numerical_error("kernel_spectral_integral: quadrature and closed-form routes "
                              "disagree (relative gap " + detail::format_double(rel) + ")");
    return exact;
}

// Leading-order variance of the weighted estimate itself:
//   A * (2 pi)^2 / n * integral K f^2.
inline double predicted_estimator_variance(const WeightScheme& w, const Ar1Model& model) {
    const double A = leading_variance_factor(w);
    if (!(A > 0.0))
        throw numerical_error("predicted_estimator_variance: leading variance factor vanishes");
    return A * two_pi * two_pi / static_cast<double>(w.n()) *
           kernel_spectral_integral(w, model);
}

}  // namespace blockboot
