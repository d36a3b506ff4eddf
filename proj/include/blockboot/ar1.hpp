#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "blockboot/rng.hpp"
#include "blockboot/series.hpp"

namespace blockboot {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Stationary Gaussian AR(1): X_t = phi * X_{t-1} + sigma_z * Z_t.
// Serves as the analytic oracle for the simulation experiments; every
// population quantity below is a closed form in (phi, sigma_z).
struct Ar1Model {
    double phi;
    double sigma_z;

    Ar1Model(double phi_, double sigma_z_) : phi(phi_), sigma_z(sigma_z_) {
        if (!std::isfinite(phi) || !(std::abs(phi) < 1.0))
            throw std::invalid_argument("Ar1Model: |phi| < 1 required for stationarity");
        if (!std::isfinite(sigma_z) || !(sigma_z > 0.0))
            throw std::invalid_argument("Ar1Model: sigma_z must be positive");
    }
};

// r(k) = sigma_z^2 phi^|k| / (1 - phi^2).
inline double ar1_autocov(const Ar1Model& m, std::size_t k) {
    const double r0 = m.sigma_z * m.sigma_z / (1.0 - m.phi * m.phi);
    if (k == 0)
        return r0;
    return r0 * std::pow(m.phi, static_cast<double>(k));
}

// f(omega) = sigma_z^2 / (2 pi (1 - 2 phi cos omega + phi^2)).
inline double spectral_density(const Ar1Model& m, double omega) {
    if (!std::isfinite(omega))
        throw std::invalid_argument("spectral_density: omega must be finite");
    const double denom = 1.0 - 2.0 * m.phi * std::cos(omega) + m.phi * m.phi;
    return m.sigma_z * m.sigma_z / (two_pi * denom);
}

// 2 pi f(0) = sigma_z^2 / (1 - phi)^2: the limit of n * Var(sample mean).
inline double long_run_variance(const Ar1Model& m) {
    const double d = 1.0 - m.phi;
    return m.sigma_z * m.sigma_z / (d * d);
}

// sum over all integer lags of |k| r(k) = 2 r(0) phi / (1 - phi)^2.
// The leading bias of every block-bootstrap variance estimator with
// expected block length ell is -bias_constant / ell.
inline double bias_constant(const Ar1Model& m) {
    const double d = 1.0 - m.phi;
    return 2.0 * ar1_autocov(m, 0) * m.phi / (d * d);
}

// Integral over (-pi, pi] of e^{i d omega} f(omega)^2, i.e. the Fourier
// coefficient of the squared spectral density. Summing the three geometric
// pieces of sum_t r(t) r(t+d) / (2 pi) collapses to:
//   r(0)^2 phi^|d| (|d| - 1 + 2 / (1 - phi^2)) / (2 pi).
inline double spectral_square_coeff(const Ar1Model& m, long long d) {
    const double r0 = ar1_autocov(m, 0);
    const double ad = std::abs(static_cast<double>(d));
    return r0 * r0 * std::pow(m.phi, ad) * (ad - 1.0 + 2.0 / (1.0 - m.phi * m.phi)) / two_pi;
}

// n * Var(sample mean of n consecutive values), exactly:
//   sum_{|k| < n} (1 - |k|/n) r(k).
inline double exact_mean_variance(const Ar1Model& m, std::size_t n) {
    if (n == 0)
        throw std::invalid_argument("exact_mean_variance: n must be positive");
    const double r0 = ar1_autocov(m, 0);
    double sum = r0;
    double rk = r0;
    for (std::size_t k = 1; k < n; ++k) {
        rk *= m.phi;
        if (std::abs(rk) < 1e-20 * r0)
            break;
        sum += 2.0 * (static_cast<double>(n - k) / static_cast<double>(n)) * rk;
    }
    return sum;
}

// Draws X_1 from the stationary law, then iterates the recursion, so every
// path is exactly stationary at all sample sizes.
inline TimeSeries simulate_ar1(const Ar1Model& m, std::size_t n, Rng& rng) {
    if (n == 0)
        throw std::invalid_argument("simulate_ar1: n must be positive");
    std::vector<double> x(n);
    const double stationary_sd = m.sigma_z / std::sqrt(1.0 - m.phi * m.phi);
    x[0] = stationary_sd * rng.next_gaussian();
    for (std::size_t t = 1; t < n; ++t)
        x[t] = m.phi * x[t - 1] + m.sigma_z * rng.next_gaussian();
    return TimeSeries(std::move(x));
}

inline TimeSeries simulate_ar1(const Ar1Model& m, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    return simulate_ar1(m, n, rng);
}

}  // namespace blockboot
