#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blockboot/rng.hpp"
#include "blockboot/series.hpp"

namespace blockboot {

// The five bootstrap schemes for the variance of the sample mean:
// stationary (geometric block lengths), nonoverlapping, moving (overlapping),
// circular (wrapped), and tapered blocks.
enum class Method { sb, nbb, mbb, cbb, tbb };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::sb: return "sb";
        case Method::nbb: return "nbb";
        case Method::mbb: return "mbb";
        case Method::cbb: return "cbb";
        case Method::tbb: return "tbb";
    }
    throw std::invalid_argument("method_name: unknown method");
}

inline Method parse_method(std::string_view name) {
    std::string low;
    for (char c : name)
        low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (low == "sb") return Method::sb;
    if (low == "nbb") return Method::nbb;
    if (low == "mbb") return Method::mbb;
    if (low == "cbb") return Method::cbb;
    if (low == "tbb") return Method::tbb;
    throw std::invalid_argument("unknown method '" + std::string(name) +
                                "' (expected sb|nbb|mbb|cbb|tbb)");
}

// Block length selector. The stationary scheme accepts any real ell >= 1
// (the mean of the geometric block-length law); fixed-block schemes require
// an integer 1 <= ell <= n.
struct BlockSpec {
    double ell;
};

// Data taper on [0, 1] used by the tapered scheme. Values must lie in [0, 1].
struct TaperWindow {
    std::string name;
    std::function<double(double)> shape;

    static TaperWindow rectangular() {
        return {"rectangular", [](double) { return 1.0; }};
    }

    // Ramp up on [0, c], flat at one, ramp down on [1 - c, 1].
    static TaperWindow trapezoid(double c = 0.43) {
        if (!std::isfinite(c) || !(c > 0.0) || !(c <= 0.5))
            throw std::invalid_argument("TaperWindow::trapezoid: c must lie in (0, 1/2]");
        return {"trapezoid", [c](double t) {
                    return std::max(0.0, std::min({t / c, 1.0, (1.0 - t) / c}));
                }};
    }
};

namespace detail {

inline void require_sb_spec(const BlockSpec& spec) {
    if (!std::isfinite(spec.ell) || !(spec.ell >= 1.0))
        throw std::invalid_argument("block length: stationary scheme needs real ell >= 1");
}

inline std::size_t require_fixed_ell(const BlockSpec& spec, std::size_t n) {
    if (!std::isfinite(spec.ell) || !(spec.ell >= 1.0) || spec.ell != std::floor(spec.ell))
        throw std::invalid_argument("block length: fixed-block schemes need integer ell >= 1");
    if (spec.ell > static_cast<double>(n))
        throw std::invalid_argument("block length: ell exceeds series length");
    return static_cast<std::size_t>(spec.ell);
}

inline void require_n2(const TimeSeries& series) {
    if (series.n() < 2)
        throw std::invalid_argument("variance estimation requires a series of length >= 2");
}

}  // namespace detail

// Round half up, floor at 1: the rule for turning a real block-length
// recommendation into a usable fixed block length.
inline std::size_t round_block_length(double ell) {
    if (!std::isfinite(ell))
        throw std::invalid_argument("round_block_length: ell must be finite");
    const double r = std::floor(ell + 0.5);
    return r < 1.0 ? std::size_t{1} : static_cast<std::size_t>(r);
}

// Lag weight of the stationary scheme, q = 1 - 1/ell:
//   (1 - k/n) q^k + (k/n) q^{n-k}.
// Written as two symmetric products so the k <-> n-k symmetry holds exactly
// in floating point (the two terms swap and addition commutes).
inline double sb_weight(std::size_t k, std::size_t n, const BlockSpec& spec) {
    detail::require_sb_spec(spec);
    if (n == 0 || k > n)
        throw std::out_of_range("sb_weight: require 0 <= k <= n, n >= 1");
    const double q = 1.0 - 1.0 / spec.ell;
    const double head = static_cast<double>(n - k) / static_cast<double>(n);
    const double tail = static_cast<double>(k) / static_cast<double>(n);
    return head * std::pow(q, static_cast<double>(k)) +
           tail * std::pow(q, static_cast<double>(n - k));
}

namespace detail {

inline constexpr double negligible_weight_ratio = 1e-17;

// sum_k a[k] * r_hat(k) over k = 0..n-1. Weights more than 17 orders of
// magnitude below the peak cannot move the double-precision total, so their
// O(n) covariance scans are skipped; lag 0 is always evaluated.
inline double weighted_autocov_sum(const std::vector<double>& dev, const std::vector<double>& a) {
    const std::size_t n = dev.size();
    if (a.size() != n)
        throw std::invalid_argument("weighted_autocov_sum: weight count must equal series length");
    double peak = 0.0;
    for (double w : a)
        peak = std::max(peak, std::abs(w));
    const double cutoff = negligible_weight_ratio * peak;
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0 && std::abs(a[k]) <= cutoff)
            continue;
        sum += a[k] * autocov(dev, k);
    }
    return sum;
}

// Full lag-weight vectors in the convention T = sum_{k=0}^{n-1} a_k r_hat(k)
// with a_0 = 1 and the factor 2 for the positive lags folded into a_k.

inline std::vector<double> sb_weights(std::size_t n, const BlockSpec& spec) {
    std::vector<double> a(n, 0.0);
    a[0] = 1.0;
    for (std::size_t k = 1; k < n; ++k)
        a[k] = 2.0 * sb_weight(k, n, spec);
    return a;
}

// v(k) = sum_{t=1}^{ell-k} w(t/ell) w((t+k)/ell); zero for k >= ell.
inline double taper_autocorr(const TaperWindow& taper, std::size_t ell, std::size_t k) {
    if (ell == 0)
        throw std::invalid_argument("taper_autocorr: ell must be positive");
    if (k >= ell)
        return 0.0;
    const double scale = static_cast<double>(ell);
    double sum = 0.0;
    for (std::size_t t = 1; t + k <= ell; ++t) {
        const double w1 = taper.shape(static_cast<double>(t) / scale);
        const double w2 = taper.shape(static_cast<double>(t + k) / scale);
        if (!std::isfinite(w1) || !std::isfinite(w2) ||
            w1 < 0.0 || w1 > 1.0 || w2 < 0.0 || w2 > 1.0)
            throw std::invalid_argument("taper window values must lie in [0, 1]");
        sum += w1 * w2;
    }
    return sum;
}

inline std::vector<double> taper_weights(std::size_t n, std::size_t ell, const TaperWindow& taper) {
    std::vector<double> a(n, 0.0);
    a[0] = 1.0;
    const double v0 = taper_autocorr(taper, ell, 0);
    if (!(v0 > 0.0))
        throw std::invalid_argument("taper window '" + taper.name +
                                    "' is degenerate at this block length (v(0) = 0)");
    for (std::size_t k = 1; k < ell && k < n; ++k)
        a[k] = 2.0 * taper_autocorr(taper, ell, k) / v0;
    return a;
}

inline std::vector<double> mbb_weights(std::size_t n, std::size_t ell) {
    return taper_weights(n, ell, TaperWindow::rectangular());
}

// Wrapped-block weights act on ordinary autocovariances through the identity
// r_cir(k) = r_hat(k) + r_hat(n - k), so each triangular weight lands on both
// lag k and its mirror lag n - k (accumulated: the two ranges can overlap
// when ell - 1 >= n/2).
inline std::vector<double> cbb_weights(std::size_t n, std::size_t ell) {
    std::vector<double> a(n, 0.0);
    a[0] = 1.0;
    const double scale = static_cast<double>(ell);
    for (std::size_t k = 1; k < ell; ++k) {
        const double w = 2.0 * (static_cast<double>(ell - k) / scale);
        a[k] += w;
        a[n - k] += w;
    }
    return a;
}

}  // namespace detail

// Stationary-scheme estimate in closed form:
//   r_hat(0) + 2 sum_{k=1}^{n-1} sb_weight(k) r_hat(k).
inline double sb_estimate(const TimeSeries& series, const BlockSpec& spec) {
    detail::require_n2(series);
    detail::require_sb_spec(spec);
    return detail::weighted_autocov_sum(detail::centered(series),
                                        detail::sb_weights(series.n(), spec));
}

// Nonoverlapping scheme: (ell/b) sum_{i=1}^{b} (block mean_i - grand mean)^2
// over the b = floor(n/ell) complete disjoint blocks; the tail remainder of
// the series is discarded.
inline double nbb_estimate(const TimeSeries& series, const BlockSpec& spec) {
    detail::require_n2(series);
    const std::size_t n = series.n();
    const std::size_t ell = detail::require_fixed_ell(spec, n);
    const std::size_t b = n / ell;
    std::vector<double> block_mean(b);
    for (std::size_t i = 0; i < b; ++i) {
        double s = 0.0;
        for (std::size_t t = i * ell; t < (i + 1) * ell; ++t)
            s += series[t];
        block_mean[i] = s / static_cast<double>(ell);
    }
    double grand = 0.0;
    for (double v : block_mean)
        grand += v;
    grand /= static_cast<double>(b);
    double ss = 0.0;
    for (double v : block_mean)
        ss += (v - grand) * (v - grand);
    return (static_cast<double>(ell) / static_cast<double>(b)) * ss;
}

// Moving (overlapping) scheme, as the rectangular member of the tapered
// family: weights 2 (1 - k/ell) on ordinary autocovariances.
inline double tbb_estimate(const TimeSeries& series, const BlockSpec& spec,
                           const TaperWindow& taper) {
    detail::require_n2(series);
    const std::size_t ell = detail::require_fixed_ell(spec, series.n());
    return detail::weighted_autocov_sum(detail::centered(series),
                                        detail::taper_weights(series.n(), ell, taper));
}

inline double mbb_estimate(const TimeSeries& series, const BlockSpec& spec) {
    return tbb_estimate(series, spec, TaperWindow::rectangular());
}

// Circular scheme in closed form on the periodic extension:
//   r_cir(0) + 2 sum_{k=1}^{ell-1} (1 - k/ell) r_cir(k).
inline double cbb_estimate(const TimeSeries& series, const BlockSpec& spec) {
    detail::require_n2(series);
    const std::size_t ell = detail::require_fixed_ell(spec, series.n());
    const auto dev = detail::centered(series);
    const double scale = static_cast<double>(ell);
    double sum = detail::circular_autocov(dev, 0);
    for (std::size_t k = 1; k < ell; ++k)
        sum += 2.0 * (static_cast<double>(ell - k) / scale) * detail::circular_autocov(dev, k);
    return sum;
}

inline double estimate(const TimeSeries& series, Method method, const BlockSpec& spec,
                       const TaperWindow* taper = nullptr) {
    switch (method) {
        case Method::sb: return sb_estimate(series, spec);
        case Method::nbb: return nbb_estimate(series, spec);
        case Method::mbb: return mbb_estimate(series, spec);
        case Method::cbb: return cbb_estimate(series, spec);
        case Method::tbb:
            return tbb_estimate(series, spec, taper ? *taper : TaperWindow::trapezoid());
    }
    throw std::invalid_argument("estimate: unknown method");
}

// One stationary-scheme resample of the same length as the input. Per block:
// first a start index uniform on {0..n-1}, then a geometric length with mean
// ell; the series wraps circularly and the final block is truncated to fit.
inline TimeSeries sb_resample(const TimeSeries& series, const BlockSpec& spec, Rng& rng) {
    detail::require_sb_spec(spec);
    const std::size_t n = series.n();
    const double p = 1.0 / spec.ell;
    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const std::size_t start = static_cast<std::size_t>(rng.next_below(n));
        const std::uint64_t len = rng.next_geometric(p);
        for (std::uint64_t j = 0; j < len && out.size() < n; ++j)
            out.push_back(series[(start + j) % n]);
    }
    return TimeSeries(std::move(out));
}

inline TimeSeries sb_resample(const TimeSeries& series, const BlockSpec& spec,
                              std::uint64_t seed) {
    Rng rng(seed);
    return sb_resample(series, spec, rng);
}

// One fixed-block resample. NBB draws b = floor(n/ell) indices uniformly
// from the disjoint blocks (resample length b*ell); MBB draws b starts
// uniformly from {0..n-ell} (length b*ell); CBB draws ceil(n/ell) wrapped
// starts from {0..n-1} and truncates to length n.
inline TimeSeries block_resample(const TimeSeries& series, Method method,
                                 const BlockSpec& spec, Rng& rng) {
    const std::size_t n = series.n();
    const std::size_t ell = detail::require_fixed_ell(spec, n);
    std::vector<double> out;
    switch (method) {
        case Method::nbb: {
            const std::size_t b = n / ell;
            out.reserve(b * ell);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t j = static_cast<std::size_t>(rng.next_below(b));
                for (std::size_t t = j * ell; t < (j + 1) * ell; ++t)
                    out.push_back(series[t]);
            }
            break;
        }
        case Method::mbb: {
            const std::size_t b = n / ell;
            out.reserve(b * ell);
            for (std::size_t i = 0; i < b; ++i) {
                const std::size_t start = static_cast<std::size_t>(rng.next_below(n - ell + 1));
                for (std::size_t t = start; t < start + ell; ++t)
                    out.push_back(series[t]);
            }
            break;
        }
        case Method::cbb: {
            const std::size_t blocks = (n + ell - 1) / ell;
            out.reserve(blocks * ell);
            for (std::size_t i = 0; i < blocks; ++i) {
                const std::size_t start = static_cast<std::size_t>(rng.next_below(n));
                for (std::size_t j = 0; j < ell && out.size() < n; ++j)
                    out.push_back(series[(start + j) % n]);
            }
            break;
        }
        default:
            throw std::invalid_argument(
                "block_resample: only nbb, mbb, cbb draw fixed blocks (use sb_resample "
                "for the stationary scheme)");
    }
    return TimeSeries(std::move(out));
}

inline TimeSeries block_resample(const TimeSeries& series, Method method,
                                 const BlockSpec& spec, std::uint64_t seed) {
    Rng rng(seed);
    return block_resample(series, method, spec, rng);
}

// Monte Carlo evaluation of the bootstrap variance the closed forms compute
// analytically: len * Var*(resample mean | series) over `reps` independent
// resamples (population variance, divisor reps). Replication r draws from
// substream (seed, r), so results do not depend on evaluation order.
inline double conditional_variance_mc(const TimeSeries& series, Method method,
                                      const BlockSpec& spec, std::size_t reps,
                                      std::uint64_t seed) {
    if (method == Method::tbb)
        throw std::invalid_argument(
            "conditional_variance_mc: the tapered scheme has no block-sampling form here");
    if (reps < 2)
        throw std::invalid_argument("conditional_variance_mc: need reps >= 2");
    std::vector<double> means(reps);
    std::size_t resample_len = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        Rng rng(seed, r);
        const TimeSeries rs = (method == Method::sb)
                                  ? sb_resample(series, spec, rng)
                                  : block_resample(series, method, spec, rng);
        resample_len = rs.n();
        means[r] = sample_mean(rs);
    }
    double mean = 0.0;
    for (double v : means)
        mean += v;
    mean /= static_cast<double>(reps);
    double ss = 0.0;
    for (double v : means)
        ss += (v - mean) * (v - mean);
    return static_cast<double>(resample_len) * ss / static_cast<double>(reps);
}

}  // namespace blockboot
