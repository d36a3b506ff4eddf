#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blockboot {

// Ordered real-valued sample X_1, ..., X_n. Immutable after construction;
// every value must be finite.
class TimeSeries {
public:
    explicit TimeSeries(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty())
            throw std::invalid_argument("TimeSeries: series must be non-empty");
        for (double v : values_)
            if (!std::isfinite(v))
                throw std::invalid_argument("TimeSeries: series contains a non-finite value");
    }

    std::size_t n() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t t) const noexcept { return values_[t]; }

private:
    std::vector<double> values_;
};

inline double sample_mean(const TimeSeries& series) {
    double sum = 0.0;
    for (double v : series.values())
        sum += v;
    return sum / static_cast<double>(series.n());
}

namespace detail {

// Deviations from the sample mean, computed once and shared by the lag
// loops of every estimator.
inline std::vector<double> centered(const TimeSeries& series) {
    const double mean = sample_mean(series);
    std::vector<double> dev(series.n());
    for (std::size_t t = 0; t < dev.size(); ++t)
        dev[t] = series[t] - mean;
    return dev;
}

inline double autocov(const std::vector<double>& dev, std::size_t k) {
    const std::size_t n = dev.size();
    double sum = 0.0;
    for (std::size_t t = 0; t + k < n; ++t)
        sum += dev[t] * dev[t + k];
    return sum / static_cast<double>(n);
}

inline double circular_autocov(const std::vector<double>& dev, std::size_t k) {
    const std::size_t n = dev.size();
    double sum = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        std::size_t s = t + k;
        if (s >= n)
            s -= n;
        sum += dev[t] * dev[s];
    }
    return sum / static_cast<double>(n);
}

inline void check_lag(std::size_t k, std::size_t n) {
    if (n < 2)
        throw std::invalid_argument("autocovariance requires a series of length >= 2");
    if (k >= n)
        throw std::out_of_range("autocovariance lag must satisfy 0 <= k < n");
}

// Shortest-possible decimal that round-trips to the same double.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace detail

// Mean-corrected sample autocovariance with divisor n:
//   (1/n) * sum_{t=1}^{n-k} (X_t - mean)(X_{t+k} - mean).
inline double sample_autocov(const TimeSeries& series, std::size_t k) {
    detail::check_lag(k, series.n());
    return detail::autocov(detail::centered(series), k);
}

// Autocovariance of the periodic extension of the sample: indices wrap
// modulo n, so every lag averages exactly n products.
inline double circular_autocov(const TimeSeries& series, std::size_t k) {
    detail::check_lag(k, series.n());
    return detail::circular_autocov(detail::centered(series), k);
}

// Series file format: one decimal value per line; blank lines and lines whose
// first non-space character is '#' are skipped.
inline TimeSeries read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("read_series: cannot open '" + path + "'");
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t pos = line.find_first_not_of(" \t\r");
        if (pos == std::string::npos || line[pos] == '#')
            continue;
        const char* begin = line.c_str() + pos;
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end == begin)
            throw std::invalid_argument("read_series: " + path + ":" +
                                        std::to_string(lineno) + ": not a number");
        while (*end == ' ' || *end == '\t' || *end == '\r')
            ++end;
        if (*end != '\0')
            throw std::invalid_argument("read_series: " + path + ":" +
                                        std::to_string(lineno) + ": trailing junk after value");
        if (!std::isfinite(v))
            throw std::invalid_argument("read_series: " + path + ":" +
                                        std::to_string(lineno) + ": non-finite value");
        values.push_back(v);
    }
    if (values.empty())
        throw std::invalid_argument("read_series: '" + path + "' contains no values");
    return TimeSeries(std::move(values));
}

inline void write_series(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::invalid_argument("write_series: cannot open '" + path + "' for writing");
    for (double v : series.values())
        out << detail::format_double(v) << '\n';
    if (!out)
        throw std::invalid_argument("write_series: write to '" + path + "' failed");
}

}  // namespace blockboot
