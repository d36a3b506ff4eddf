#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace blockboot {

// Counter-based pseudorandom generator with cheap, independent substreams.
// The state is a pure function of (master_seed, stream), so replication r of
// experiment cell i can be seeded as Rng(master, i * R + r) and produces the
// same draws no matter which thread runs it or in what order.
//
// The core step is the SplitMix64 mixer: a Weyl sequence with increment
// 2^64/phi, passed through an avalanching finalizer. Period 2^64 per stream.
class Rng {
public:
    explicit Rng(std::uint64_t master_seed, std::uint64_t stream = 0) noexcept
        : state_(derive(master_seed, stream)) {}

    std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return finalize(state_);
    }

    // Uniform on [0, 1) with 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform on {0, 1, ..., bound - 1} via 128-bit multiply-shift.
    // The modulo bias of the multiply map is < bound / 2^64, far below the
    // Monte Carlo noise floor of any use in this project.
    std::uint64_t next_below(std::uint64_t bound) {
        if (bound == 0)
            throw std::invalid_argument("Rng::next_below: bound must be positive");
        const unsigned __int128 wide =
            static_cast<unsigned __int128>(next_u64()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    // Standard normal via Box-Muller; the second coordinate is cached.
    double next_gaussian() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        // 1 - U keeps the argument of log strictly positive.
        const double u1 = 1.0 - next_double();
        const double u2 = next_double();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    // Geometric number of trials until first success, support {1, 2, ...},
    // mean 1/p. Inverse-CDF so exactly one uniform is consumed per draw.
    std::uint64_t next_geometric(double p) {
        if (!(p > 0.0) || !(p <= 1.0))
            throw std::invalid_argument("Rng::next_geometric: p must lie in (0, 1]");
        if (p == 1.0)
            return 1;
        const double u = next_double();
        const double draws = std::ceil(std::log1p(-u) / std::log1p(-p));
        if (draws < 1.0)
            return 1;
        return static_cast<std::uint64_t>(draws);
    }

private:
    static std::uint64_t finalize(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive(std::uint64_t master, std::uint64_t stream) noexcept {
        std::uint64_t z = finalize(master + 0x9E3779B97F4A7C15ULL * (stream + 1));
        return finalize(z ^ 0xD6E8FEB86659FD93ULL);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace blockboot
