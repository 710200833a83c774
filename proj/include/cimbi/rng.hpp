#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace cimbi::rng {

// Philox4x32-10 counter-based generator. Every variate is a pure function of
// (seed, path_id, channel, draw index), so batches replay bit-identically for
// any scheduling of paths across threads.

struct PhiloxBlock {
    std::uint32_t w[4];
};

inline PhiloxBlock philox4x32_10(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2, std::uint32_t c3,
                                 std::uint32_t k0, std::uint32_t k1) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t p0 = static_cast<std::uint64_t>(M0) * c0;
        std::uint64_t p2 = static_cast<std::uint64_t>(M1) * c2;
        std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        std::uint32_t hi2 = static_cast<std::uint32_t>(p2 >> 32), lo2 = static_cast<std::uint32_t>(p2);
        std::uint32_t n0 = hi2 ^ c1 ^ k0;
        std::uint32_t n1 = lo2;
        std::uint32_t n2 = hi0 ^ c3 ^ k1;
        std::uint32_t n3 = lo0;
        c0 = n0;
        c1 = n1;
        c2 = n2;
        c3 = n3;
        k0 += W0;
        k1 += W1;
    }
    return {{c0, c1, c2, c3}};
}

enum class Channel : std::uint32_t { Gaussian = 0, Exponential = 1, Uniform = 2, AtomSelect = 3 };

inline double to_unit(std::uint64_t x) {  // [0,1)
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

inline double to_unit_open(std::uint64_t x) {  // (0,1]
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t path_id) : seed_(seed), path_(path_id) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t path_id() const { return path_; }

    // 64-bit word #k of a channel's stream.
    std::uint64_t word(Channel ch, std::uint64_t k) const {
        std::uint64_t block = k >> 1;
        auto b = philox4x32_10(static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
                               static_cast<std::uint32_t>(path_),
                               static_cast<std::uint32_t>(path_ >> 32) ^ (static_cast<std::uint32_t>(ch) << 28),
                               static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32));
        if ((k & 1) == 0) return (static_cast<std::uint64_t>(b.w[1]) << 32) | b.w[0];
        return (static_cast<std::uint64_t>(b.w[3]) << 32) | b.w[2];
    }

    double normal() {
        std::uint64_t k = cnt_[0]++;
        std::uint64_t pair = k & ~1ull;
        double u1 = to_unit_open(word(Channel::Gaussian, pair));
        double u2 = to_unit(word(Channel::Gaussian, pair + 1));
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        return (k & 1) == 0 ? r * std::cos(a) : r * std::sin(a);
    }

    double exponential() { return -std::log(to_unit_open(word(Channel::Exponential, cnt_[1]++))); }

    double uniform() { return to_unit(word(Channel::Uniform, cnt_[2]++)); }

    double atom_uniform() { return to_unit(word(Channel::AtomSelect, cnt_[3]++)); }

    // Poisson count with mean lambda. Uses CDF inversion for small means and
    // exponential spacings otherwise.
    std::uint64_t poisson(double lambda) {
        if (!(lambda > 0.0)) return 0;
        if (lambda <= 30.0) {
            double u = uniform();
            double p = std::exp(-lambda);
            double cdf = p;
            std::uint64_t k = 0;
            while (u > cdf && k < 1000000) {
                ++k;
                p *= lambda / static_cast<double>(k);
                cdf += p;
            }
            return k;
        }
        double sum = 0.0;
        std::uint64_t k = 0;
        for (;;) {
            sum += exponential();
            if (sum > lambda) return k;
            ++k;
        }
    }

private:
    std::uint64_t seed_;
    std::uint64_t path_;
    std::array<std::uint64_t, 4> cnt_{0, 0, 0, 0};
};

}  // namespace cimbi::rng
