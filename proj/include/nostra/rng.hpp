#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace nostra::rng {

/// splitmix64 finalizer; bijective on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derive a stream seed from a parent seed and one counter key.
/// Distinct key paths give statistically independent streams, so components
/// that consume randomness never share state (and can be skipped or run in
/// parallel without perturbing each other).
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t key) {
    return mix64(mix64(seed) ^ (key * 0xd1b54a32d192ed03ull + 0x8cb92ba72f3d8dd7ull));
}

template <class... Keys>
inline std::uint64_t derive(std::uint64_t seed, std::uint64_t key, Keys... rest) {
    return derive(derive(seed, key), rest...);
}

/// xoshiro256++ with splitmix64 seeding and a Box-Muller normal path.
/// Self-contained so that every draw is bit-reproducible across platforms,
/// which std::normal_distribution does not guarantee.
class Engine {
public:
    explicit Engine(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) {
            s = mix64(s);
            w = s;
        }
        // xoshiro must not start from the all-zero state
        if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[3] = 0x9e3779b97f4a7c15ull;
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); rejection sampled.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r >= limit);
        return r % n;
    }

    /// Standard normal draw (Box-Muller, pairs cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * M_PI * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    /// In-place Fisher-Yates shuffle.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Stream labels used when deriving per-purpose sub-seeds. Keeping every
/// consumer on its own labelled stream is what makes configurations that skip
/// a stage (e.g. no clustering) reproduce the same downstream draws.
enum StreamTag : std::uint64_t {
    kInitDesign = 1,
    kIteration = 2,
    kFit = 3,
    kPool = 4,
    kProbability = 5,
    kKMeans = 6,
    kEhvi = 7,
    kTieBreak = 8,
    kObservation = 9,
    kCell = 10,
    kRestart = 11,
    kRealization = 12,
};

}  // namespace nostra::rng
