#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <stdexcept>
#include <vector>

namespace rkpod {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Child seed for a named substream. Every parallel unit of work (restart,
// replication, tuning arm, ...) derives its own stream from the master seed
// and its indices, so results do not depend on scheduling or worker count.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> ids) {
    std::uint64_t s = master;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t id : ids) {
        s ^= splitmix64(s) + id + 0x9e3779b97f4a7c15ULL;
        out = splitmix64(s);
    }
    return out;
}

// Deterministic generator with explicitly specified transforms. mt19937_64 has
// a standard-mandated sequence and the uniform/normal maps below are spelled
// out here, so streams are reproducible bit-for-bit across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next() { return gen_(); }

    // [0, 1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // (0, 1]
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    // Box-Muller, two uniforms per draw.
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    // [0, n)
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        return static_cast<int>((static_cast<unsigned __int128>(next()) * static_cast<unsigned __int128>(n)) >> 64);
    }

    // Index drawn proportional to nonnegative weights; requires a positive total.
    int sample_weighted(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) {
            if (w < 0.0) throw std::invalid_argument("sample_weighted: negative weight");
            total += w;
        }
        if (total <= 0.0) throw std::invalid_argument("sample_weighted: total weight must be positive");
        double r = uniform() * total;
        double cum = 0.0;
        int last = -1;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] == 0.0) continue;
            cum += weights[i];
            last = static_cast<int>(i);
            if (r < cum) return last;
        }
        return last;  // guard against rounding at the top edge
    }

    // k distinct indices from [0, n), order of draw preserved.
    std::vector<int> sample_without_replacement(int n, int k) {
        if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        std::vector<int> out;
        out.reserve(k);
        for (int j = 0; j < k; ++j) {
            int idx = j + uniform_int(n - j);
            std::swap(pool[j], pool[idx]);
            out.push_back(pool[j]);
        }
        return out;
    }

    // Random permutation of [0, n) by Fisher-Yates.
    std::vector<int> permutation(int n) {
        std::vector<int> out(n);
        for (int i = 0; i < n; ++i) out[i] = i;
        for (int i = n - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(out[i], out[j]);
        }
        return out;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace rkpod
