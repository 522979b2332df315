#pragma once

#include <cstdint>
#include <stdexcept>

namespace tvf {

// splitmix64 generator. Self-contained so that streams are reproducible
// across standard libraries and platforms (std distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30u)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27u)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31u);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11u) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        if (lo > hi) {
            throw std::runtime_error("rng.uniform: expected lo <= hi");
        }
        return lo + (hi - lo) * uniform();
    }

    // uniform in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        if (n == 0) {
            throw std::runtime_error("rng.uniform_int: expected n > 0");
        }
        return next_u64() % n;
    }

    // independent child stream, for per-component seeding
    Rng fork(std::uint64_t salt) {
        return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ull));
    }

private:
    std::uint64_t state_;
};

}  // namespace tvf
