#ifndef DYNMIX_RNG_HPP
#define DYNMIX_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace dynmix {

/// Seeded random source used everywhere randomness is needed. Call order is
/// part of every caller's determinism contract.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double normal() { return normal_(engine_); }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01_(engine_);
    }

    /// Uniform index in [0, n), rejection-sampled so the draw sequence does
    /// not depend on the standard library's distribution internals.
    std::size_t index(std::size_t n) {
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
        std::uint64_t draw;
        do {
            draw = engine_();
        } while (draw >= limit);
        return static_cast<std::size_t>(draw % span);
    }

    /// Fisher-Yates shuffle driven by index().
    template <typename T>
    void shuffle(std::vector<T>& values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform01_{0.0, 1.0};
};

}  // namespace dynmix

#endif
