#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace drljrm {

// mt19937_64 engine with hand-rolled transforms so draws are identical across
// standard library implementations (std::*_distribution is not portable).
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t raw() { return eng_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * (1.0 / 9007199254740992.0); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Rejection sampling for an unbiased draw.
    uint64_t below(uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via Box-Muller; caches the second deviate.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double th = 2.0 * M_PI * u2;
        spare_ = r * std::sin(th);
        have_spare_ = true;
        return r * std::cos(th);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Derives independent sub-seeds from a master seed so each consumer (scenario,
// init, exploration, replay, ...) gets its own stream. SplitMix64 step.
inline uint64_t derive_seed(uint64_t master, uint64_t purpose) {
    uint64_t z = master + 0x9E3779B97F4A7C15ULL * (purpose + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Purpose tags for derive_seed.
enum SeedPurpose : uint64_t {
    kSeedScenario = 1,
    kSeedInitSA = 2,
    kSeedInitPA = 3,
    kSeedExploreSA = 4,
    kSeedExplorePA = 5,
    kSeedReplaySA = 6,
    kSeedReplayPA = 7,
    kSeedBaseline = 8,
    kSeedEval = 9,
};

}  // namespace drljrm
