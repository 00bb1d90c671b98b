#pragma once

#include <cstdint>
#include <random>

namespace headlead {

/// Seeded generator used by the simulator. Gaussian draws go through
/// Box-Muller on top of std::mt19937_64 rather than std::normal_distribution,
/// whose algorithm is implementation-defined; this keeps generated datasets
/// reproducible across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal draw (Box-Muller, cached spare).
    double gauss();

    double gauss(double mean, double std) { return mean + std * gauss(); }

    /// Derive an independent stream seed from a base seed and two indices
    /// (splitmix64 over the mixed words). Used to give every simulated
    /// track its own generator.
    static uint64_t derive_seed(uint64_t base, uint64_t a, uint64_t b);

private:
    std::mt19937_64 gen_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace headlead
