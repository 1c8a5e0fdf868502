#pragma once

#include <cstdint>
#include <random>

namespace regproj {

/// mt19937_64 with fixed conversions, so draws do not depend on the standard
/// library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    /// Seeds from (seed, stream) through std::seed_seq.
    Rng(std::uint64_t seed, std::uint64_t stream);

    /// Uniform on [0, 1): the top 53 bits times 2^-53.
    double uniform();
    /// Standard normal by the Marsaglia polar method (second variate cached).
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace regproj
