#pragma once

#include <cstdint>
#include <random>

namespace driftwatch {

/// Seeded generator producing platform-independent uniform and normal draws.
///
/// std::mt19937_64 is fully specified by the standard, but the standard
/// distributions are not, so normals are produced here by Box-Muller on
/// 53-bit uniforms to keep seeded output identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform on (0, 1].
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Seed of replicate `index` under `master`; a splitmix64 mix of both, so
/// replicate streams do not depend on execution order or worker count.
std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index);

std::uint64_t entropy_seed();

}  // namespace driftwatch
