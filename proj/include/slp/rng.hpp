#pragma once

#include <cstdint>
#include <random>

namespace slp {

// splitmix64 step; used to derive well-separated seeds from small integers.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic stream seed for the cell (base_seed, n, rep). Distinct cells
// get independent streams regardless of scheduling order.
inline std::uint64_t cell_seed(std::uint64_t base_seed, std::uint64_t n,
                               std::uint64_t rep) {
    return mix64(mix64(mix64(base_seed) ^ n) ^ (rep * 0x9e3779b97f4a7c15ULL + 1));
}

// Seeded generator with explicit variate mappings. std::mt19937_64 is fully
// specified by the standard; the uniform/normal/gamma mappings are our own,
// so identical seeds give identical streams on any conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller, one spare cached per pair.
    double normal();

    // Gamma(shape, 1) via the Marsaglia-Tsang squeeze sampler; shapes below 1
    // use the boost Gamma(shape + 1) * U^(1/shape) identity.
    double gamma(double shape);

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace slp
