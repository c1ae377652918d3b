// Deterministic 64-bit RNG for Monte Carlo runs.
//
// splitmix64 core: counter-based, cheap, and identical on every platform.
// Replica streams are derived from a base seed through a fixed public
// mixing function so that per-replica output is reproducible regardless
// of scheduling (see replica_seed below).

#ifndef CBP_RNG_HPP
#define CBP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace cbp {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// One-shot avalanche of a 64-bit value (the splitmix64 output function).
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stream seed for replica r of a run with base seed s.  Public contract:
// identical (s, r) always yields identical streams, on any machine.
inline std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t replica) {
    return mix64(base_seed + 0x9e3779b97f4a7c15ULL * (replica + 1));
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed), spare_(0.0), has_spare_(false) {}

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform in (0, 1]; never returns 0, safe under log().
    double uniform01() {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return 1.0 - u;
    }

    // Standard normal via Box-Muller; the second variate of each pair is
    // cached, so values depend only on the call sequence.
    double gauss() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 6.283185307179586476925286766559 * u2;
        spare_ = rad * std::sin(ang);
        has_spare_ = true;
        return rad * std::cos(ang);
    }

private:
    std::uint64_t state_;
    double spare_;
    bool has_spare_;
};

} // namespace cbp

#endif // CBP_RNG_HPP
