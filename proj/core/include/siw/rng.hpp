#ifndef SIW_RNG_HPP
#define SIW_RNG_HPP

#include <cstdint>

namespace siw {

// splitmix64 stream; used instead of <random> distributions so that seeded
// runs produce identical numbers on every platform (reports are compared
// byte-for-byte).
class Rng {
public:
    explicit Rng(uint64_t seed = 0x9e3779b97f4a7c15ull) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform magnitude in [lo, hi], random sign
    double signed_uniform(double lo, double hi) {
        double m = uniform(lo, hi);
        return (next_u64() & 1) ? m : -m;
    }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + int(next_u64() % uint64_t(hi - lo + 1));
    }

private:
    uint64_t state_;
};

}  // namespace siw

#endif
