#pragma once

#include <cstdint>
#include <vector>

namespace nodseg {

// splitmix64: tiny, well-mixed generator. Kept self-contained so shuffles,
// weight init and per-sample augmentation streams are reproducible across
// platforms and standard-library versions.
struct Rng {
    uint64_t state = 0x9e3779b97f4a7c15ull;

    explicit Rng(uint64_t seed = 0) : state(seed + 0x9e3779b97f4a7c15ull) {}

    uint64_t next_u64() {
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53 random bits
    double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [0, n), unbiased via rejection
    uint64_t next_below(uint64_t n) {
        if (n <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // uniform in [lo, hi)
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    bool next_bool(double p) { return next_double() < p; }
};

// Mixes independent stream keys (e.g. seed/epoch/sample) into one rng state.
inline uint64_t mix_seed(uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    Rng r(a);
    uint64_t h = r.next_u64();
    h ^= b + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    Rng r2(h);
    h = r2.next_u64();
    h ^= c + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    return Rng(h).next_u64();
}

// Fisher-Yates; deterministic given rng state, unlike std::shuffle.
template <class T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = size_t(rng.next_below(i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace nodseg
