#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace elab {

using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

// Error taxonomy mirrored by the CLI exit codes.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct cap_exceeded : std::runtime_error {
    explicit cap_exceeded(const std::string& what) : std::runtime_error(what) {}
};

// A property the underlying theory guarantees failed to hold.
struct invariant_violation : std::runtime_error {
    explicit invariant_violation(const std::string& what) : std::runtime_error(what) {}
};

struct domain_error : std::runtime_error {
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

inline u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>((u128(a) * b) % m); }

inline u64 addmod(u64 a, u64 b, u64 m) {
    u64 s = a + b;  // a, b < m <= 2^62, no wrap
    return s >= m ? s - m : s;
}

inline u64 submod(u64 a, u64 b, u64 m) { return a >= b ? a - b : a + (m - b); }

inline u64 powmod(u64 base, u64 e, u64 m) {
    u64 r = 1 % m;
    base %= m;
    while (e) {
        if (e & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        e >>= 1;
    }
    return r;
}

u64 gcd_u64(u64 a, u64 b);

// Inverse of a mod m for gcd(a, m) = 1; throws domain_error otherwise.
u64 invmod(u64 a, u64 m);

u64 checked_mul(u64 a, u64 b);  // throws cap_exceeded on overflow
u64 checked_pow(u64 base, u32 e);

// Deterministic, platform-independent RNG (splitmix64 core).
class Rng {
  public:
    explicit Rng(u64 seed) : state_(seed) {}

    u64 next_u64() {
        u64 z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n), rejection sampled.
    u64 below(u64 n) {
        if (n == 0) throw std::logic_error("Rng::below(0)");
        u64 lim = ~u64(0) - ~u64(0) % n;
        u64 v;
        do { v = next_u64(); } while (v >= lim);
        return v % n;
    }

    double unit() { return double(next_u64() >> 11) * 0x1.0p-53; }

  private:
    u64 state_;
};

u64 fnv1a(const std::string& s);

// Child seed for a named subexperiment; one master seed reproduces a bundle.
inline u64 derive_seed(u64 seed, const std::string& tag) {
    Rng r(seed ^ fnv1a(tag));
    return r.next_u64();
}

}  // namespace elab
