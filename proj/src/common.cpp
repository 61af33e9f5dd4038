#include "elab/common.hpp"

namespace elab {

u64 gcd_u64(u64 a, u64 b) {
    while (b) {
        u64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

u64 invmod(u64 a, u64 m) {
    // extended Euclid on signed 128-bit to dodge sign headaches
    i128 t = 0, new_t = 1;
    i128 r = i128(m), new_r = i128(a % m);
    while (new_r != 0) {
        i128 q = r / new_r;
        i128 tmp = t - q * new_t;
        t = new_t;
        new_t = tmp;
        tmp = r - q * new_r;
        r = new_r;
        new_r = tmp;
    }
    if (r != 1) throw domain_error("invmod: element not invertible");
    if (t < 0) t += m;
    return u64(t);
}

u64 checked_mul(u64 a, u64 b) {
    u128 p = u128(a) * b;
    if (p > ~u64(0)) throw cap_exceeded("integer product exceeds 64 bits");
    return u64(p);
}

u64 checked_pow(u64 base, u32 e) {
    u64 r = 1;
    for (u32 i = 0; i < e; ++i) r = checked_mul(r, base);
    return r;
}

u64 fnv1a(const std::string& s) {
    u64 h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace elab
