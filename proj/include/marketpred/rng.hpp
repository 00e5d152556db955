#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "marketpred/rational.hpp"

namespace mkt {

/// All randomness in the library flows through this generator; it wraps
/// std::mt19937_64 (whose output sequence is fixed by the standard) and
/// supplies the few sampling primitives we need without going through
/// the unspecified std distributions, so a seed pins outputs exactly.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    bool next_bit() { return (gen_() & 1u) != 0; }

    /// Uniform in [0, n) by rejection; n > 0.
    std::uint64_t below(std::uint64_t n) {
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do { v = gen_(); } while (v >= limit);
        return v % n;
    }

    /// Uniform cpp_int in [0, n), built from 64-bit chunks with rejection.
    Int below_big(const Int& n) {
        if (n <= Int(UINT64_MAX)) return Int(below(n.convert_to<std::uint64_t>()));
        unsigned bits = boost::multiprecision::msb(n) + 1;
        unsigned words = (bits + 63) / 64;
        for (;;) {
            Int v = 0;
            for (unsigned i = 0; i < words; ++i) v = (v << 64) | Int(gen_());
            v >>= words * 64 - bits;
            if (v < n) return v;
        }
    }

    /// Uniform double in (0, 1] with 53-bit resolution.
    double next_unit() {
        return ((gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (pairs cached).
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_unit(), u2 = next_unit();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace mkt
