#pragma once

// Seeded hash families. Every randomized choice is drawn from a counter-based
// stream keyed by an explicit 64-bit seed, so equal seeds give equal functions.
// Moduli are kept below 2^62 and products go through 128-bit intermediates.

#include <cstdint>
#include <string_view>
#include <vector>

#include "mdt/error.hpp"

namespace mdt {

inline constexpr std::uint64_t modulus_limit = 1ULL << 62;

inline std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}
inline std::uint64_t addmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    std::uint64_t s = a + b;
    return s >= m ? s - m : s;
}
inline std::uint64_t submod(std::uint64_t a, std::uint64_t b, std::uint64_t m) { return a >= b ? a - b : a + m - b; }
std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m);
// Inverse modulo a prime by Fermat: a^(q-2).
std::uint64_t invmod_prime(std::uint64_t a, std::uint64_t q);

// Deterministic Miller-Rabin for all 64-bit inputs.
bool is_prime(std::uint64_t x);

// SplitMix64 finalizer; a bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Counter-based uniform stream: draw k returns mix64(seed-derived key + k).
class SeedStream {
public:
    explicit SeedStream(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}
    // Resumes a stream from a saved (key, counter) pair.
    static SeedStream resume(std::uint64_t key, std::uint64_t counter) {
        SeedStream s(0);
        s.key_ = key;
        s.counter_ = counter;
        return s;
    }
    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }
    std::uint64_t next() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }
    // Uniform in [0, bound) by rejection; bound >= 1.
    std::uint64_t below(std::uint64_t bound);
    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // UniformRandomBitGenerator interface for <random> distributions.
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }
    result_type operator()() { return next(); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// A prime in [lo, hi], starting the scan at a random point and wrapping once.
std::uint64_t gen_prime(std::uint64_t lo, std::uint64_t hi, SeedStream& rng);

// Smallest prime >= n^(c+2), clamped so the result stays below 2^62.
std::uint64_t collision_free_modulus(std::uint64_t n, unsigned c = 2);

// sum_i a_i x^i mod M.
class PolyHash {
public:
    PolyHash(std::vector<std::uint64_t> coeffs, std::uint64_t modulus);
    // k coefficients drawn uniformly; with nonzero_lead the top one is in [1, M).
    static PolyHash random(unsigned k, std::uint64_t modulus, std::uint64_t seed, bool nonzero_lead = false);

    std::uint64_t operator()(std::uint64_t x) const;
    std::uint64_t modulus() const { return m_; }
    unsigned degree() const { return static_cast<unsigned>(a_.size()); }
    const std::vector<std::uint64_t>& coefficients() const { return a_; }

private:
    std::vector<std::uint64_t> a_;  // a_[i] multiplies x^i
    std::uint64_t m_;
};

// ((a x + b) mod M) mod m with a != 0.
class RangeHash {
public:
    RangeHash(std::uint64_t a, std::uint64_t b, std::uint64_t modulus, std::uint64_t range);
    static RangeHash random(std::uint64_t modulus, std::uint64_t range, std::uint64_t seed);
    std::uint64_t operator()(std::uint64_t x) const;
    std::uint64_t range() const { return range_; }

private:
    std::uint64_t a_, b_, m_, range_;
};

// h(x) / M in [0, 1).
inline double unit_hash(const PolyHash& h, std::uint64_t x) {
    return static_cast<double>(h(x)) / static_cast<double>(h.modulus());
}

// Seeded 64-bit mixer standing in for a uniform hash of 64-bit keys.
class Mixer {
public:
    explicit Mixer(std::uint64_t seed = 0) : salt_(mix64(seed * 0xd1b54a32d192ed03ULL + 1)) {}
    std::uint64_t operator()(std::uint64_t x) const { return mix64(mix64(x ^ salt_) + salt_); }

private:
    std::uint64_t salt_;
};

// 64-bit key of a byte string, for feeding text tokens into key-based structures.
std::uint64_t key_of(std::string_view s, std::uint64_t seed = 0);

struct RabinFingerprint {
    std::uint64_t value = 0;  // kappa(x) in [0, q)
    std::uint64_t zpow = 1;   // z^|x| mod q
    bool operator==(const RabinFingerprint&) const = default;
};

class RabinContext {
public:
    // Precomputes z^(2^i) and z^(-2^i) for 2^i <= max_len.
    RabinContext(std::uint64_t q, std::uint64_t z, std::uint64_t max_len);
    // q prime in [m^3, 2 m^3) (raised to at least 256, clamped below 2^62), z uniform in [1, q).
    static RabinContext for_stream(std::uint64_t m_max, std::uint64_t max_len, std::uint64_t seed);

    std::uint64_t q() const { return q_; }
    std::uint64_t z() const { return z_; }
    std::uint64_t pow2(unsigned i) const { return pow2_.at(i); }
    std::uint64_t inv_pow2(unsigned i) const { return inv_pow2_.at(i); }
    unsigned levels() const { return static_cast<unsigned>(pow2_.size()); }
    std::uint64_t zpow(std::uint64_t e) const { return powmod(z_, e, q_); }

    RabinFingerprint of(std::string_view s) const;
    RabinFingerprint append(RabinFingerprint f, std::uint8_t c) const {
        return {addmod(mulmod(f.value, z_, q_), c % q_, q_), mulmod(f.zpow, z_, q_)};
    }
    RabinFingerprint concat(RabinFingerprint x, RabinFingerprint y) const {
        return {addmod(mulmod(x.value, y.zpow, q_), y.value, q_), mulmod(x.zpow, y.zpow, q_)};
    }
    // Window of length n loses out_c on the left and gains in_c on the right.
    RabinFingerprint slide(RabinFingerprint f, std::uint8_t out_c, std::uint8_t in_c, std::uint64_t z_pow_nm1) const {
        std::uint64_t v = submod(f.value, mulmod(out_c % q_, z_pow_nm1, q_), q_);
        return {addmod(mulmod(v, z_, q_), in_c % q_, q_), f.zpow};
    }

private:
    std::uint64_t q_, z_;
    std::vector<std::uint64_t> pow2_, inv_pow2_;
};

} // namespace mdt
