#include "mdt/hashing.hpp"

#include <algorithm>

namespace mdt {

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    base %= m;
    while (exp) {
        if (exp & 1) r = mulmod(r, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return r;
}

std::uint64_t invmod_prime(std::uint64_t a, std::uint64_t q) {
    if (a % q == 0) throw invalid_argument("zero has no inverse");
    return powmod(a, q - 2, q);
}

bool is_prime(std::uint64_t x) {
    if (x < 2) return false;
    for (std::uint64_t p : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        if (x % p == 0) return x == p;
    }
    std::uint64_t d = x - 1;
    unsigned s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (std::uint64_t a : {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37}) {
        std::uint64_t y = powmod(a, d, x);
        if (y == 1 || y == x - 1) continue;
        bool composite = true;
        for (unsigned r = 1; r < s && composite; ++r) {
            y = mulmod(y, y, x);
            if (y == x - 1) composite = false;
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t SeedStream::below(std::uint64_t bound) {
    if (bound == 0) throw invalid_argument("empty range");
    std::uint64_t limit = ~0ULL - (~0ULL % bound + 1) % bound;  // largest multiple of bound, minus one
    while (true) {
        std::uint64_t v = next();
        if (v <= limit) return v % bound;
    }
}

std::uint64_t gen_prime(std::uint64_t lo, std::uint64_t hi, SeedStream& rng) {
    if (lo < 2 || hi < lo) throw invalid_argument("prime range must satisfy 2 <= lo <= hi");
    std::uint64_t span = hi - lo;
    std::uint64_t start = lo + (span == ~0ULL ? rng.next() : rng.below(span + 1));
    for (std::uint64_t x = start;; ++x) {
        if (is_prime(x)) return x;
        if (x == hi) break;
    }
    for (std::uint64_t x = lo; x < start; ++x) {
        if (is_prime(x)) return x;
    }
    throw not_found("no prime in range");
}

std::uint64_t collision_free_modulus(std::uint64_t n, unsigned c) {
    unsigned __int128 target = 1;
    for (unsigned k = 0; k < c + 2 && target < modulus_limit; ++k) target *= std::max<std::uint64_t>(n, 2);
    std::uint64_t lo = static_cast<std::uint64_t>(std::min<unsigned __int128>(target, modulus_limit / 2));
    while (!is_prime(lo)) ++lo;
    return lo;
}

PolyHash::PolyHash(std::vector<std::uint64_t> coeffs, std::uint64_t modulus) : a_(std::move(coeffs)), m_(modulus) {
    if (m_ < 2 || m_ >= modulus_limit || !is_prime(m_)) throw invalid_argument("modulus must be a prime below 2^62");
    if (a_.empty()) throw invalid_argument("polynomial needs at least one coefficient");
    for (auto a : a_) {
        if (a >= m_) throw invalid_argument("coefficient outside field");
    }
}

PolyHash PolyHash::random(unsigned k, std::uint64_t modulus, std::uint64_t seed, bool nonzero_lead) {
    SeedStream rng(seed);
    std::vector<std::uint64_t> a(k);
    for (unsigned i = 0; i < k; ++i) {
        bool lead = nonzero_lead && i + 1 == k;
        a[i] = lead ? 1 + rng.below(modulus - 1) : rng.below(modulus);
    }
    return PolyHash(std::move(a), modulus);
}

std::uint64_t PolyHash::operator()(std::uint64_t x) const {
    x %= m_;
    std::uint64_t r = 0;
    for (std::size_t i = a_.size(); i-- > 0;) r = addmod(mulmod(r, x, m_), a_[i], m_);
    return r;
}

RangeHash::RangeHash(std::uint64_t a, std::uint64_t b, std::uint64_t modulus, std::uint64_t range)
    : a_(a), b_(b), m_(modulus), range_(range) {
    if (m_ < 2 || m_ >= modulus_limit || !is_prime(m_)) throw invalid_argument("modulus must be a prime below 2^62");
    if (a_ == 0 || a_ >= m_ || b_ >= m_) throw invalid_argument("need 0 < a < M and 0 <= b < M");
    if (range_ == 0) throw invalid_argument("range must be positive");
}

RangeHash RangeHash::random(std::uint64_t modulus, std::uint64_t range, std::uint64_t seed) {
    SeedStream rng(seed);
    std::uint64_t a = 1 + rng.below(modulus - 1);
    std::uint64_t b = rng.below(modulus);
    return RangeHash(a, b, modulus, range);
}

std::uint64_t RangeHash::operator()(std::uint64_t x) const {
    return addmod(mulmod(a_, x % m_, m_), b_, m_) % range_;
}

std::uint64_t key_of(std::string_view s, std::uint64_t seed) {
    // FNV-1a over the bytes, then a seeded finalizer.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
    return Mixer(seed)(h ^ s.size());
}

RabinContext::RabinContext(std::uint64_t q, std::uint64_t z, std::uint64_t max_len) : q_(q), z_(z % q) {
    if (q_ < 2 || q_ >= modulus_limit || !is_prime(q_)) throw invalid_argument("q must be a prime below 2^62");
    std::uint64_t p = z_;
    for (std::uint64_t len = 1; len <= std::max<std::uint64_t>(max_len, 1); len <<= 1) {
        pow2_.push_back(p);
        inv_pow2_.push_back(p == 0 ? 0 : invmod_prime(p, q_));
        if (p != 0 && mulmod(p, inv_pow2_.back(), q_) != 1) throw invalid_argument("inverse power check failed");
        p = mulmod(p, p, q_);
        if (len > (max_len >> 1)) break;
    }
}

RabinContext RabinContext::for_stream(std::uint64_t m_max, std::uint64_t max_len, std::uint64_t seed) {
    SeedStream rng(seed);
    unsigned __int128 cube = static_cast<unsigned __int128>(std::max<std::uint64_t>(m_max, 2));
    cube = cube * cube * cube;
    // q > 255 keeps distinct bytes distinct modulo q.
    std::uint64_t lo = static_cast<std::uint64_t>(std::clamp<unsigned __int128>(cube, 256, modulus_limit / 2));
    std::uint64_t q = gen_prime(lo, 2 * lo - 1, rng);
    std::uint64_t z = 1 + rng.below(q - 1);
    return RabinContext(q, z, max_len);
}

RabinFingerprint RabinContext::of(std::string_view s) const {
    RabinFingerprint f;
    for (unsigned char c : s) f = append(f, c);
    return f;
}

} // namespace mdt
