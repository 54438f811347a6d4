#pragma once

// Approximate-membership filters over 64-bit keys. None of them resize:
// exceeding capacity is reported, never absorbed silently.

#include <cstdint>
#include <map>
#include <string_view>
#include <utility>
#include <vector>

#include "mdt/bits.hpp"
#include "mdt/hashing.hpp"
#include "mdt/serial.hpp"

namespace mdt {

enum class FilterKind : std::uint8_t { bloom = 1, counting_bloom = 2, quotient = 3 };

// Reads the kind byte of a serialized filter without loading it.
FilterKind peek_filter_kind(std::string_view bytes);

struct BloomParams {
    unsigned k;
    std::uint64_t bits;  // M
};

// k = round(log2(1/delta)) (at least 1); M = least integer with (1 - e^{-mk/M})^k <= delta.
BloomParams bloom_params(std::uint64_t m, double delta);
double bloom_fpr(std::uint64_t m, unsigned k, std::uint64_t bits);

struct CountingBloomParams {
    unsigned k;
    std::uint64_t counters;  // M
    unsigned t;              // bits per counter
};

// t = max(2, ceil(log2 log2(log2(1/delta) / gamma))).
CountingBloomParams cbf_params(std::uint64_t m, double delta, double gamma);
// Probability bound that a query meets a saturated counter: k * 2^{-2^t}.
double cbf_overflow_bound(unsigned k, unsigned t);

struct QuotientParams {
    unsigned q;  // log2 of the slot count
    unsigned r;  // remainder bits
};

// r = ceil(log2(1/delta)), q = ceil(log2(m/alpha)).
QuotientParams qf_params(std::uint64_t m, double delta, double alpha);

class BloomFilter {
public:
    BloomFilter(std::uint64_t capacity, unsigned k, std::uint64_t bits, std::uint64_t seed);
    static BloomFilter with_rate(std::uint64_t capacity, double delta, std::uint64_t seed);

    void insert(std::uint64_t x);
    bool contains(std::uint64_t x) const;

    unsigned k() const { return k_; }
    std::uint64_t bits() const { return bits_.size(); }
    std::uint64_t capacity() const { return capacity_; }
    std::uint64_t inserted() const { return inserted_; }
    bool over_capacity() const { return inserted_ > capacity_; }
    double fill_ratio() const;
    std::uint64_t measured_space_bits() const { return bits_.size(); }

    void save(serial::Writer& w) const;
    static BloomFilter load(serial::Reader& r);

private:
    std::uint64_t position(unsigned i, std::uint64_t x) const;

    std::uint64_t capacity_;
    unsigned k_;
    std::uint64_t seed_;
    std::uint64_t inserted_ = 0;
    PackedBits bits_;
};

class CountingBloomFilter {
public:
    CountingBloomFilter(std::uint64_t capacity, unsigned k, std::uint64_t counters, unsigned t, std::uint64_t seed);
    static CountingBloomFilter with_rate(std::uint64_t capacity, double delta, double gamma, std::uint64_t seed);

    void insert(std::uint64_t x);
    // Throws contract_violation, leaving the filter unchanged, if some counter would go below 0.
    void remove(std::uint64_t x);
    bool contains(std::uint64_t x) const;

    unsigned k() const { return k_; }
    unsigned counter_bits() const { return counters_.width(); }
    std::uint64_t counters() const { return counters_.size(); }
    std::uint64_t counter(std::uint64_t i) const { return counters_.get(i); }
    std::uint64_t saturated() const;
    std::uint64_t measured_space_bits() const { return counters_.bits_used(); }

    void save(serial::Writer& w) const;
    static CountingBloomFilter load(serial::Reader& r);

private:
    std::vector<std::uint64_t> positions(std::uint64_t x) const;

    std::uint64_t capacity_;
    unsigned k_;
    std::uint64_t seed_;
    PackedIntArray counters_;
};

class QuotientFilter {
public:
    static constexpr double default_max_load = 0.9;

    QuotientFilter(unsigned q, unsigned r, std::uint64_t seed, double max_load = default_max_load);

    // Throws capacity_error when the insert would reach the maximum load.
    void insert(std::uint64_t x);
    // Throws contract_violation if the fingerprint of x is not stored.
    void remove(std::uint64_t x);
    bool contains(std::uint64_t x) const;

    // Fingerprint split used for x.
    std::pair<std::uint64_t, std::uint64_t> quotient_remainder(std::uint64_t x) const;
    void insert_fingerprint(std::uint64_t quotient, std::uint64_t remainder);
    void remove_fingerprint(std::uint64_t quotient, std::uint64_t remainder);
    bool contains_fingerprint(std::uint64_t quotient, std::uint64_t remainder) const;

    unsigned q() const { return q_; }
    unsigned r() const { return r_; }
    std::uint64_t slots() const { return cells_.size(); }
    std::uint64_t size() const { return count_; }
    double load() const { return static_cast<double>(count_) / static_cast<double>(slots()); }
    std::uint64_t measured_space_bits() const { return cells_.bits_used(); }

    bool is_occupied(std::uint64_t s) const { return cells_.get(s) & occupied_bit; }
    bool is_continuation(std::uint64_t s) const { return cells_.get(s) & continuation_bit; }
    bool is_shifted(std::uint64_t s) const { return cells_.get(s) & shifted_bit; }
    std::uint64_t remainder_at(std::uint64_t s) const { return cells_.get(s) >> 3; }
    bool is_empty_slot(std::uint64_t s) const { return (cells_.get(s) & 7) == 0; }

    // Stored remainders grouped by quotient, decoded from the metadata bits.
    std::map<std::uint64_t, std::vector<std::uint64_t>> decode() const;
    // Lengths of all clusters (maximal slot runs opened by an unshifted element).
    std::vector<std::uint64_t> cluster_lengths() const;
    // Rebuilds the table from the decoded multiset and compares cell by cell.
    bool coherent() const;

    void save(serial::Writer& w) const;
    static QuotientFilter load(serial::Reader& r);

private:
    static constexpr std::uint64_t occupied_bit = 1, continuation_bit = 2, shifted_bit = 4;
    using Entry = std::pair<std::uint64_t, std::uint64_t>;  // (quotient, remainder)

    std::uint64_t next(std::uint64_t s) const { return (s + 1) & (slots() - 1); }
    std::uint64_t prev(std::uint64_t s) const { return (s + slots() - 1) & (slots() - 1); }
    std::uint64_t cluster_start(std::uint64_t s) const;
    // Entries stored in [start, end), where end is the first empty slot at or after start.
    std::vector<Entry> decode_region(std::uint64_t start, std::uint64_t& end) const;
    // Clears clear_len slots from start, then writes entries in canonical order.
    void layout(std::uint64_t start, std::vector<Entry> entries, std::uint64_t clear_len);

    unsigned q_, r_;
    std::uint64_t seed_;
    double max_load_;
    std::uint64_t count_ = 0;
    Mixer mixer_;
    PackedIntArray cells_;
};

} // namespace mdt
