#pragma once

// Sub-linear stream summaries. Randomized sketches take an explicit seed;
// sketches built with equal (parameters, seed) are directly comparable.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mdt/hashing.hpp"
#include "mdt/serial.hpp"

namespace mdt {

enum class SketchKind : std::uint8_t { minhash = 1, morris = 2, distinct = 3, dgim = 4 };

// Reads the kind byte of a serialized sketch without loading it.
SketchKind peek_sketch_kind(std::string_view bytes);

// Prime modulus of the unit-interval hashes: 2^61 - 1.
inline constexpr std::uint64_t sketch_modulus = (1ULL << 61) - 1;

// Pairwise-independent unit hash (a x' + b) mod M, where x' is the key after a
// fixed bijective mix, so structured key sets do not become arithmetic progressions.
class UnitHash {
public:
    explicit UnitHash(std::uint64_t seed);
    // Integer pre-image in [0, M).
    std::uint64_t raw(std::uint64_t key) const;
    double operator()(std::uint64_t key) const { return static_cast<double>(raw(key)) / sketch_modulus; }

private:
    std::uint64_t a_, b_;
};

// k = ceil(2 ln(2/delta) / epsilon^2).
unsigned minhash_k(double epsilon, double delta);

class MinHash {
public:
    MinHash(unsigned k, std::uint64_t seed);
    // Throws invalid_argument on an empty key set.
    static MinHash build(const std::vector<std::uint64_t>& keys, unsigned k, std::uint64_t seed);

    void offer(std::uint64_t key);
    // Sketch of the union: pointwise minima. Throws invalid_argument on a (k, seed) mismatch.
    MinHash merged(const MinHash& other) const;
    // Fraction of coordinates whose minima agree.
    double jaccard(const MinHash& other) const;

    unsigned k() const { return static_cast<unsigned>(minima_.size()); }
    std::uint64_t seed() const { return seed_; }
    bool empty() const { return offered_ == 0; }
    // Integer pre-images of the coordinate minima; M marks an empty coordinate.
    const std::vector<std::uint64_t>& minima() const { return minima_; }

    bool operator==(const MinHash& o) const { return seed_ == o.seed_ && minima_ == o.minima_; }

    void save(serial::Writer& w) const;
    static MinHash load(serial::Reader& r);

private:
    void check_compatible(const MinHash& other) const;

    std::uint64_t seed_;
    std::uint64_t offered_ = 0;
    std::vector<UnitHash> hashes_;
    std::vector<std::uint64_t> minima_;
};

// 1 - (1 - (1-d)^r)^b.
double lsh_scurve(double distance, unsigned r, unsigned b);
// floor(ln(1 - 2^{-1/b}) / ln(1 - d)), at least 1.
unsigned lsh_fit_r(unsigned b, double center_distance);

struct LshQueryResult {
    std::optional<std::uint64_t> id;
    std::uint64_t candidates = 0;  // distinct ids handed to the verifier
    bool truncated = false;        // the candidate budget ran out before a match
};

// b tables, each keyed by r consecutive MinHash coordinates (the band tuple itself,
// so band keys never collide).
class LshIndex {
public:
    using Verifier = std::function<double(std::uint64_t id)>;

    LshIndex(unsigned r, unsigned b);

    void insert(std::uint64_t id, const MinHash& sketch);
    // Returns the first candidate whose verified distance is <= threshold.
    LshQueryResult query(const MinHash& sketch, double threshold, const Verifier& verifier,
                         std::uint64_t candidate_budget = ~0ULL) const;
    // Verifies with the estimated Jaccard distance against the stored sketch.
    LshQueryResult query(const MinHash& sketch, double threshold, std::uint64_t candidate_budget = ~0ULL) const;

    unsigned r() const { return r_; }
    unsigned b() const { return static_cast<unsigned>(tables_.size()); }
    std::uint64_t size() const { return store_.size(); }
    // Number of tables that hold id; equals b for every inserted id.
    unsigned tables_containing(std::uint64_t id) const;

private:
    std::vector<std::uint64_t> band(const MinHash& sketch, unsigned j) const;

    unsigned r_;
    std::vector<std::map<std::vector<std::uint64_t>, std::vector<std::uint64_t>>> tables_;
    std::unordered_map<std::uint64_t, MinHash> store_;
};

// Positions sampled uniformly with replacement from [0, n).
std::vector<std::uint64_t> hamming_positions(std::uint64_t n, unsigned k, std::uint64_t seed);
// Fraction of k sampled positions where x and y differ; estimates d_H / n.
double hamming_estimate(std::string_view x, std::string_view y, unsigned k, std::uint64_t seed);

class MorrisCounter {
public:
    static constexpr unsigned max_exponent = 63;

    explicit MorrisCounter(std::uint64_t seed) : rng_(seed) {}

    // Increments the exponent X with probability exactly 2^{-X}.
    void tick();
    // n ticks at once by geometric skipping; same distribution as n calls to tick
    // up to double rounding of the skip lengths.
    void advance(std::uint64_t n);

    unsigned exponent() const { return x_; }
    bool saturated() const { return saturated_; }
    double estimate() const;

    void save(serial::Writer& w) const;
    static MorrisCounter load(serial::Reader& r);

private:
    unsigned x_ = 0;
    bool saturated_ = false;
    SeedStream rng_;
};

// k = ceil(24 / epsilon^2).
unsigned bottom_k_size(double epsilon);

class DistinctCounter {
public:
    DistinctCounter(unsigned k, std::uint64_t seed);
    static DistinctCounter for_accuracy(double epsilon, std::uint64_t seed) {
        return DistinctCounter(bottom_k_size(epsilon), seed);
    }

    void offer(std::uint64_t key);
    // k / y_k once k distinct hashes are held; the exact stored count before that.
    double estimate() const;

    unsigned k() const { return k_; }
    std::uint64_t stored() const { return kept_.size(); }
    // Stored unit values in increasing order.
    std::vector<double> values() const;

    void save(serial::Writer& w) const;
    static DistinctCounter load(serial::Reader& r);

private:
    unsigned k_;
    std::uint64_t seed_;
    UnitHash hash_;
    std::set<std::pair<std::uint64_t, std::uint64_t>> kept_;  // (hash pre-image, key)
};

// Smallest unit hash over the stream, and the single-register estimate 1/y - 1.
double fm_single_minimum(const std::vector<std::uint64_t>& keys, std::uint64_t seed);
double fm_single_estimate(const std::vector<std::uint64_t>& keys, std::uint64_t seed);

struct DgimGroup {
    std::uint64_t left;   // timestamp of the oldest 1-bit
    std::uint64_t right;  // timestamp of the newest 1-bit
    unsigned exponent;    // the group holds 2^exponent 1-bits
};

// Counts 1-bits among the most recent bits of a stream, within a factor 1 + epsilon.
class DgimWindow {
public:
    DgimWindow(std::uint64_t window, double epsilon);

    void push(bool bit);
    // Estimate d~ of the 1-bits among the last span bits: d <= d~ <= (1 + epsilon) d.
    std::uint64_t count(std::uint64_t span) const;

    std::uint64_t window() const { return window_; }
    unsigned per_size() const { return b_; }
    // Timestamp of the most recent bit; bits are numbered from 1.
    std::uint64_t now() const { return now_; }
    // Groups from oldest to newest.
    const std::deque<DgimGroup>& groups() const { return groups_; }
    // Structural rules: ordered disjoint groups, sizes halving toward the present,
    // B <= Z_k <= B+1 for every size except the largest (Z <= B+1 there).
    bool well_formed() const;

    void save(serial::Writer& w) const;
    static DgimWindow load(serial::Reader& r);

private:
    std::uint64_t window_;
    unsigned b_;
    std::uint64_t now_ = 0;
    std::deque<DgimGroup> groups_;
};

// Sum of the last span q-bit integers: one DGIM lane per bit.
class DgimSum {
public:
    DgimSum(std::uint64_t window, double epsilon, unsigned bits);

    void push(std::uint64_t value);
    std::uint64_t sum(std::uint64_t span) const;

    unsigned bits() const { return static_cast<unsigned>(lanes_.size()); }
    const DgimWindow& lane(unsigned i) const { return lanes_.at(i); }

private:
    std::vector<DgimWindow> lanes_;
};

struct BoostConfig {
    double epsilon;
    double delta;
    unsigned s;  // copies averaged per group
    unsigned t;  // groups whose means enter the median
};

// s = ceil(3 Var/E^2 / epsilon^2), t = ceil(72 ln(1/delta)).
BoostConfig boost_config(double epsilon, double delta, double variance_ratio);

// Lower middle element for even counts.
double lower_median(std::vector<double> values);

// Runs s*t estimator instances, numbered 0 .. s*t-1, and returns the median of the t group means.
double boost_mean_median(unsigned s, unsigned t, const std::function<double(std::uint64_t instance)>& estimator);
inline double boost_mean_median(const BoostConfig& cfg, const std::function<double(std::uint64_t)>& estimator) {
    return boost_mean_median(cfg.s, cfg.t, estimator);
}

} // namespace mdt
