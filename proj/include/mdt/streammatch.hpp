#pragma once

// Streaming exact and k-mismatch pattern matching over byte streams.
// Stream positions are 1-based; an occurrence is reported by its end position.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mdt/hashing.hpp"

namespace mdt {

// Karp-Rabin: fingerprint of a sliding window over the last n bytes, O(n) space.
class KrMatcher {
public:
    KrMatcher(std::string_view pattern, const RabinContext& ctx);
    KrMatcher(std::string_view pattern, std::uint64_t max_stream, std::uint64_t seed);

    // True iff the pattern ends at the byte just pushed.
    bool push(std::uint8_t c);

    std::uint64_t position() const { return clock_; }
    std::uint64_t occurrences() const { return occ_; }
    std::uint64_t pattern_length() const { return window_.size(); }
    RabinFingerprint window_fingerprint() const { return window_fp_; }

private:
    RabinContext ctx_;
    RabinFingerprint pattern_fp_, window_fp_;
    std::string window_;  // ring buffer of the last n bytes
    std::uint64_t z_pow_nm1_;
    std::uint64_t clock_ = 0, occ_ = 0;
};

// Occurrences of y[1, 2^i] among recent stream positions, stored as an arithmetic
// progression r1, r1 + p, ..., r1 + (t-1) p with the fingerprints that locate it.
struct PpLevel {
    std::uint64_t r1 = 0, t = 0, p = 0;
    std::uint64_t c = 0;        // fingerprint of x[1, r1 - 1], valid when t >= 1
    std::uint64_t b = 0;        // fingerprint of x[r1, r1 + p - 1], valid when t >= 2
    std::uint64_t z_r1 = 1;     // z^{len - r1 + 1}, len = current stream length
    std::uint64_t z_r1_inv = 1; // its inverse
    std::uint64_t z_p = 1;      // z^p, valid when t >= 2
    std::uint64_t z_p_inv = 1;  // z^{-p}, valid when t >= 2
};

// Porat-Porat: floor(log2 n) + 1 levels of O(1) words each. Level i holds occurrences
// of the prefix of length 2^i and checks them at length 2^{i+1} (n at the top level).
// Checks for step j run before byte j is absorbed, so an occurrence ending at j - 1 is
// reported by push(byte j) or by finish().
class PpMatcher {
public:
    PpMatcher(std::string_view pattern, const RabinContext& ctx);
    PpMatcher(std::string_view pattern, std::uint64_t max_stream, std::uint64_t seed);

    // End position of an occurrence completed by this step, if any.
    std::optional<std::uint64_t> push(std::uint8_t c);
    // Final check step standing in for an end-of-stream byte outside the pattern.
    std::optional<std::uint64_t> finish();

    std::uint64_t position() const { return len_; }
    std::uint64_t occurrences() const { return occ_; }
    std::uint64_t pattern_length() const { return n_; }
    const std::vector<PpLevel>& levels() const { return levels_; }
    // Prefix length and check length of level i.
    std::uint64_t prefix_length(unsigned i) const { return 1ULL << i; }
    std::uint64_t check_length(unsigned i) const;
    // Fingerprint of the stream so far.
    std::uint64_t stream_fingerprint() const { return a_; }
    const RabinContext& context() const { return ctx_; }
    // Level visits made by the last step.
    std::uint64_t last_step_ops() const { return last_ops_; }
    // Promotions dropped because they broke the progression (only after a fingerprint collision).
    std::uint64_t progression_breaks() const { return breaks_; }

private:
    std::optional<std::uint64_t> run_checks(std::uint64_t j);
    void insert(unsigned i, std::uint64_t r);
    void remove_first(unsigned i);

    RabinContext ctx_;
    std::uint64_t n_;
    std::uint8_t first_byte_;
    std::vector<std::uint64_t> prefix_fp_;   // fingerprint of y[1, 2^i]
    std::vector<std::uint64_t> check_fp_;    // fingerprint of y[1, check_length(i)]
    std::vector<std::uint64_t> check_zpow_;  // z^{check_length(i)}
    std::uint64_t z_inv_;
    std::vector<PpLevel> levels_;
    std::uint64_t a_ = 0, len_ = 0, occ_ = 0, last_ops_ = 0, breaks_ = 0;
    bool finished_ = false;
};

// Smallest primes >= k+1 whose log2 sum exceeds (k+1)^2 log2 n.
std::vector<std::uint64_t> prime_shift_set(unsigned k, std::uint64_t n);

struct KmOccurrence {
    std::uint64_t end;
    unsigned mismatches;
    bool operator==(const KmOccurrence&) const = default;
};

// Reports alignments within Hamming distance k. For each prime d of the shift set,
// every (residue, shift) pair runs an exact matcher of the shift y_{i:d} on the
// residue sub-stream; an alignment is reported iff every prime sees at most k
// mismatching shifts, and the reported count is the largest such number.
class KMismatchMatcher {
public:
    KMismatchMatcher(std::string_view pattern, unsigned k, std::uint64_t max_stream, std::uint64_t seed);

    // Alignments decided by this step (at most one per push).
    std::vector<KmOccurrence> push(std::uint8_t c);
    std::vector<KmOccurrence> finish();

    unsigned k() const { return k_; }
    const std::vector<std::uint64_t>& primes() const { return primes_; }
    std::uint64_t submatchers() const { return sub_.size(); }

private:
    struct Sub {
        unsigned prime;       // index into primes_
        std::uint64_t shift;  // 0-based first pattern index of the shift
        std::uint64_t residue;
        std::uint64_t tail;   // n - 1 - (0-based index of the shift's last pattern byte)
        PpMatcher matcher;
    };

    void record(const Sub& s, std::uint64_t sub_end);
    std::optional<KmOccurrence> decide(std::uint64_t end);

    unsigned k_;
    std::uint64_t n_;
    std::uint64_t len_ = 0, decided_ = 0;
    std::vector<std::uint64_t> primes_;
    std::vector<std::uint64_t> shifts_;  // min(d, n) per prime
    std::vector<Sub> sub_;
    std::vector<std::vector<std::vector<std::size_t>>> by_residue_;  // [prime][residue] -> sub indices
    std::vector<std::vector<std::uint64_t>> tallies_;   // rotating: matched shifts per prime
    std::vector<std::uint64_t> tally_owner_;            // alignment end each slot belongs to
    std::uint64_t max_prime_ = 0;
    std::optional<PpMatcher> exact_;  // k = 0
    bool finished_ = false;
};

} // namespace mdt
