#pragma once

// Zero-order compressed bitvector. The input is cut into blocks of b bits; each
// block is stored as its class (popcount) plus its offset, the lexicographic
// rank of the block among all b-bit strings with that many ones. Offsets have
// variable width, so two levels of samples locate them: one absolute sample
// per macroblock of b blocks and one relative sample per block.

#include <array>
#include <cstdint>
#include <vector>

#include "mdt/bits.hpp"
#include "mdt/serial.hpp"

namespace mdt {

// Binomial coefficients C(n, k) for 0 <= n, k <= 64.
const std::array<std::array<std::uint64_t, 65>, 65>& binomial_table();
inline std::uint64_t binomial(unsigned n, unsigned k) { return k > n ? 0 : binomial_table()[n][k]; }

// Rank of a len-bit block among strings with the same popcount; bit len-1 is read first.
std::uint64_t block_offset(std::uint64_t block, unsigned len);
std::uint64_t block_decode(unsigned ones, std::uint64_t offset, unsigned len);

// Optional instrumentation filled by rank queries.
struct RankProbe {
    unsigned sample_arrays = 0;  // distinct sampled arrays read
    unsigned block_decodes = 0;
};

class RsBitvector {
public:
    static constexpr std::uint8_t tag = 1;
    static constexpr std::uint16_t version = 1;

    RsBitvector() : RsBitvector(PackedBits{}) {}
    explicit RsBitvector(const PackedBits& bits);

    std::uint64_t size() const { return n_; }
    std::uint64_t ones() const { return ones_; }
    std::uint64_t zeros() const { return n_ - ones_; }
    unsigned block_size() const { return b_; }
    std::uint64_t block_count() const { return classes_.size(); }

    // Positions are 1-based; rank(i) counts over B[1..i].
    bool access(std::uint64_t i) const;
    std::uint64_t rank1(std::uint64_t i, RankProbe* probe = nullptr) const;
    std::uint64_t rank0(std::uint64_t i) const { return i - rank1(i); }
    std::uint64_t rank(bool bit, std::uint64_t i) const { return bit ? rank1(i) : rank0(i); }
    std::uint64_t select1(std::uint64_t j) const { return select(true, j); }
    std::uint64_t select0(std::uint64_t j) const { return select(false, j); }
    std::uint64_t select(bool bit, std::uint64_t j) const;

    // Unchecked 0-based variants for inner loops of other structures.
    bool get(std::uint64_t p) const;
    std::uint64_t rank1_unchecked(std::uint64_t i) const;

    std::uint64_t block_class(std::uint64_t blk) const { return classes_.get(blk); }
    std::uint64_t block_offset_value(std::uint64_t blk) const;
    unsigned offset_width(unsigned cls) const;
    std::uint64_t offset_bits() const { return offsets_.size(); }
    std::uint64_t space_bits() const;

    PackedBits to_bits() const;

    void save(serial::Writer& w) const;
    static RsBitvector load(serial::Reader& r);

    // Recomputes every sample from the decoded blocks; used by tests and loaders.
    bool samples_consistent() const;

private:
    std::uint64_t decode_block(std::uint64_t blk) const;
    std::uint64_t offset_start(std::uint64_t blk) const;
    std::uint64_t block_rank_before(std::uint64_t blk) const;

    std::uint64_t n_ = 0;
    std::uint64_t ones_ = 0;
    unsigned b_ = 1;
    PackedIntArray classes_;
    PackedBits offsets_;
    PackedIntArray macro_;  // (absolute offset position, rank before) per macroblock
    PackedIntArray block_;  // (relative offset position, relative rank) per block
};

} // namespace mdt
