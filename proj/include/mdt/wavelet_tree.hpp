#pragma once

// Wavelet tree shaped by an arbitrary prefix-free code: one internal node per
// proper codeword prefix, holding the next code bit of every character routed
// through it.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mdt/entropy.hpp"
#include "mdt/rrr.hpp"
#include "mdt/serial.hpp"

namespace mdt {

class WaveletTree {
public:
    static constexpr std::uint8_t tag = 3;
    static constexpr std::uint16_t version = 1;

    WaveletTree() = default;
    WaveletTree(std::string_view s, const PrefixCode& code);
    // Balanced code over the distinct symbols of s.
    explicit WaveletTree(std::string_view s);

    std::uint64_t size() const { return n_; }
    const PrefixCode& code() const { return code_; }

    // 1-based positions, as in the bitvectors.
    std::uint8_t access(std::uint64_t i) const;
    std::uint64_t rank(std::uint8_t c, std::uint64_t i) const;
    std::uint64_t select(std::uint8_t c, std::uint64_t j) const;
    bool contains_symbol(std::uint8_t c) const { return code_.has(c); }

    std::size_t internal_nodes() const { return nodes_.size(); }
    // Depth of the leaf of c, i.e. its codeword length.
    std::size_t leaf_depth(std::uint8_t c) const { return code_.codeword(c).size(); }
    const RsBitvector& root_bits() const { return nodes_.at(0).bits; }
    std::uint64_t node_bits() const;
    std::uint64_t space_bits() const;

    void save(serial::Writer& w) const;
    static WaveletTree load(serial::Reader& r);

private:
    struct Node {
        RsBitvector bits;
        std::int32_t child[2] = {-1, -1};  // internal child index, or -1
        std::int32_t leaf[2] = {-1, -1};   // symbol at a leaf child, or -1
    };

    void make_skeleton();
    std::uint64_t rank_unchecked(const std::string& cw, std::uint64_t i) const;

    std::uint64_t n_ = 0;
    PrefixCode code_;
    std::vector<Node> nodes_;
    std::int32_t lone_symbol_ = -1;  // set when the code has an empty codeword
};

} // namespace mdt
