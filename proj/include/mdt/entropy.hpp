#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mdt/bits.hpp"

namespace mdt {

struct FrequencyTable {
    std::map<std::uint8_t, std::uint64_t> counts;  // only symbols with count >= 1
    std::uint64_t total = 0;

    static FrequencyTable of(std::string_view s);
    void add(std::uint8_t c, std::uint64_t k = 1);
    std::size_t sigma() const { return counts.size(); }
};

// ceil(log2(universe_size)).
unsigned worst_case_entropy(std::uint64_t universe_size);

double h0(const FrequencyTable& f);
double h0(std::string_view s);

// Characters preceding each circular occurrence of w in s, left to right.
std::string context_string(std::string_view s, std::string_view w);

// Weighted H0 of the strings of characters preceding each length-k context.
double hk(std::string_view s, std::size_t k);

// Prefix-free code over bytes; codewords are strings of '0'/'1'.
class PrefixCode {
public:
    PrefixCode() = default;
    // Rejects codes that are not prefix-free.
    explicit PrefixCode(std::map<std::uint8_t, std::string> codewords);

    const std::map<std::uint8_t, std::string>& codewords() const { return codewords_; }
    bool has(std::uint8_t c) const { return codewords_.count(c) != 0; }
    const std::string& codeword(std::uint8_t c) const;

    PackedBits encode(std::string_view s) const;
    std::string decode(const PackedBits& bits) const;
    std::uint64_t encoded_length(const FrequencyTable& f) const;

private:
    struct TrieNode {
        std::array<std::int32_t, 2> child{-1, -1};
        std::int32_t symbol = -1;
    };
    std::map<std::uint8_t, std::string> codewords_;
    std::vector<TrieNode> trie_;
};

// Fixed-width code of ceil(log2 sigma) bits, symbols in increasing order.
PrefixCode balanced_code(const std::vector<std::uint8_t>& symbols);

// Repeated minimum-weight pairing. Ties go to the subtree holding the smaller
// symbol, and the first subtree taken becomes the '0' child. A lone symbol
// gets the codeword "0".
PrefixCode huffman_build(const FrequencyTable& freqs);

} // namespace mdt
