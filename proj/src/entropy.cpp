#include "mdt/entropy.hpp"

#include <cmath>
#include <queue>
#include <unordered_map>

#include "mdt/error.hpp"

namespace mdt {

FrequencyTable FrequencyTable::of(std::string_view s) {
    FrequencyTable f;
    for (unsigned char c : s) f.add(c);
    return f;
}

void FrequencyTable::add(std::uint8_t c, std::uint64_t k) {
    if (k == 0) return;
    counts[c] += k;
    total += k;
}

unsigned worst_case_entropy(std::uint64_t universe_size) {
    if (universe_size == 0) throw invalid_argument("universe must be non-empty");
    return ceil_log2(universe_size);
}

double h0(const FrequencyTable& f) {
    if (f.total == 0) throw invalid_argument("entropy of an empty string");
    double n = static_cast<double>(f.total), h = 0;
    for (auto [c, cnt] : f.counts) {
        double nc = static_cast<double>(cnt);
        h += nc / n * std::log2(n / nc);
    }
    return h;
}

double h0(std::string_view s) { return h0(FrequencyTable::of(s)); }

std::string context_string(std::string_view s, std::string_view w) {
    const std::size_t n = s.size(), k = w.size();
    if (k == 0 || k > n) throw invalid_argument("context length must be in [1, |s|]");
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        bool hit = true;
        for (std::size_t j = 0; j < k && hit; ++j) hit = s[(i + j) % n] == w[j];
        if (hit) out.push_back(s[(i + n - 1) % n]);
    }
    return out;
}

double hk(std::string_view s, std::size_t k) {
    const std::size_t n = s.size();
    if (n == 0) throw invalid_argument("entropy of an empty string");
    if (k > n) throw invalid_argument("context length exceeds string length");
    if (k == 0) return h0(s);
    // Position i contributes s[i-1] to the context starting at i.
    std::string doubled(s);
    doubled.append(s.substr(0, k));
    std::unordered_map<std::string_view, FrequencyTable> groups;
    for (std::size_t i = 0; i < n; ++i) {
        groups[std::string_view(doubled).substr(i, k)].add(static_cast<std::uint8_t>(s[(i + n - 1) % n]));
    }
    double h = 0;
    for (const auto& [ctx, f] : groups) h += static_cast<double>(f.total) * h0(f);
    return h / static_cast<double>(n);
}

PrefixCode::PrefixCode(std::map<std::uint8_t, std::string> codewords) : codewords_(std::move(codewords)) {
    trie_.emplace_back();
    for (const auto& [sym, cw] : codewords_) {
        std::int32_t node = 0;
        for (char bit : cw) {
            if (bit != '0' && bit != '1') throw invalid_argument("codeword may contain only 0 and 1");
            if (trie_[node].symbol >= 0) throw invalid_argument("code is not prefix-free");
            int b = bit - '0';
            if (trie_[node].child[b] < 0) {
                trie_[node].child[b] = static_cast<std::int32_t>(trie_.size());
                trie_.emplace_back();
            }
            node = trie_[node].child[b];
        }
        if (trie_[node].symbol >= 0 || trie_[node].child[0] >= 0 || trie_[node].child[1] >= 0) {
            throw invalid_argument("code is not prefix-free");
        }
        trie_[node].symbol = sym;
    }
}

const std::string& PrefixCode::codeword(std::uint8_t c) const {
    auto it = codewords_.find(c);
    if (it == codewords_.end()) throw encoding_error("symbol has no codeword");
    return it->second;
}

PackedBits PrefixCode::encode(std::string_view s) const {
    PackedBits out;
    for (unsigned char c : s) {
        for (char bit : codeword(c)) out.push(bit == '1', 1);
    }
    return out;
}

std::string PrefixCode::decode(const PackedBits& bits) const {
    std::string out;
    if (trie_.empty()) {
        if (bits.size() != 0) throw encoding_error("no code to decode with");
        return out;
    }
    std::int32_t node = 0;
    for (std::uint64_t p = 0; p < bits.size(); ++p) {
        node = trie_[node].child[bits.get(p) ? 1 : 0];
        if (node < 0) throw encoding_error("bit sequence is not a codeword sequence");
        if (trie_[node].symbol >= 0) {
            out.push_back(static_cast<char>(trie_[node].symbol));
            node = 0;
        }
    }
    if (node != 0) throw encoding_error("trailing bits do not form a codeword");
    return out;
}

std::uint64_t PrefixCode::encoded_length(const FrequencyTable& f) const {
    std::uint64_t bits = 0;
    for (auto [c, cnt] : f.counts) bits += cnt * codeword(c).size();
    return bits;
}

PrefixCode balanced_code(const std::vector<std::uint8_t>& symbols) {
    unsigned width = ceil_log2(symbols.size());
    std::map<std::uint8_t, std::string> cw;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        std::string code(width, '0');
        for (unsigned j = 0; j < width; ++j) code[j] = ((i >> (width - 1 - j)) & 1) ? '1' : '0';
        cw[symbols[i]] = code;
    }
    return PrefixCode(std::move(cw));
}

PrefixCode huffman_build(const FrequencyTable& freqs) {
    if (freqs.counts.empty()) throw invalid_argument("Huffman code needs at least one symbol");
    if (freqs.counts.size() == 1) return PrefixCode({{freqs.counts.begin()->first, "0"}});

    struct Node {
        std::int32_t child[2] = {-1, -1};
        std::int32_t symbol = -1;
    };
    std::vector<Node> nodes;
    // (weight, smallest symbol in subtree, node id); min-heap.
    using Item = std::tuple<std::uint64_t, unsigned, std::int32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (auto [c, cnt] : freqs.counts) {
        nodes.push_back(Node{{-1, -1}, c});
        heap.emplace(cnt, c, static_cast<std::int32_t>(nodes.size() - 1));
    }
    while (heap.size() > 1) {
        auto [w0, s0, n0] = heap.top();
        heap.pop();
        auto [w1, s1, n1] = heap.top();
        heap.pop();
        nodes.push_back(Node{{n0, n1}, -1});
        heap.emplace(w0 + w1, std::min(s0, s1), static_cast<std::int32_t>(nodes.size() - 1));
    }
    std::map<std::uint8_t, std::string> cw;
    std::vector<std::pair<std::int32_t, std::string>> stack{{std::get<2>(heap.top()), ""}};
    while (!stack.empty()) {
        auto [id, prefix] = stack.back();
        stack.pop_back();
        if (nodes[id].symbol >= 0) {
            cw[static_cast<std::uint8_t>(nodes[id].symbol)] = prefix;
            continue;
        }
        stack.emplace_back(nodes[id].child[1], prefix + "1");
        stack.emplace_back(nodes[id].child[0], prefix + "0");
    }
    return PrefixCode(std::move(cw));
}

} // namespace mdt
