#include "mdt/wavelet_tree.hpp"

#include <map>

namespace mdt {

namespace {

std::vector<std::uint8_t> distinct_symbols(std::string_view s) {
    bool seen[256] = {};
    for (unsigned char c : s) seen[c] = true;
    std::vector<std::uint8_t> out;
    for (unsigned c = 0; c < 256; ++c) {
        if (seen[c]) out.push_back(static_cast<std::uint8_t>(c));
    }
    return out;
}

} // namespace

void WaveletTree::make_skeleton() {
    nodes_.clear();
    lone_symbol_ = -1;
    const auto& cws = code_.codewords();
    if (cws.size() == 1 && cws.begin()->second.empty()) {
        lone_symbol_ = cws.begin()->first;
        return;
    }
    if (cws.empty()) return;
    // Preorder over the code trie, so the layout is a function of the code alone.
    std::map<std::string, std::int32_t> ids;
    std::vector<std::string> stack{""};
    while (!stack.empty()) {
        std::string prefix = stack.back();
        stack.pop_back();
        ids[prefix] = static_cast<std::int32_t>(nodes_.size());
        nodes_.emplace_back();
        bool internal_child[2] = {false, false};
        for (const auto& [sym, cw] : cws) {
            if (cw.size() > prefix.size() && cw.compare(0, prefix.size(), prefix) == 0) {
                int bit = cw[prefix.size()] - '0';
                if (cw.size() == prefix.size() + 1) nodes_.back().leaf[bit] = sym;
                else internal_child[bit] = true;
            }
        }
        for (int bit = 1; bit >= 0; --bit) {
            if (internal_child[bit]) stack.push_back(prefix + static_cast<char>('0' + bit));
        }
    }
    for (const auto& [prefix, id] : ids) {
        if (prefix.empty()) continue;
        std::int32_t parent = ids.at(prefix.substr(0, prefix.size() - 1));
        nodes_[parent].child[prefix.back() - '0'] = id;
    }
}

WaveletTree::WaveletTree(std::string_view s, const PrefixCode& code) : n_(s.size()), code_(code) {
    for (unsigned char c : s) {
        if (!code_.has(c)) throw invalid_argument("symbol without codeword");
    }
    make_skeleton();
    std::vector<PackedBits> raw(nodes_.size());
    for (unsigned char c : s) {
        std::int32_t node = 0;
        const std::string& cw = code_.codeword(c);
        for (std::size_t d = 0; d < cw.size(); ++d) {
            int bit = cw[d] - '0';
            raw[node].push(static_cast<std::uint64_t>(bit), 1);
            node = nodes_[node].child[bit];
        }
    }
    for (std::size_t id = 0; id < nodes_.size(); ++id) nodes_[id].bits = RsBitvector(raw[id]);
}

WaveletTree::WaveletTree(std::string_view s) : WaveletTree(s, balanced_code(distinct_symbols(s))) {}

std::uint8_t WaveletTree::access(std::uint64_t i) const {
    if (i == 0 || i > n_) throw bounds_error("wavelet tree position outside text");
    if (lone_symbol_ >= 0) return static_cast<std::uint8_t>(lone_symbol_);
    std::int32_t node = 0;
    while (true) {
        const Node& nd = nodes_[node];
        bool bit = nd.bits.get(i - 1);
        std::uint64_t ones = nd.bits.rank1_unchecked(i);
        i = bit ? ones : i - ones;
        if (nd.child[bit] < 0) return static_cast<std::uint8_t>(nd.leaf[bit]);
        node = nd.child[bit];
    }
}

std::uint64_t WaveletTree::rank_unchecked(const std::string& cw, std::uint64_t i) const {
    std::int32_t node = 0;
    for (char b : cw) {
        if (i == 0) return 0;
        const Node& nd = nodes_[node];
        std::uint64_t ones = nd.bits.rank1_unchecked(i);
        i = b == '1' ? ones : i - ones;
        node = nd.child[b - '0'];
    }
    return i;
}

std::uint64_t WaveletTree::rank(std::uint8_t c, std::uint64_t i) const {
    if (!code_.has(c)) throw invalid_argument("symbol not in wavelet tree alphabet");
    if (i > n_) throw bounds_error("rank position outside text");
    return rank_unchecked(code_.codeword(c), i);
}

std::uint64_t WaveletTree::select(std::uint8_t c, std::uint64_t j) const {
    if (!code_.has(c)) throw invalid_argument("symbol not in wavelet tree alphabet");
    const std::string& cw = code_.codeword(c);
    if (j == 0 || j > rank_unchecked(cw, n_)) throw not_found("select index exceeds occurrences");
    std::vector<std::int32_t> path;
    std::int32_t node = 0;
    for (char b : cw) {
        path.push_back(node);
        node = nodes_[node].child[b - '0'];
    }
    for (std::size_t d = cw.size(); d-- > 0;) j = nodes_[path[d]].bits.select(cw[d] == '1', j);
    return j;
}

std::uint64_t WaveletTree::node_bits() const {
    std::uint64_t bits = 0;
    for (const auto& nd : nodes_) bits += nd.bits.size();
    return bits;
}

std::uint64_t WaveletTree::space_bits() const {
    std::uint64_t bits = 0;
    for (const auto& nd : nodes_) bits += nd.bits.space_bits();
    return bits;
}

void WaveletTree::save(serial::Writer& w) const {
    w.header("MDT1", tag, version);
    w.u64(n_);
    w.u64(code_.codewords().size());
    for (const auto& [sym, cw] : code_.codewords()) {
        w.u8(sym);
        w.str(cw);
    }
    for (const auto& nd : nodes_) nd.bits.save(w);
}

WaveletTree WaveletTree::load(serial::Reader& r) {
    r.expect(r.header("MDT1", version) == tag, "expected a wavelet tree");
    WaveletTree t;
    t.n_ = r.u64();
    std::uint64_t sigma = r.u64();
    r.expect(sigma <= 256, "alphabet larger than a byte");
    std::map<std::uint8_t, std::string> cws;
    for (std::uint64_t k = 0; k < sigma; ++k) {
        std::uint8_t sym = r.u8();
        cws[sym] = r.str();
    }
    try {
        t.code_ = PrefixCode(std::move(cws));
    } catch (const invalid_argument&) {
        throw corrupt_artifact("stored code is not prefix-free");
    }
    t.make_skeleton();
    for (auto& nd : t.nodes_) nd.bits = RsBitvector::load(r);
    if (!t.nodes_.empty()) r.expect(t.nodes_[0].bits.size() == t.n_, "root length differs from text length");
    for (const auto& nd : t.nodes_) {
        for (int b = 0; b < 2; ++b) {
            if (nd.child[b] >= 0) {
                std::uint64_t routed = b ? nd.bits.ones() : nd.bits.zeros();
                r.expect(t.nodes_[nd.child[b]].bits.size() == routed, "child length differs from routed count");
            }
        }
    }
    return t;
}

} // namespace mdt
