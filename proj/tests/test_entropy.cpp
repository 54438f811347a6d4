#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mdt/entropy.hpp"
#include "mdt/error.hpp"

using namespace mdt;

namespace {

std::uint64_t binom_brute(unsigned n, unsigned k) {
    std::uint64_t count = 0;
    for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) count += std::popcount(mask) == static_cast<int>(k);
    return count;
}

// Minimum total length over all codeword-length vectors obeying the Kraft inequality,
// which is exactly the set of length vectors realisable by prefix-free codes.
std::uint64_t optimal_prefix_cost(const std::vector<std::uint64_t>& counts) {
    const std::size_t s = counts.size();
    if (s == 1) return counts[0];
    std::vector<unsigned> depth(s, 1);
    std::uint64_t best = ~0ULL;
    while (true) {
        double kraft = 0;
        std::uint64_t cost = 0;
        for (std::size_t i = 0; i < s; ++i) {
            kraft += std::ldexp(1.0, -static_cast<int>(depth[i]));
            cost += counts[i] * depth[i];
        }
        if (kraft <= 1.0 + 1e-12) best = std::min(best, cost);
        std::size_t i = 0;
        while (i < s && ++depth[i] > s - 1) depth[i++] = 1;
        if (i == s) break;
    }
    return best;
}

// Groups characters by the k characters that follow them, via a sort of all contexts.
double hk_by_sorting(const std::string& s, std::size_t k) {
    const std::size_t n = s.size();
    std::vector<std::pair<std::string, char>> rows;
    for (std::size_t i = 0; i < n; ++i) {
        std::string ctx;
        for (std::size_t j = 0; j < k; ++j) ctx.push_back(s[(i + j) % n]);
        rows.emplace_back(ctx, s[(i + n - 1) % n]);
    }
    std::sort(rows.begin(), rows.end());
    double total = 0;
    for (std::size_t a = 0; a < rows.size();) {
        std::size_t b = a;
        std::string group;
        while (b < rows.size() && rows[b].first == rows[a].first) group.push_back(rows[b++].second);
        std::sort(group.begin(), group.end());
        double h = 0;
        for (std::size_t x = 0; x < group.size();) {
            std::size_t y = x;
            while (y < group.size() && group[y] == group[x]) ++y;
            double p = static_cast<double>(y - x) / static_cast<double>(group.size());
            h -= p * std::log2(p);
            x = y;
        }
        total += static_cast<double>(group.size()) * h;
        a = b;
    }
    return total / static_cast<double>(n);
}

std::string random_string(std::mt19937_64& rng, std::size_t n, unsigned sigma) {
    std::string s(n, 'a');
    for (auto& c : s) c = static_cast<char>('a' + rng() % sigma);
    return s;
}

} // namespace

TEST_CASE("worst-case entropy") {
    CHECK(worst_case_entropy(1ULL << 16) == 16);
    CHECK(worst_case_entropy(1) == 0);
    CHECK(binom_brute(12, 3) == 220);
    CHECK(worst_case_entropy(binom_brute(12, 3)) == 8);
    CHECK_THROWS_AS(worst_case_entropy(0), invalid_argument);
}

TEST_CASE("zero-order entropy") {
    double expect = -(0.25 * std::log2(0.25) + 0.75 * std::log2(0.75));
    CHECK(h0("001010001000") == doctest::Approx(expect).epsilon(1e-12));
    CHECK(h0("001010001000") == doctest::Approx(0.8113).epsilon(1e-4));
    CHECK(h0("aaaa") == 0.0);
    CHECK(h0("ab") == doctest::Approx(1.0));
    CHECK_THROWS_AS(h0(""), invalid_argument);
}

TEST_CASE("context strings") {
    CHECK(context_string("aababbabab", "ab") == "abbb");
    CHECK(context_string("aababbabab", "ba") == "abaa");
    CHECK(context_string("aaaa", "a") == "aaaa");
    CHECK_THROWS_AS(context_string("ab", "abc"), invalid_argument);
}

TEST_CASE("k-th order entropy of the worked example") {
    CHECK(std::fabs(hk("aababbabab", 2) - 0.65) <= 0.01);
    CHECK(hk("aababbabab", 0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(hk("ab", 3), invalid_argument);
}

TEST_CASE("k-th order entropy agrees with sorted-context recomputation") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s = random_string(rng, 1 + rng() % 200, 1 + rng() % 5);
        for (std::size_t k = 0; k <= std::min<std::size_t>(4, s.size()); ++k) {
            REQUIRE(hk(s, k) == doctest::Approx(hk_by_sorting(s, k)).epsilon(1e-9));
        }
        REQUIRE(hk(s, 0) == doctest::Approx(h0(s)).epsilon(1e-12));
    }
}

TEST_CASE("entropy hierarchy on random strings") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 100; ++trial) {
        unsigned sigma = 2 + rng() % 6;
        std::string s = random_string(rng, 50 + rng() % 2000, sigma);
        double prev = std::log2(static_cast<double>(FrequencyTable::of(s).sigma()));
        for (std::size_t k = 0; k <= 3; ++k) {
            double h = hk(s, k);
            REQUIRE(h <= prev + 1e-9);
            prev = h;
        }
    }
}

TEST_CASE("Huffman on the worked example") {
    FrequencyTable f = FrequencyTable::of("abracadabra");
    PrefixCode code = huffman_build(f);
    CHECK(code.encoded_length(f) == 23);
    CHECK(code.encode("abracadabra").size() == 23);
    CHECK(code.decode(code.encode("abracadabra")) == "abracadabra");
    CHECK(code.encode("").size() == 0);

    FrequencyTable single;
    single.add('a', 5);
    PrefixCode one = huffman_build(single);
    CHECK(one.codeword('a') == "0");
    CHECK(one.encoded_length(single) == 5);

    FrequencyTable flat;
    for (char c : std::string("abcd")) flat.add(static_cast<std::uint8_t>(c));
    PrefixCode four = huffman_build(flat);
    for (char c : std::string("abcd")) CHECK(four.codeword(static_cast<std::uint8_t>(c)).size() == 2);
    CHECK(four.encoded_length(flat) == optimal_prefix_cost({1, 1, 1, 1}));
    CHECK(four.encoded_length(flat) == 8);

    CHECK_THROWS_AS(huffman_build(FrequencyTable{}), invalid_argument);
    CHECK_THROWS_AS(code.encode("xyz"), encoding_error);
    CHECK_THROWS_AS(code.decode(PackedBits::from_string("1")), encoding_error);
}

TEST_CASE("Huffman codes are prefix-free and optimal on small alphabets") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 400; ++trial) {
        std::size_t sigma = 1 + rng() % 5;
        FrequencyTable f;
        std::vector<std::uint64_t> counts;
        for (std::size_t c = 0; c < sigma; ++c) {
            counts.push_back(1 + rng() % 8);
            f.add(static_cast<std::uint8_t>('a' + c), counts.back());
        }
        PrefixCode code = huffman_build(f);
        for (const auto& [a, ca] : code.codewords()) {
            for (const auto& [b, cb] : code.codewords()) {
                if (a != b) REQUIRE(cb.compare(0, ca.size(), ca) != 0);
            }
        }
        REQUIRE(code.encoded_length(f) == optimal_prefix_cost(counts));
    }
}

TEST_CASE("Huffman output length within the zero-order bounds") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        std::string s = random_string(rng, 1 + rng() % 3000, 4);
        PrefixCode code = huffman_build(FrequencyTable::of(s));
        PackedBits bits = code.encode(s);
        double n = static_cast<double>(s.size()), h = h0(s);
        REQUIRE(static_cast<double>(bits.size()) >= n * h - 1e-9);
        REQUIRE(static_cast<double>(bits.size()) <= n * (h + 1) + 1e-9);
        REQUIRE(code.decode(bits) == s);
    }
}
