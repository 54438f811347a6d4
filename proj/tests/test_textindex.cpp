#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mdt/text_index.hpp"

using namespace mdt;

namespace {

std::vector<std::uint64_t> naive_sa(const std::string& with_sentinel) {
    std::string t = with_sentinel;
    t.back() = '\0';
    std::vector<std::uint64_t> sa(t.size());
    std::iota(sa.begin(), sa.end(), 1);
    std::sort(sa.begin(), sa.end(), [&](auto a, auto b) { return t.compare(a - 1, std::string::npos, t, b - 1) < 0; });
    return sa;
}

std::string rotation_bwt(const std::string& with_sentinel) {
    std::string t = with_sentinel;
    t.back() = '\0';
    std::vector<std::string> rot;
    for (std::size_t i = 0; i < t.size(); ++i) rot.push_back(t.substr(i) + t.substr(0, i));
    std::sort(rot.begin(), rot.end());
    std::string out;
    for (const auto& r : rot) out.push_back(r.back() == '\0' ? '$' : r.back());
    return out;
}

std::vector<std::uint64_t> naive_occurrences(const std::string& text, const std::string& pattern) {
    std::vector<std::uint64_t> out;
    if (pattern.empty() || pattern.size() > text.size()) return out;
    for (std::size_t i = 0; i + pattern.size() <= text.size(); ++i) {
        if (text.compare(i, pattern.size(), pattern) == 0) out.push_back(i + 1);
    }
    return out;
}

std::string random_text(std::mt19937_64& rng, std::size_t n, unsigned sigma) {
    std::string s(n, 'a');
    for (auto& c : s) c = static_cast<char>('a' + rng() % sigma);
    return s;
}

template <typename Index>
Index roundtrip(const Index& idx) {
    std::stringstream ss;
    serial::Writer w(ss);
    idx.save(w);
    serial::Reader r(ss);
    return Index::load(r);
}

} // namespace

TEST_CASE("suffix arrays of worked examples") {
    CHECK(sa_build("abaab$") == std::vector<std::uint64_t>{6, 3, 4, 1, 5, 2});
    CHECK(sa_build("BANANA$") == std::vector<std::uint64_t>{7, 6, 4, 2, 1, 5, 3});
    CHECK(sa_build("$") == std::vector<std::uint64_t>{1});
    CHECK_THROWS_AS(sa_build("abc"), invalid_argument);
    CHECK_THROWS_AS(sa_build("a$b$"), invalid_argument);
}

TEST_CASE("suffix array matches comparison sort") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        std::string t = random_text(rng, rng() % 1000, 1 + rng() % 8) + "$";
        REQUIRE(sa_build(t) == naive_sa(t));
    }
}

TEST_CASE("BWT forward and inverse") {
    CHECK(bwt_from_text("mississippi$") == "ipssm$pissii");
    CHECK(bwt_invert("ipssm$pissii") == "mississippi$");
    CHECK(bwt_from_text("$") == "$");
    CHECK(bwt_invert("$") == "$");
    CHECK_THROWS_AS(bwt_invert("abc"), invalid_argument);
    CHECK_THROWS_AS(bwt_invert("a$$"), invalid_argument);
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 1000; ++trial) {
        std::string t = random_text(rng, rng() % 512, 1 + rng() % 8) + "$";
        std::string bwt = bwt_from_text(t);
        REQUIRE(bwt == rotation_bwt(t));
        REQUIRE(bwt_invert(bwt) == t);
    }
}

TEST_CASE("psi on BANANA") {
    auto sa = sa_build("BANANA$");
    auto psi = psi_array(sa);
    // Row 1 holds the terminator suffix and wraps to the row of position 1.
    CHECK(std::vector<std::uint64_t>(psi.begin() + 1, psi.end()) == std::vector<std::uint64_t>{1, 6, 7, 4, 2, 3});
    auto isa = inverse_permutation(sa);
    CHECK(psi[2] == isa[sa[2]]);
    CHECK(psi[2] == 6);

    CsaIndex csa("BANANA");
    CHECK(csa.alphabet() == std::vector<std::uint8_t>{0, 'A', 'B', 'N'});
    CHECK(csa.psi_run(1).decode() == std::vector<std::uint64_t>{0, 5, 6});  // (1,6,7) stored 0-based
    CHECK(csa.psi_run(2).decode() == std::vector<std::uint64_t>{3});
    CHECK(csa.psi_run(3).decode() == std::vector<std::uint64_t>{1, 2});
    for (std::uint64_t i = 1; i <= 7; ++i) CHECK(csa.psi(i) == psi[i - 1]);
    CHECK(csa.first_occurrence().rank1(4) == 2);
}

TEST_CASE("CSA queries on BANANA") {
    CsaIndex csa("BANANA");
    CHECK(csa.count("AN") == SaRange{3, 4});
    CHECK(csa.count("A") == SaRange{2, 4});
    CHECK(csa.count("ZZ").count() == 0);
    CHECK(csa.sample_rate() == 3);
    unsigned steps = 0;
    CHECK(csa.sa_at(5, &steps) == 1);
    CHECK(steps == 2);
    CHECK(csa.locate("AN") == naive_occurrences("BANANA", "AN"));
    CHECK(csa.locate("AN") == std::vector<std::uint64_t>{2, 4});
    CHECK(csa.extract(1, 6) == "BANANA");
    CHECK(csa.extract(3, 2) == "NA");
    CHECK(csa.extract(7, 1) == "$");
    CHECK_THROWS_AS(csa.extract(6, 3), bounds_error);
}

TEST_CASE("FM-index fixtures") {
    FmIndex mi("mississippi");
    CHECK(mi.lf(12) == 5);
    CHECK(mi.lf(8) == 3);
    CHECK(mi.extract(2, 4) == "issi");
    CHECK(mi.extract(1, 11) == "mississippi");

    FmIndex ab("aabbbababbbaababa");
    CHECK(ab.count("ab") == SaRange{5, 9});
    CHECK(ab.count("bab") == SaRange{12, 14});
    CHECK(ab.locate("bab") == naive_occurrences("aabbbababbbaababa", "bab"));
    CHECK(ab.locate("bab").size() == 3);
    CHECK(ab.locate("aabbbababbbaababa") == std::vector<std::uint64_t>{1});
    CHECK(ab.count("z").count() == 0);
}

TEST_CASE("LF is the inverse of psi and walks a single cycle") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::string t = random_text(rng, 1 + rng() % 300, 1 + rng() % 6);
        FmIndex fm(t);
        CsaIndex csa(t);
        auto sa = sa_build(t + "$");
        auto isa = inverse_permutation(sa);
        std::uint64_t n = sa.size();
        std::vector<bool> seen(n + 1, false);
        std::uint64_t row = 1;
        for (std::uint64_t k = 0; k < n; ++k) {
            REQUIRE_FALSE(seen[row]);
            seen[row] = true;
            row = fm.lf(row);
        }
        REQUIRE(row == 1);
        for (std::uint64_t i = 1; i <= n; ++i) {
            REQUIRE(csa.psi(fm.lf(i)) == i);
            REQUIRE(isa[sa[i - 1] - 1] == i);
            REQUIRE(csa.first_symbol(i) == static_cast<std::uint8_t>(i == 1 ? 0 : t[sa[i - 1] - 1]));
            unsigned csa_steps = 0, fm_steps = 0;
            REQUIRE(csa.sa_at(i, &csa_steps) == sa[i - 1]);
            REQUIRE(fm.sa_at(i, &fm_steps) == sa[i - 1]);
            REQUIRE(csa_steps < csa.sample_rate());
            REQUIRE(fm_steps < fm.sample_rate());
        }
        for (std::size_t k = 0; k + 1 < csa.alphabet().size(); ++k) {
            auto run = csa.psi_run(k).decode();
            REQUIRE(std::adjacent_find(run.begin(), run.end(), std::greater_equal<>()) == run.end());
        }
    }
}

TEST_CASE("both indexes agree with a naive matcher") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 150; ++trial) {
        unsigned sigma = 1 + rng() % 8;
        std::string t = random_text(rng, 1 + rng() % 200, sigma);
        CsaIndex csa(t);
        FmIndex fm(t);
        for (int q = 0; q < 100; ++q) {
            std::string p = random_text(rng, 1 + rng() % 10, sigma + 1);  // may hold an absent symbol
            auto occ = naive_occurrences(t, p);
            REQUIRE(csa.count(p).count() == occ.size());
            REQUIRE(fm.count(p).count() == occ.size());
            REQUIRE(csa.locate(p) == occ);
            REQUIRE(fm.locate(p) == occ);
        }
        for (int q = 0; q < 20; ++q) {
            std::uint64_t i = 1 + rng() % t.size();
            std::uint64_t len = rng() % (t.size() - i + 2);
            std::string expect = (t + "$").substr(i - 1, len);
            REQUIRE(csa.extract(i, len) == expect);
            REQUIRE(fm.extract(i, len) == expect);
        }
    }
}

TEST_CASE("index serialization round trip and corruption") {
    CsaIndex csa = roundtrip(CsaIndex("BANANA"));
    CHECK(csa.locate("AN") == std::vector<std::uint64_t>{2, 4});
    FmIndex fm = roundtrip(FmIndex("mississippi"));
    CHECK(fm.locate("ssi") == std::vector<std::uint64_t>{3, 6});
    CHECK(fm.extract(1, 11) == "mississippi");

    std::stringstream ss;
    serial::Writer w(ss);
    FmIndex("abc").save(w);
    std::string bytes = ss.str();
    CHECK(peek_index_kind(bytes) == IndexKind::fm);
    bytes[5] = 9;  // version
    std::stringstream bad(bytes);
    serial::Reader r(bad);
    CHECK_THROWS_AS(FmIndex::load(r), corrupt_artifact);
    std::stringstream truncated(ss.str().substr(0, 20));
    serial::Reader rt(truncated);
    CHECK_THROWS_AS(FmIndex::load(rt), corrupt_artifact);
}

TEST_CASE("text validation") {
    CHECK_THROWS_AS(CsaIndex("a$b"), invalid_argument);
    CHECK_THROWS_AS(FmIndex(std::string("a\0b", 3)), invalid_argument);
}

TEST_CASE("balanced wavelet tree over the BWT uses n ceil(log sigma) node bits") {
    std::mt19937_64 rng(5);
    std::string t = random_text(rng, 5000, 7);
    FmIndex fm(t);
    CHECK(fm.wavelet().node_bits() == 5001 * 3);
}
