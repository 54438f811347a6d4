#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "mdt/sketches.hpp"

using namespace mdt;

namespace {

template <typename Sketch>
std::string serialize(const Sketch& s) {
    std::ostringstream out;
    serial::Writer w(out);
    s.save(w);
    return out.str();
}

template <typename Sketch>
Sketch deserialize(const std::string& bytes) {
    std::istringstream in(bytes);
    serial::Reader r(in);
    return Sketch::load(r);
}

// Sets with |A ∩ B| = shared and |A \ B| = |B \ A| = own, all keys fresh.
std::pair<std::vector<std::uint64_t>, std::vector<std::uint64_t>> jaccard_pair(SeedStream& rng, std::size_t shared,
                                                                               std::size_t own) {
    std::set<std::uint64_t> used;
    auto fresh = [&] {
        while (true) {
            auto x = rng.next();
            if (used.insert(x).second) return x;
        }
    };
    std::vector<std::uint64_t> a, b;
    for (std::size_t i = 0; i < shared; ++i) {
        auto x = fresh();
        a.push_back(x);
        b.push_back(x);
    }
    for (std::size_t i = 0; i < own; ++i) a.push_back(fresh());
    for (std::size_t i = 0; i < own; ++i) b.push_back(fresh());
    return {a, b};
}

double relative_error(double estimate, double truth) { return std::abs(estimate - truth) / truth; }

// Checks the DGIM rules against the actual stream, using prefix sums of 1-bits.
bool dgim_matches_stream(const DgimWindow& w, const std::vector<std::uint64_t>& prefix) {
    const auto& groups = w.groups();
    const std::uint64_t now = w.now();
    auto ones = [&](std::uint64_t lo, std::uint64_t hi) { return lo > hi ? 0 : prefix[hi] - prefix[lo - 1]; };
    std::uint64_t covered = 0;
    for (const auto& g : groups) {
        if (ones(g.left, g.left) != 1 || ones(g.right, g.right) != 1) return false;
        if (ones(g.left, g.right) != (1ULL << g.exponent)) return false;
        covered += 1ULL << g.exponent;
    }
    std::uint64_t window_start = now >= w.window() ? now - w.window() + 1 : 1;
    if (groups.empty()) return ones(window_start, now) == 0;
    // Every 1-bit from the oldest group on is inside a group, and none in the window precedes it.
    if (ones(groups.front().left, now) != covered) return false;
    if (groups.front().left > window_start && ones(window_start, groups.front().left - 1) != 0) return false;
    return w.well_formed();
}

} // namespace

TEST_CASE("MinHash size for an accuracy target") {
    CHECK(minhash_k(0.1, 0.05) == 738);
    CHECK_THROWS_AS(minhash_k(0.1, 0.0), invalid_argument);
}

TEST_CASE("MinHash merge algebra") {
    SeedStream rng(1);
    for (int trial = 0; trial < 100; ++trial) {
        auto [a, b] = jaccard_pair(rng, 1 + rng.below(50), rng.below(50));
        auto c = jaccard_pair(rng, 1 + rng.below(20), 0).first;
        auto sa = MinHash::build(a, 64, 7), sb = MinHash::build(b, 64, 7), sc = MinHash::build(c, 64, 7);
        std::vector<std::uint64_t> both = a;
        both.insert(both.end(), b.begin(), b.end());
        REQUIRE(MinHash::build(both, 64, 7).minima() == sa.merged(sb).minima());
        REQUIRE(sa.merged(sa) == sa);
        REQUIRE(sa.merged(sb) == sb.merged(sa));
        REQUIRE(sa.merged(sb).merged(sc) == sa.merged(sb.merged(sc)));
    }
    auto s = MinHash::build({1, 2, 3}, 16, 1);
    CHECK(s.jaccard(s) == 1.0);
    CHECK_THROWS_AS(s.merged(MinHash::build({1}, 16, 2)), invalid_argument);
    CHECK_THROWS_AS(s.jaccard(MinHash::build({1}, 8, 1)), invalid_argument);
    CHECK_THROWS_AS(MinHash::build({}, 16, 1), invalid_argument);
}

TEST_CASE("MinHash Jaccard accuracy") {
    const unsigned k = minhash_k(0.1, 0.05);
    SeedStream rng(2);
    int within = 0, disjoint_small = 0;
    for (int run = 0; run < 200; ++run) {
        auto [a, b] = jaccard_pair(rng, 100, 50);  // J = 100 / 200
        auto sa = MinHash::build(a, k, 1000 + run), sb = MinHash::build(b, k, 1000 + run);
        within += std::abs(sa.jaccard(sb) - 0.5) <= 0.1;
        auto [c, d] = jaccard_pair(rng, 0, 300);
        disjoint_small += MinHash::build(c, k, run).jaccard(MinHash::build(d, k, run)) <= 0.1;
    }
    CHECK(within >= 190);
    CHECK(disjoint_small >= 190);
}

TEST_CASE("LSH s-curve and band fitting") {
    CHECK(std::abs(lsh_scurve(0.4, 10, 1200) - 0.999) <= 0.001);
    CHECK(std::abs(lsh_scurve(0.7, 10, 1200) - 0.007) <= 0.001);
    CHECK(lsh_scurve(0.0, 3, 7) == 1.0);
    CHECK(lsh_scurve(1.0, 3, 7) == 0.0);
    CHECK(lsh_fit_r(100000, 0.9) == 5);
    CHECK(std::abs(lsh_scurve(0.85, 5, 100000) - 0.99949) <= 0.0005);
    CHECK(std::abs(lsh_scurve(0.95, 5, 100000) - 0.03076) <= 0.0005);
    // The fitted r is the largest band width whose curve is still >= 1/2 at the center.
    for (unsigned b : {10U, 100U, 1000U, 10000U, 100000U}) {
        for (double d : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            unsigned r = lsh_fit_r(b, d);
            REQUIRE(lsh_scurve(d, r, b) >= 0.5);
            REQUIRE(lsh_scurve(d, r + 1, b) < 0.5);
        }
    }
    CHECK_THROWS_AS(lsh_fit_r(10, 0.0), invalid_argument);
    CHECK_THROWS_AS(lsh_fit_r(10, 1.0), invalid_argument);
    CHECK_THROWS_AS(lsh_scurve(1.5, 1, 1), invalid_argument);
}

TEST_CASE("LSH nearest-neighbor index") {
    const unsigned r = 5, b = 20;
    LshIndex empty(r, b);
    CHECK_FALSE(empty.query(MinHash::build({1, 2}, r * b, 0), 0.5).id.has_value());

    SeedStream rng(3);
    int found = 0, far_checked = 0;
    for (int run = 0; run < 100; ++run) {
        auto [near_a, near_b] = jaccard_pair(rng, 950, 25);  // distance 0.05
        auto [far_a, far_b] = jaccard_pair(rng, 50, 475);    // distance 0.95
        std::uint64_t seed = 500 + run;
        LshIndex ix(r, b);
        ix.insert(1, MinHash::build(near_a, r * b, seed));
        REQUIRE(ix.tables_containing(1) == b);
        found += ix.query(MinHash::build(near_b, r * b, seed), 0.2).id == std::optional<std::uint64_t>(1);

        LshIndex far(r, b);
        far.insert(2, MinHash::build(far_a, r * b, seed));
        far_checked += far.query(MinHash::build(far_b, r * b, seed), 0.2).candidates > 0;
    }
    CHECK(found >= 99);
    CHECK(far_checked <= 5);

    // Candidate budget: many identical items, verifier that rejects all.
    LshIndex crowd(2, 3);
    auto same = MinHash::build({9, 8, 7}, 6, 1);
    for (std::uint64_t id = 0; id < 10; ++id) crowd.insert(id, same);
    auto res = crowd.query(same, 0.0, [](std::uint64_t) { return 1.0; }, 4);
    CHECK(res.truncated);
    CHECK(res.candidates == 4);
    CHECK_FALSE(res.id.has_value());
    auto all = crowd.query(same, 0.0, [](std::uint64_t) { return 1.0; });
    CHECK(all.candidates == 10);
    CHECK_FALSE(all.truncated);
    CHECK_THROWS_AS(crowd.insert(3, same), invalid_argument);
    CHECK_THROWS_AS(crowd.insert(99, MinHash::build({1}, 5, 1)), invalid_argument);
}

TEST_CASE("Hamming sketch") {
    std::string x(1000, '0');
    std::mt19937_64 gen(4);
    for (auto& c : x) c = static_cast<char>('0' + gen() % 2);
    std::string comp = x;
    for (auto& c : comp) c = c == '0' ? '1' : '0';
    CHECK(hamming_estimate(x, x, 50, 1) == 0.0);
    CHECK(hamming_estimate(x, comp, 50, 1) == 1.0);
    CHECK_THROWS_AS(hamming_estimate("ab", "abc", 5, 1), invalid_argument);

    int good = 0;
    for (int run = 0; run < 200; ++run) {
        std::string y = x;
        std::vector<std::size_t> idx(x.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), gen);
        for (std::size_t i = 0; i < 300; ++i) y[idx[i]] = y[idx[i]] == '0' ? '1' : '0';  // d_H / n = 0.3
        good += std::abs(hamming_estimate(x, y, 2000, run) - 0.3) <= 0.05;
    }
    CHECK(good >= 190);
}

TEST_CASE("Morris counter") {
    CHECK(MorrisCounter(1).estimate() == 0.0);
    MorrisCounter one(1);
    one.tick();
    CHECK(one.estimate() == 1.0);

    double sum_tick = 0, sum_advance = 0;
    for (std::uint64_t c = 0; c < 2000; ++c) {
        MorrisCounter a(c), b(c + 100000);
        for (int i = 0; i < 10000; ++i) a.tick();
        b.advance(10000);
        sum_tick += a.estimate();
        sum_advance += b.estimate();
    }
    CHECK(relative_error(sum_tick / 2000, 10000) <= 0.05);
    CHECK(relative_error(sum_advance / 2000, 10000) <= 0.05);

    MorrisCounter huge(5);
    huge.advance(~0ULL);
    CHECK(huge.exponent() <= MorrisCounter::max_exponent);
}

TEST_CASE("boosted Morris counter") {
    auto cfg = boost_config(0.5, 0.1, 0.5);  // Var <= m^2 / 2
    CHECK(cfg.s == 6);
    CHECK(cfg.t == 166);
    const std::uint64_t m = 100000;
    int good = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
        double est = boost_mean_median(cfg, [&](std::uint64_t i) {
            MorrisCounter c(run * 1000003 + i);
            c.advance(m);
            return c.estimate();
        });
        good += relative_error(est, m) <= 0.5;
    }
    CHECK(good >= 90);
}

TEST_CASE("bottom-k distinct counter") {
    CHECK(bottom_k_size(0.25) == 384);
    DistinctCounter small(384, 1);
    for (std::uint64_t x = 0; x < 100; ++x) {
        small.offer(x);
        small.offer(x);
    }
    CHECK(small.estimate() == 100.0);

    DistinctCounter a(50, 2), b(50, 2);
    std::vector<std::uint64_t> keys(5000);
    for (std::uint64_t i = 0; i < keys.size(); ++i) keys[i] = i * 31 + 7;
    for (auto x : keys) a.offer(x);
    std::mt19937_64 gen(5);
    std::shuffle(keys.begin(), keys.end(), gen);
    for (auto x : keys) b.offer(x);
    for (auto x : keys) b.offer(x);
    CHECK(a.values() == b.values());
    CHECK(a.estimate() == b.estimate());
    auto v = a.values();
    CHECK(v.size() == 50);
    CHECK(std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end());

    const std::uint64_t d = 10000;
    int single_good = 0;
    for (std::uint64_t run = 0; run < 300; ++run) {
        auto c = DistinctCounter::for_accuracy(0.25, run);
        for (std::uint64_t x = 0; x < d; ++x) c.offer(x + run * d);
        single_good += relative_error(c.estimate(), d) <= 0.25;
    }
    CHECK(single_good >= 200);

    int median_good = 0;
    for (std::uint64_t run = 0; run < 60; ++run) {
        std::vector<double> ests;
        for (std::uint64_t i = 0; i < 30; ++i) {
            auto c = DistinctCounter::for_accuracy(0.25, run * 100 + i + 7777);
            for (std::uint64_t x = 0; x < d; ++x) c.offer(x + run * d);
            ests.push_back(c.estimate());
        }
        median_good += relative_error(lower_median(ests), d) <= 0.25;
    }
    CHECK(median_good >= 57);
}

TEST_CASE("single-register distinct estimate") {
    UnitHash h(3);
    CHECK(fm_single_estimate({42, 42, 42}, 3) == doctest::Approx(1.0 / h(42) - 1.0));
    CHECK(fm_single_estimate({42}, 3) > 0);
    std::vector<std::uint64_t> s{5, 9, 1, 5, 9};
    std::vector<std::uint64_t> twice = s;
    twice.insert(twice.end(), s.begin(), s.end());
    CHECK(fm_single_estimate(s, 4) == fm_single_estimate(twice, 4));
    CHECK_THROWS_AS(fm_single_estimate({}, 1), invalid_argument);

    double sum = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        sum += fm_single_minimum({11, 22, 33, 44, 55, 66, 77, 88, 99}, seed);
    }
    CHECK(relative_error(sum / 10000, 0.1) <= 0.1);
}

TEST_CASE("DGIM structure and bound") {
    DgimWindow zeros(100, 0.5);
    for (int i = 0; i < 500; ++i) zeros.push(false);
    for (std::uint64_t m = 0; m <= 100; ++m) REQUIRE(zeros.count(m) == 0);
    CHECK_THROWS_AS(zeros.count(101), invalid_argument);
    CHECK_THROWS_AS(DgimWindow(0, 0.5), invalid_argument);
    CHECK_THROWS_AS(DgimWindow(10, 1.5), invalid_argument);

    for (double eps : {1.0, 0.5, 0.1}) {
        const std::uint64_t window = 1000;
        DgimWindow w(window, eps), twin(window, eps);
        std::mt19937_64 gen(static_cast<std::uint64_t>(eps * 1000));
        std::vector<std::uint64_t> prefix{0};
        std::uint64_t violations = 0, queries = 0;
        for (int t = 0; t < 20000; ++t) {
            // Bursty density so groups of many sizes appear.
            unsigned density = (t / 2000) % 4;
            bool bit = gen() % 4 < density;
            w.push(bit);
            twin.push(bit);
            prefix.push_back(prefix.back() + bit);
            REQUIRE(dgim_matches_stream(w, prefix));
            if (t % 40 == 0) {
                for (int qi = 0; qi < 50; ++qi) {
                    std::uint64_t span = gen() % (window + 1);
                    std::uint64_t lo = w.now() > span ? w.now() - span : 0;
                    std::uint64_t truth = prefix[w.now()] - prefix[lo];
                    std::uint64_t est = w.count(span);
                    ++queries;
                    violations += est < truth || static_cast<double>(est) > (1 + eps) * static_cast<double>(truth);
                }
            }
        }
        CHECK(queries > 0);
        CHECK(violations == 0);
        CHECK(w.groups().size() == twin.groups().size());
        for (std::size_t i = 0; i < w.groups().size(); ++i) {
            REQUIRE(w.groups()[i].left == twin.groups()[i].left);
            REQUIRE(w.groups()[i].exponent == twin.groups()[i].exponent);
        }
        // A span that ends exactly at the newest group's oldest bit is exact.
        const auto& newest = w.groups().back();
        std::uint64_t span = w.now() - newest.left + 1;
        CHECK(w.count(span) == prefix[w.now()] - prefix[newest.left - 1]);
    }
}

TEST_CASE("DGIM integer sums") {
    DgimSum zeros(50, 0.5, 4);
    for (int i = 0; i < 100; ++i) zeros.push(0);
    CHECK(zeros.sum(50) == 0);
    CHECK_THROWS_AS(zeros.push(16), invalid_argument);

    // Lanes carry the binary digits of the values.
    DgimSum three(16, 0.1, 3);
    const std::uint64_t stream[] = {5, 3, 7, 0, 6, 1, 2, 4};
    for (auto v : stream) three.push(v);
    for (unsigned i = 0; i < 3; ++i) {
        std::uint64_t ones = 0;
        for (auto v : stream) ones += (v >> i) & 1;
        CHECK(three.lane(i).count(8) == ones);
    }
    CHECK(three.sum(8) == 28);

    for (double eps : {1.0, 0.5, 0.1}) {
        DgimSum s(500, eps, 5);
        std::mt19937_64 gen(9);
        std::vector<std::uint64_t> prefix{0};
        for (int t = 0; t < 5000; ++t) {
            std::uint64_t v = gen() % 32;
            s.push(v);
            prefix.push_back(prefix.back() + v);
            if (t % 50 == 0) {
                std::uint64_t span = 1 + gen() % 500;
                std::uint64_t n = prefix.size() - 1;
                std::uint64_t truth = prefix[n] - prefix[n > span ? n - span : 0];
                auto est = s.sum(span);
                REQUIRE(est >= truth);
                REQUIRE(static_cast<double>(est) <= (1 + eps) * static_cast<double>(truth));
            }
        }
    }

    DgimSum constant(64, 0.5, 3);
    for (int t = 0; t < 200; ++t) constant.push(5);
    for (std::uint64_t span : {1ULL, 8ULL, 32ULL, 64ULL}) {
        CHECK(constant.sum(span) >= span * 5);
        CHECK(static_cast<double>(constant.sum(span)) <= 1.5 * static_cast<double>(span * 5));
    }
}

TEST_CASE("mean and median boosting") {
    CHECK(boost_mean_median(1, 1, [](std::uint64_t) { return 3.25; }) == 3.25);
    CHECK(boost_mean_median(3, 5, [](std::uint64_t) { return -2.0; }) == -2.0);
    CHECK(lower_median({4, 1, 3, 2}) == 2);
    CHECK(lower_median({5, 1, 3}) == 3);
    CHECK(boost_config(0.1, 0.05, 1.0).t == static_cast<unsigned>(std::ceil(72 * std::log(20.0))));

    // Exponential samples: mean 1, variance 1.
    auto cfg = boost_config(0.5, 0.1, 1.0);
    int failures = 0;
    for (std::uint64_t trial = 0; trial < 400; ++trial) {
        double est = boost_mean_median(cfg, [&](std::uint64_t i) {
            SeedStream rng(trial * 1000003 + i);
            return -std::log(1.0 - rng.unit());
        });
        failures += std::abs(est - 1.0) >= 0.5;
    }
    CHECK(failures <= 60);
}

TEST_CASE("sketch serialization") {
    auto mh = MinHash::build({1, 2, 3, 4}, 32, 9);
    auto mh_bytes = serialize(mh);
    CHECK(peek_sketch_kind(mh_bytes) == SketchKind::minhash);
    CHECK(deserialize<MinHash>(mh_bytes) == mh);

    MorrisCounter m(3);
    m.advance(1000);
    auto m_bytes = serialize(m);
    auto m2 = deserialize<MorrisCounter>(m_bytes);
    CHECK(m2.exponent() == m.exponent());
    m.advance(5000);
    m2.advance(5000);
    CHECK(m2.exponent() == m.exponent());  // generator state survives the round trip

    DistinctCounter dc(20, 4);
    for (std::uint64_t x = 0; x < 100; ++x) dc.offer(x);
    auto dc_bytes = serialize(dc);
    CHECK(peek_sketch_kind(dc_bytes) == SketchKind::distinct);
    CHECK(deserialize<DistinctCounter>(dc_bytes).values() == dc.values());
    auto tampered = dc_bytes;
    tampered[tampered.size() - 1] ^= 1;  // last stored key no longer matches its hash
    CHECK_THROWS_AS(deserialize<DistinctCounter>(tampered), corrupt_artifact);

    DgimWindow w(64, 0.5);
    for (int i = 0; i < 300; ++i) w.push(i % 3 != 0);
    auto w_bytes = serialize(w);
    auto w2 = deserialize<DgimWindow>(w_bytes);
    for (std::uint64_t span = 0; span <= 64; ++span) REQUIRE(w2.count(span) == w.count(span));
    auto broken = w_bytes;
    broken[broken.size() - 1] = 9;  // newest group claims 2^9 bits
    CHECK_THROWS_AS(deserialize<DgimWindow>(broken), corrupt_artifact);
    CHECK_THROWS_AS(deserialize<MinHash>(w_bytes), corrupt_artifact);
    CHECK_THROWS_AS(peek_sketch_kind("MDTF\x01\x01\x00"), corrupt_artifact);
}
