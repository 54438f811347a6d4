#include "mdt/sketches.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace mdt {

namespace {

constexpr std::string_view sketch_magic = "MDTS";
constexpr std::uint16_t sketch_version = 1;

std::uint64_t coordinate_seed(std::uint64_t seed, unsigned i) {
    return mix64(seed) + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1);
}

void check_probability(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) throw invalid_argument(what);
}

} // namespace

SketchKind peek_sketch_kind(std::string_view bytes) {
    if (bytes.size() < 7 || bytes.substr(0, 4) != sketch_magic) throw corrupt_artifact("not a sketch artifact");
    auto kind = static_cast<std::uint8_t>(bytes[4]);
    if (kind < 1 || kind > 4) throw corrupt_artifact("unknown sketch kind");
    return static_cast<SketchKind>(kind);
}

UnitHash::UnitHash(std::uint64_t seed) {
    SeedStream rng(seed);
    a_ = 1 + rng.below(sketch_modulus - 1);
    b_ = rng.below(sketch_modulus);
}

std::uint64_t UnitHash::raw(std::uint64_t key) const {
    return addmod(mulmod(a_, mix64(key) % sketch_modulus, sketch_modulus), b_, sketch_modulus);
}

unsigned minhash_k(double epsilon, double delta) {
    check_probability(delta, "delta must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw invalid_argument("epsilon must be positive");
    return static_cast<unsigned>(std::ceil(2.0 * std::log(2.0 / delta) / (epsilon * epsilon)));
}

// MinHash.

MinHash::MinHash(unsigned k, std::uint64_t seed) : seed_(seed), minima_(k, sketch_modulus) {
    if (k == 0) throw invalid_argument("MinHash needs at least one coordinate");
    hashes_.reserve(k);
    for (unsigned i = 0; i < k; ++i) hashes_.emplace_back(coordinate_seed(seed, i));
}

MinHash MinHash::build(const std::vector<std::uint64_t>& keys, unsigned k, std::uint64_t seed) {
    if (keys.empty()) throw invalid_argument("MinHash of an empty set");
    MinHash s(k, seed);
    for (auto x : keys) s.offer(x);
    return s;
}

void MinHash::offer(std::uint64_t key) {
    for (std::size_t i = 0; i < minima_.size(); ++i) minima_[i] = std::min(minima_[i], hashes_[i].raw(key));
    ++offered_;
}

void MinHash::check_compatible(const MinHash& other) const {
    if (k() != other.k() || seed_ != other.seed_) throw invalid_argument("MinHash sketches differ in k or seed");
}

MinHash MinHash::merged(const MinHash& other) const {
    check_compatible(other);
    MinHash out = *this;
    for (std::size_t i = 0; i < minima_.size(); ++i) out.minima_[i] = std::min(minima_[i], other.minima_[i]);
    out.offered_ = offered_ + other.offered_;
    return out;
}

double MinHash::jaccard(const MinHash& other) const {
    check_compatible(other);
    if (empty() || other.empty()) throw invalid_argument("Jaccard estimate of an empty sketch");
    std::size_t agree = 0;
    for (std::size_t i = 0; i < minima_.size(); ++i) agree += minima_[i] == other.minima_[i];
    return static_cast<double>(agree) / static_cast<double>(minima_.size());
}

void MinHash::save(serial::Writer& w) const {
    w.header(sketch_magic, static_cast<std::uint8_t>(SketchKind::minhash), sketch_version);
    w.u32(k());
    w.u64(seed_);
    w.u64(offered_);
    for (auto v : minima_) w.u64(v);
}

MinHash MinHash::load(serial::Reader& r) {
    r.expect(r.header(sketch_magic, sketch_version) == static_cast<std::uint8_t>(SketchKind::minhash),
             "not a MinHash sketch");
    std::uint32_t k = r.u32();
    r.expect(k >= 1 && k <= (1U << 24), "implausible MinHash size");
    std::uint64_t seed = r.u64();
    MinHash s(k, seed);
    s.offered_ = r.u64();
    for (auto& v : s.minima_) {
        v = r.u64();
        r.expect(v <= sketch_modulus, "MinHash coordinate out of range");
        r.expect((v == sketch_modulus) == (s.offered_ == 0), "MinHash coordinates disagree with the key count");
    }
    return s;
}

// LSH.

double lsh_scurve(double distance, unsigned r, unsigned b) {
    if (!(distance >= 0.0 && distance <= 1.0)) throw invalid_argument("distance must lie in [0, 1]");
    if (r == 0 || b == 0) throw invalid_argument("r and b must be positive");
    double band = std::pow(1.0 - distance, static_cast<double>(r));
    if (band >= 1.0) return 1.0;
    return -std::expm1(static_cast<double>(b) * std::log1p(-band));
}

unsigned lsh_fit_r(unsigned b, double center_distance) {
    if (b == 0) throw invalid_argument("b must be positive");
    check_probability(center_distance, "center distance must lie in (0, 1)");
    double numer = std::log(-std::expm1(-std::log(2.0) / static_cast<double>(b)));
    double r = std::floor(numer / std::log1p(-center_distance));
    return r < 1.0 ? 1U : static_cast<unsigned>(r);
}

LshIndex::LshIndex(unsigned r, unsigned b) : r_(r), tables_(b) {
    if (r == 0 || b == 0) throw invalid_argument("r and b must be positive");
}

std::vector<std::uint64_t> LshIndex::band(const MinHash& sketch, unsigned j) const {
    if (sketch.k() < static_cast<std::uint64_t>(r_) * tables_.size()) {
        throw invalid_argument("sketch has fewer than r*b coordinates");
    }
    auto first = sketch.minima().begin() + static_cast<std::ptrdiff_t>(j) * r_;
    return {first, first + r_};
}

void LshIndex::insert(std::uint64_t id, const MinHash& sketch) {
    if (store_.count(id)) throw invalid_argument("id already indexed");
    for (unsigned j = 0; j < b(); ++j) tables_[j][band(sketch, j)].push_back(id);
    store_.emplace(id, sketch);
}

LshQueryResult LshIndex::query(const MinHash& sketch, double threshold, const Verifier& verifier,
                               std::uint64_t candidate_budget) const {
    LshQueryResult out;
    std::unordered_set<std::uint64_t> seen;
    for (unsigned j = 0; j < b(); ++j) {
        auto it = tables_[j].find(band(sketch, j));
        if (it == tables_[j].end()) continue;
        for (auto id : it->second) {
            if (!seen.insert(id).second) continue;
            if (out.candidates == candidate_budget) {
                out.truncated = true;
                return out;
            }
            ++out.candidates;
            if (verifier(id) <= threshold) {
                out.id = id;
                return out;
            }
        }
    }
    return out;
}

LshQueryResult LshIndex::query(const MinHash& sketch, double threshold, std::uint64_t candidate_budget) const {
    return query(sketch, threshold, [&](std::uint64_t id) { return 1.0 - store_.at(id).jaccard(sketch); },
                 candidate_budget);
}

unsigned LshIndex::tables_containing(std::uint64_t id) const {
    auto it = store_.find(id);
    if (it == store_.end()) return 0;
    unsigned n = 0;
    for (unsigned j = 0; j < b(); ++j) {
        auto bucket = tables_[j].find(band(it->second, j));
        if (bucket != tables_[j].end() && std::count(bucket->second.begin(), bucket->second.end(), id)) ++n;
    }
    return n;
}

// Hamming sketch.

std::vector<std::uint64_t> hamming_positions(std::uint64_t n, unsigned k, std::uint64_t seed) {
    if (n == 0) throw invalid_argument("Hamming sketch of an empty string");
    if (k == 0) throw invalid_argument("k must be positive");
    SeedStream rng(seed);
    std::vector<std::uint64_t> pos(k);
    for (auto& p : pos) p = rng.below(n);
    return pos;
}

double hamming_estimate(std::string_view x, std::string_view y, unsigned k, std::uint64_t seed) {
    if (x.size() != y.size()) throw invalid_argument("Hamming estimate needs equal lengths");
    unsigned differ = 0;
    for (auto p : hamming_positions(x.size(), k, seed)) differ += x[p] != y[p];
    return static_cast<double>(differ) / k;
}

// Morris counter.

void MorrisCounter::tick() {
    if (x_ == 0) {
        x_ = 1;
        return;
    }
    // The top X bits of a uniform word are all zero with probability 2^{-X}.
    if ((rng_.next() >> (64 - x_)) != 0) return;
    if (x_ == max_exponent) saturated_ = true;
    else ++x_;
}

void MorrisCounter::advance(std::uint64_t n) {
    while (n > 0) {
        if (x_ == 0) {
            x_ = 1;
            --n;
            continue;
        }
        // Trials up to and including the next success, geometric with p = 2^{-X}.
        double u = (static_cast<double>(rng_.next() >> 11) + 1.0) * 0x1.0p-53;
        double gap = std::floor(std::log(u) / std::log1p(-std::exp2(-static_cast<double>(x_)))) + 1.0;
        if (gap > static_cast<double>(n)) return;
        n -= static_cast<std::uint64_t>(gap);
        if (x_ == max_exponent) saturated_ = true;
        else ++x_;
    }
}

double MorrisCounter::estimate() const { return std::exp2(static_cast<double>(x_)) - 1.0; }

void MorrisCounter::save(serial::Writer& w) const {
    w.header(sketch_magic, static_cast<std::uint8_t>(SketchKind::morris), sketch_version);
    w.u8(static_cast<std::uint8_t>(x_));
    w.u8(saturated_ ? 1 : 0);
    w.u64(rng_.key());
    w.u64(rng_.counter());
}

MorrisCounter MorrisCounter::load(serial::Reader& r) {
    r.expect(r.header(sketch_magic, sketch_version) == static_cast<std::uint8_t>(SketchKind::morris),
             "not a Morris counter");
    MorrisCounter c(0);
    c.x_ = r.u8();
    std::uint8_t sat = r.u8();
    r.expect(c.x_ <= max_exponent && sat <= 1 && (sat == 0 || c.x_ == max_exponent), "bad Morris register");
    c.saturated_ = sat == 1;
    std::uint64_t key = r.u64();
    c.rng_ = SeedStream::resume(key, r.u64());
    return c;
}

// Bottom-k distinct counter.

unsigned bottom_k_size(double epsilon) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw invalid_argument("epsilon must lie in (0, 1]");
    return static_cast<unsigned>(std::ceil(24.0 / (epsilon * epsilon)));
}

DistinctCounter::DistinctCounter(unsigned k, std::uint64_t seed) : k_(k), seed_(seed), hash_(seed) {
    if (k_ == 0) throw invalid_argument("k must be positive");
}

void DistinctCounter::offer(std::uint64_t key) {
    std::pair<std::uint64_t, std::uint64_t> item{hash_.raw(key), key};
    if (kept_.size() == k_ && item >= *kept_.rbegin()) return;
    if (!kept_.insert(item).second) return;
    if (kept_.size() > k_) kept_.erase(std::prev(kept_.end()));
}

double DistinctCounter::estimate() const {
    if (kept_.size() < k_) return static_cast<double>(kept_.size());
    double yk = static_cast<double>(kept_.rbegin()->first) / sketch_modulus;
    return static_cast<double>(k_) / yk;
}

std::vector<double> DistinctCounter::values() const {
    std::vector<double> out;
    out.reserve(kept_.size());
    for (const auto& item : kept_) out.push_back(static_cast<double>(item.first) / sketch_modulus);
    return out;
}

void DistinctCounter::save(serial::Writer& w) const {
    w.header(sketch_magic, static_cast<std::uint8_t>(SketchKind::distinct), sketch_version);
    w.u32(k_);
    w.u64(seed_);
    w.u64(kept_.size());
    for (const auto& [h, key] : kept_) {
        w.u64(h);
        w.u64(key);
    }
}

DistinctCounter DistinctCounter::load(serial::Reader& r) {
    r.expect(r.header(sketch_magic, sketch_version) == static_cast<std::uint8_t>(SketchKind::distinct),
             "not a distinct counter");
    std::uint32_t k = r.u32();
    r.expect(k >= 1 && k <= (1U << 26), "implausible bottom-k size");
    DistinctCounter c(k, r.u64());
    std::uint64_t n = r.length(k);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint64_t h = r.u64();
        std::uint64_t key = r.u64();
        r.expect(h == c.hash_.raw(key), "stored hash does not match its key");
        r.expect(c.kept_.empty() || std::pair(h, key) > *c.kept_.rbegin(), "stored hashes are not increasing");
        c.kept_.emplace_hint(c.kept_.end(), h, key);
    }
    return c;
}

double fm_single_minimum(const std::vector<std::uint64_t>& keys, std::uint64_t seed) {
    if (keys.empty()) throw invalid_argument("distinct estimate of an empty stream");
    UnitHash h(seed);
    std::uint64_t best = sketch_modulus;
    for (auto x : keys) best = std::min(best, h.raw(x));
    return static_cast<double>(best) / sketch_modulus;
}

double fm_single_estimate(const std::vector<std::uint64_t>& keys, std::uint64_t seed) {
    return 1.0 / fm_single_minimum(keys, seed) - 1.0;
}

// DGIM.

DgimWindow::DgimWindow(std::uint64_t window, double epsilon) : window_(window) {
    if (window_ == 0) throw invalid_argument("window must be positive");
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw invalid_argument("epsilon must lie in (0, 1]");
    b_ = static_cast<unsigned>(std::ceil(1.0 / epsilon - 1e-12));
}

void DgimWindow::push(bool bit) {
    ++now_;
    while (!groups_.empty() && groups_.front().right + window_ <= now_) groups_.pop_front();
    if (!bit) return;
    groups_.push_back({now_, now_, 0});
    // Groups of equal size are adjacent; at B+2 of one size merge its two oldest.
    for (unsigned e = 0;; ++e) {
        std::size_t first = groups_.size(), same = 0;
        for (std::size_t i = groups_.size(); i-- > 0 && groups_[i].exponent <= e;) {
            if (groups_[i].exponent == e) {
                first = i;
                ++same;
            }
        }
        if (same < b_ + 2) break;
        groups_[first] = {groups_[first].left, groups_[first + 1].right, e + 1};
        groups_.erase(groups_.begin() + static_cast<std::ptrdiff_t>(first) + 1);
    }
}

std::uint64_t DgimWindow::count(std::uint64_t span) const {
    if (span > window_) throw invalid_argument("query span exceeds the window");
    std::uint64_t total = 0;
    for (auto it = groups_.rbegin(); it != groups_.rend() && it->right + span > now_; ++it) {
        total += 1ULL << it->exponent;
    }
    return total;
}

bool DgimWindow::well_formed() const {
    std::map<unsigned, std::uint64_t> per_size;
    for (std::size_t i = 0; i < groups_.size(); ++i) {
        const auto& g = groups_[i];
        if (g.left > g.right || g.left == 0 || g.right > now_ || g.right + window_ <= now_) return false;
        if (g.exponent > 63 || (g.exponent == 0 && g.left != g.right)) return false;
        if ((g.right - g.left + 1) < (1ULL << g.exponent)) return false;
        if (i > 0) {
            const auto& prev = groups_[i - 1];
            if (prev.right >= g.left) return false;
            if (g.exponent != prev.exponent && g.exponent + 1 != prev.exponent) return false;
        }
        ++per_size[g.exponent];
    }
    if (groups_.empty()) return true;
    unsigned largest = groups_.front().exponent;
    for (unsigned e = 0; e <= largest; ++e) {
        std::uint64_t z = per_size.count(e) ? per_size[e] : 0;
        if (z > b_ + 1) return false;
        if (e < largest && z < b_) return false;
    }
    return true;
}

void DgimWindow::save(serial::Writer& w) const {
    w.header(sketch_magic, static_cast<std::uint8_t>(SketchKind::dgim), sketch_version);
    w.u64(window_);
    w.u32(b_);
    w.u64(now_);
    w.u64(groups_.size());
    for (const auto& g : groups_) {
        w.u64(g.left);
        w.u64(g.right);
        w.u8(static_cast<std::uint8_t>(g.exponent));
    }
}

DgimWindow DgimWindow::load(serial::Reader& r) {
    r.expect(r.header(sketch_magic, sketch_version) == static_cast<std::uint8_t>(SketchKind::dgim),
             "not a DGIM window");
    std::uint64_t window = r.u64();
    std::uint32_t b = r.u32();
    r.expect(window >= 1 && b >= 1, "bad DGIM parameters");
    DgimWindow d(window, 1.0);
    d.b_ = b;
    d.now_ = r.u64();
    std::uint64_t n = r.length(1ULL << 24);
    for (std::uint64_t i = 0; i < n; ++i) {
        DgimGroup g{};
        g.left = r.u64();
        g.right = r.u64();
        g.exponent = r.u8();
        d.groups_.push_back(g);
    }
    r.expect(d.well_formed(), "DGIM groups break the structural rules");
    return d;
}

DgimSum::DgimSum(std::uint64_t window, double epsilon, unsigned bits) {
    if (bits == 0 || bits > 63) throw invalid_argument("value width must lie in [1, 63]");
    lanes_.assign(bits, DgimWindow(window, epsilon));
}

void DgimSum::push(std::uint64_t value) {
    if (value >> lanes_.size()) throw invalid_argument("value does not fit the declared width");
    for (std::size_t i = 0; i < lanes_.size(); ++i) lanes_[i].push((value >> i) & 1);
}

std::uint64_t DgimSum::sum(std::uint64_t span) const {
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < lanes_.size(); ++i) total += lanes_[i].count(span) << i;
    return total;
}

// Boosting.

BoostConfig boost_config(double epsilon, double delta, double variance_ratio) {
    if (!(epsilon > 0.0)) throw invalid_argument("epsilon must be positive");
    check_probability(delta, "delta must lie in (0, 1)");
    if (!(variance_ratio >= 0.0)) throw invalid_argument("variance ratio must be non-negative");
    auto s = static_cast<unsigned>(std::max(1.0, std::ceil(3.0 * variance_ratio / (epsilon * epsilon) - 1e-9)));
    auto t = static_cast<unsigned>(std::ceil(72.0 * std::log(1.0 / delta)));
    return {epsilon, delta, s, std::max(t, 1U)};
}

double lower_median(std::vector<double> values) {
    if (values.empty()) throw invalid_argument("median of nothing");
    auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

double boost_mean_median(unsigned s, unsigned t, const std::function<double(std::uint64_t)>& estimator) {
    if (s == 0 || t == 0) throw invalid_argument("s and t must be positive");
    std::vector<double> means(t);
    for (unsigned g = 0; g < t; ++g) {
        double sum = 0;
        for (unsigned j = 0; j < s; ++j) sum += estimator(static_cast<std::uint64_t>(g) * s + j);
        means[g] = sum / s;
    }
    return lower_median(std::move(means));
}

} // namespace mdt
