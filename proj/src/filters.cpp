#include "mdt/filters.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace mdt {

namespace {

constexpr std::string_view filter_magic = "MDTF";
constexpr std::uint16_t filter_version = 1;

void check_probability(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) throw invalid_argument(what);
}

// Uniform reduction of a 64-bit hash to [0, range) by the high half of a 128-bit product.
std::uint64_t reduce(std::uint64_t h, std::uint64_t range) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * range) >> 64);
}

std::uint64_t hash_key(std::uint64_t seed, unsigned i) { return mix64(seed) + 0x9e3779b97f4a7c15ULL * (i + 1); }

} // namespace

FilterKind peek_filter_kind(std::string_view bytes) {
    if (bytes.size() < 7 || bytes.substr(0, 4) != filter_magic) throw corrupt_artifact("not a filter artifact");
    auto kind = static_cast<std::uint8_t>(bytes[4]);
    if (kind < 1 || kind > 3) throw corrupt_artifact("unknown filter kind");
    return static_cast<FilterKind>(kind);
}

double bloom_fpr(std::uint64_t m, unsigned k, std::uint64_t bits) {
    if (bits == 0) return 1.0;
    long double fill = -std::expm1(-static_cast<long double>(m) * k / static_cast<long double>(bits));
    return static_cast<double>(std::pow(fill, static_cast<long double>(k)));
}

BloomParams bloom_params(std::uint64_t m, double delta) {
    if (m == 0) throw invalid_argument("capacity must be positive");
    check_probability(delta, "delta must lie in (0, 1)");
    unsigned k = std::max(1U, static_cast<unsigned>(std::lround(std::log2(1.0 / delta))));
    // The rate is decreasing in M: grow an upper bound, then bisect to the least feasible M.
    std::uint64_t hi = std::max<std::uint64_t>(m, 1);
    while (bloom_fpr(m, k, hi) > delta) {
        if (hi > (1ULL << 62)) throw invalid_argument("delta too small for a 64-bit filter size");
        hi *= 2;
    }
    std::uint64_t lo = 0;  // infeasible
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (bloom_fpr(m, k, mid) <= delta) hi = mid;
        else lo = mid;
    }
    return {k, hi};
}

CountingBloomParams cbf_params(std::uint64_t m, double delta, double gamma) {
    check_probability(gamma, "gamma must lie in (0, 1)");
    BloomParams b = bloom_params(m, delta);
    double inner = std::log2(1.0 / delta) / gamma;
    unsigned t = 2;
    if (inner > 2.0) t = std::max(2U, static_cast<unsigned>(std::ceil(std::log2(std::log2(inner)))));
    return {b.k, b.bits, std::min(t, 64U)};
}

double cbf_overflow_bound(unsigned k, unsigned t) {
    return static_cast<double>(k) * std::exp2(-std::exp2(static_cast<double>(t)));
}

QuotientParams qf_params(std::uint64_t m, double delta, double alpha) {
    if (m == 0) throw invalid_argument("capacity must be positive");
    check_probability(delta, "delta must lie in (0, 1)");
    check_probability(alpha, "alpha must lie in (0, 1)");
    auto r = static_cast<unsigned>(std::ceil(std::log2(1.0 / delta) - 1e-12));
    auto q = static_cast<unsigned>(std::ceil(std::log2(static_cast<double>(m) / alpha) - 1e-12));
    r = std::max(r, 1U);
    q = std::max(q, 1U);
    if (q + r > 64) throw invalid_argument("fingerprint would exceed 64 bits");
    return {q, r};
}

// Bloom filter.

BloomFilter::BloomFilter(std::uint64_t capacity, unsigned k, std::uint64_t bits, std::uint64_t seed)
    : capacity_(capacity), k_(k), seed_(seed), bits_(bits) {
    if (k_ == 0) throw invalid_argument("k must be positive");
    if (bits == 0) throw invalid_argument("filter needs at least one bit");
}

BloomFilter BloomFilter::with_rate(std::uint64_t capacity, double delta, std::uint64_t seed) {
    auto p = bloom_params(capacity, delta);
    return BloomFilter(capacity, p.k, p.bits, seed);
}

std::uint64_t BloomFilter::position(unsigned i, std::uint64_t x) const {
    return reduce(Mixer(hash_key(seed_, i))(x), bits_.size());
}

void BloomFilter::insert(std::uint64_t x) {
    for (unsigned i = 0; i < k_; ++i) bits_.set(position(i, x), true);
    ++inserted_;
}

bool BloomFilter::contains(std::uint64_t x) const {
    for (unsigned i = 0; i < k_; ++i) {
        if (!bits_.get(position(i, x))) return false;
    }
    return true;
}

double BloomFilter::fill_ratio() const {
    return static_cast<double>(bits_.count_ones()) / static_cast<double>(bits_.size());
}

void BloomFilter::save(serial::Writer& w) const {
    w.header(filter_magic, static_cast<std::uint8_t>(FilterKind::bloom), filter_version);
    w.u64(capacity_);
    w.u32(k_);
    w.u64(seed_);
    w.u64(inserted_);
    bits_.save(w);
}

BloomFilter BloomFilter::load(serial::Reader& r) {
    r.expect(r.header(filter_magic, filter_version) == static_cast<std::uint8_t>(FilterKind::bloom), "not a Bloom filter");
    std::uint64_t capacity = r.u64();
    unsigned k = r.u32();
    std::uint64_t seed = r.u64();
    std::uint64_t inserted = r.u64();
    PackedBits bits = PackedBits::load(r);
    r.expect(k >= 1 && k <= 1024, "implausible hash count");
    r.expect(bits.size() >= 1, "empty bit array");
    BloomFilter f(capacity, k, 1, seed);
    f.bits_ = std::move(bits);
    f.inserted_ = inserted;
    return f;
}

// Counting Bloom filter.

CountingBloomFilter::CountingBloomFilter(std::uint64_t capacity, unsigned k, std::uint64_t counters, unsigned t,
                                         std::uint64_t seed)
    : capacity_(capacity), k_(k), seed_(seed) {
    if (k_ == 0) throw invalid_argument("k must be positive");
    if (counters == 0) throw invalid_argument("filter needs at least one counter");
    if (t == 0 || t > 64) throw invalid_argument("counter width must lie in [1, 64]");
    counters_ = PackedIntArray(counters, t);
}

CountingBloomFilter CountingBloomFilter::with_rate(std::uint64_t capacity, double delta, double gamma,
                                                   std::uint64_t seed) {
    auto p = cbf_params(capacity, delta, gamma);
    return CountingBloomFilter(capacity, p.k, p.counters, p.t, seed);
}

std::vector<std::uint64_t> CountingBloomFilter::positions(std::uint64_t x) const {
    std::vector<std::uint64_t> pos(k_);
    for (unsigned i = 0; i < k_; ++i) pos[i] = reduce(Mixer(hash_key(seed_, i))(x), counters_.size());
    return pos;
}

void CountingBloomFilter::insert(std::uint64_t x) {
    const std::uint64_t top = low_mask(counters_.width());
    for (auto p : positions(x)) {
        std::uint64_t c = counters_.get(p);
        if (c < top) counters_.set(p, c + 1);
    }
}

void CountingBloomFilter::remove(std::uint64_t x) {
    const std::uint64_t top = low_mask(counters_.width());
    auto pos = positions(x);
    std::sort(pos.begin(), pos.end());
    // A position hit j times needs a counter of at least j, unless it is saturated.
    for (std::size_t i = 0; i < pos.size();) {
        std::size_t j = i;
        while (j < pos.size() && pos[j] == pos[i]) ++j;
        std::uint64_t c = counters_.get(pos[i]);
        if (c != top && c < j - i) throw contract_violation("remove would take a counter below zero");
        i = j;
    }
    for (auto p : pos) {
        std::uint64_t c = counters_.get(p);
        if (c != top) counters_.set(p, c - 1);
    }
}

bool CountingBloomFilter::contains(std::uint64_t x) const {
    for (auto p : positions(x)) {
        if (counters_.get(p) == 0) return false;
    }
    return true;
}

std::uint64_t CountingBloomFilter::saturated() const {
    const std::uint64_t top = low_mask(counters_.width());
    std::uint64_t n = 0;
    for (std::uint64_t i = 0; i < counters_.size(); ++i) n += counters_.get(i) == top;
    return n;
}

void CountingBloomFilter::save(serial::Writer& w) const {
    w.header(filter_magic, static_cast<std::uint8_t>(FilterKind::counting_bloom), filter_version);
    w.u64(capacity_);
    w.u32(k_);
    w.u64(seed_);
    counters_.save(w);
}

CountingBloomFilter CountingBloomFilter::load(serial::Reader& r) {
    r.expect(r.header(filter_magic, filter_version) == static_cast<std::uint8_t>(FilterKind::counting_bloom),
             "not a counting Bloom filter");
    std::uint64_t capacity = r.u64();
    unsigned k = r.u32();
    std::uint64_t seed = r.u64();
    PackedIntArray counters = PackedIntArray::load(r);
    r.expect(k >= 1 && k <= 1024, "implausible hash count");
    r.expect(counters.size() >= 1, "empty counter array");
    CountingBloomFilter f(capacity, k, 1, counters.width(), seed);
    f.counters_ = std::move(counters);
    return f;
}

// Quotient filter.

QuotientFilter::QuotientFilter(unsigned q, unsigned r, std::uint64_t seed, double max_load)
    : q_(q), r_(r), seed_(seed), max_load_(max_load), mixer_(seed) {
    if (q_ < 1 || q_ > 40) throw invalid_argument("quotient bits must lie in [1, 40]");
    if (r_ < 1 || q_ + r_ > 64) throw invalid_argument("remainder bits must be positive with q + r <= 64");
    if (!(max_load_ > 0.0 && max_load_ < 1.0)) throw invalid_argument("maximum load must lie in (0, 1)");
    cells_ = PackedIntArray(1ULL << q_, r_ + 3);
}

std::pair<std::uint64_t, std::uint64_t> QuotientFilter::quotient_remainder(std::uint64_t x) const {
    std::uint64_t f = mixer_(x) >> (64 - (q_ + r_));
    return {f >> r_, f & low_mask(r_)};
}

void QuotientFilter::insert(std::uint64_t x) {
    auto [fq, fr] = quotient_remainder(x);
    insert_fingerprint(fq, fr);
}

void QuotientFilter::remove(std::uint64_t x) {
    auto [fq, fr] = quotient_remainder(x);
    remove_fingerprint(fq, fr);
}

bool QuotientFilter::contains(std::uint64_t x) const {
    auto [fq, fr] = quotient_remainder(x);
    return contains_fingerprint(fq, fr);
}

std::uint64_t QuotientFilter::cluster_start(std::uint64_t s) const {
    for (std::uint64_t steps = 0; is_shifted(s); ++steps) {
        if (steps >= slots()) throw contract_violation("quotient filter metadata is inconsistent");
        s = prev(s);
    }
    return s;
}

bool QuotientFilter::contains_fingerprint(std::uint64_t fq, std::uint64_t fr) const {
    if (fq >= slots() || fr > low_mask(r_)) throw invalid_argument("fingerprint out of range");
    if (!is_occupied(fq)) return false;
    // Walk from the cluster start, pairing each run with the next occupied quotient.
    std::uint64_t b = cluster_start(fq);
    std::uint64_t s = b;
    while (b != fq) {
        do s = next(s);
        while (is_continuation(s));
        do b = next(b);
        while (!is_occupied(b));
    }
    do {
        if (remainder_at(s) == fr) return true;
        s = next(s);
    } while (is_continuation(s));
    return false;
}

std::vector<QuotientFilter::Entry> QuotientFilter::decode_region(std::uint64_t start, std::uint64_t& end) const {
    std::vector<Entry> out;
    std::deque<std::uint64_t> pending;  // occupied quotients whose run has not started
    std::uint64_t current = 0;
    bool in_run = false;
    std::uint64_t s = start;
    for (std::uint64_t steps = 0; !is_empty_slot(s); s = next(s)) {
        if (++steps > slots()) throw contract_violation("quotient filter has no empty slot");
        if (is_occupied(s)) pending.push_back(s);
        if (!is_continuation(s)) {
            if (pending.empty()) throw contract_violation("run without an occupied quotient");
            current = pending.front();
            pending.pop_front();
            in_run = true;
        } else if (!in_run) {
            throw contract_violation("continuation at a region start");
        }
        out.emplace_back(current, remainder_at(s));
    }
    if (!pending.empty()) throw contract_violation("occupied quotient without a run");
    end = s;
    return out;
}

void QuotientFilter::layout(std::uint64_t start, std::vector<Entry> entries, std::uint64_t clear_len) {
    const std::uint64_t mask = slots() - 1;
    for (std::uint64_t i = 0; i < clear_len; ++i) cells_.set((start + i) & mask, 0);
    auto offset = [&](std::uint64_t quotient) { return (quotient - start) & mask; };
    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        return std::pair(offset(a.first), a.second) < std::pair(offset(b.first), b.second);
    });
    std::uint64_t pos = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto [quotient, rem] = entries[i];
        std::uint64_t home = offset(quotient);
        bool continuation = i > 0 && entries[i - 1].first == quotient;
        if (!continuation) pos = std::max(pos, home);
        std::uint64_t slot = (start + pos) & mask;
        std::uint64_t cell = (rem << 3) | (continuation ? continuation_bit : 0) | (pos != home ? shifted_bit : 0);
        cells_.set(slot, cell | (cells_.get(slot) & occupied_bit));
        ++pos;
    }
    for (const auto& e : entries) cells_.set(e.first, cells_.get(e.first) | occupied_bit);
}

void QuotientFilter::insert_fingerprint(std::uint64_t fq, std::uint64_t fr) {
    if (fq >= slots() || fr > low_mask(r_)) throw invalid_argument("fingerprint out of range");
    if (static_cast<double>(count_ + 1) > max_load_ * static_cast<double>(slots())) {
        throw capacity_error("quotient filter is at its maximum load");
    }
    std::uint64_t start = cluster_start(fq), end = 0;
    auto entries = decode_region(start, end);
    entries.emplace_back(fq, fr);
    layout(start, std::move(entries), (end - start) & (slots() - 1));
    ++count_;
}

void QuotientFilter::remove_fingerprint(std::uint64_t fq, std::uint64_t fr) {
    if (fq >= slots() || fr > low_mask(r_)) throw invalid_argument("fingerprint out of range");
    if (!is_occupied(fq)) throw contract_violation("remove of a fingerprint that is not stored");
    std::uint64_t start = cluster_start(fq), end = 0;
    auto entries = decode_region(start, end);
    auto it = std::find(entries.begin(), entries.end(), Entry{fq, fr});
    if (it == entries.end()) throw contract_violation("remove of a fingerprint that is not stored");
    entries.erase(it);
    layout(start, std::move(entries), (end - start) & (slots() - 1));
    --count_;
}

std::map<std::uint64_t, std::vector<std::uint64_t>> QuotientFilter::decode() const {
    std::map<std::uint64_t, std::vector<std::uint64_t>> runs;
    std::uint64_t empty = 0;
    while (empty < slots() && !is_empty_slot(empty)) ++empty;
    if (empty == slots()) throw contract_violation("quotient filter has no empty slot");
    std::uint64_t s = next(empty), visited = 1;
    while (visited < slots()) {
        if (is_empty_slot(s)) {
            s = next(s);
            ++visited;
            continue;
        }
        std::uint64_t end = 0;
        for (auto [quotient, rem] : decode_region(s, end)) runs[quotient].push_back(rem);
        visited += (end - s) & (slots() - 1);
        s = end;
    }
    return runs;
}

std::vector<std::uint64_t> QuotientFilter::cluster_lengths() const {
    std::vector<std::uint64_t> lengths;
    for (std::uint64_t s = 0; s < slots(); ++s) {
        if (is_empty_slot(s) || is_shifted(s)) continue;
        std::uint64_t len = 1;
        for (std::uint64_t t = next(s); len < slots() && is_shifted(t); t = next(t)) ++len;
        lengths.push_back(len);
    }
    return lengths;
}

bool QuotientFilter::coherent() const {
    try {
        auto runs = decode();
        QuotientFilter fresh(q_, r_, seed_, max_load_);
        std::uint64_t total = 0;
        for (const auto& [quotient, rems] : runs) {
            for (auto rem : rems) {
                fresh.insert_fingerprint(quotient, rem);
                ++total;
            }
        }
        return total == count_ && fresh.cells_ == cells_;
    } catch (const std::exception&) {
        return false;
    }
}

void QuotientFilter::save(serial::Writer& w) const {
    w.header(filter_magic, static_cast<std::uint8_t>(FilterKind::quotient), filter_version);
    w.u8(static_cast<std::uint8_t>(q_));
    w.u8(static_cast<std::uint8_t>(r_));
    w.u64(seed_);
    w.f64(max_load_);
    w.u64(count_);
    cells_.save(w);
}

QuotientFilter QuotientFilter::load(serial::Reader& r) {
    r.expect(r.header(filter_magic, filter_version) == static_cast<std::uint8_t>(FilterKind::quotient),
             "not a quotient filter");
    unsigned q = r.u8();
    unsigned rb = r.u8();
    std::uint64_t seed = r.u64();
    double max_load = r.f64();
    std::uint64_t count = r.u64();
    r.expect(q >= 1 && q <= 40 && rb >= 1 && q + rb <= 64, "bad quotient filter shape");
    r.expect(max_load > 0.0 && max_load < 1.0, "bad maximum load");
    PackedIntArray cells = PackedIntArray::load(r);
    r.expect(cells.size() == (1ULL << q) && cells.width() == rb + 3, "cell array does not match the shape");
    QuotientFilter f(q, rb, seed, max_load);
    f.cells_ = std::move(cells);
    f.count_ = count;
    r.expect(f.coherent(), "quotient filter metadata is inconsistent");
    return f;
}

} // namespace mdt
