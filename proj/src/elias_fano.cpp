#include "mdt/elias_fano.hpp"

#include <algorithm>

namespace mdt {

namespace {

// max(1, ceil(log2(universe / m))): smallest w with m * 2^w >= universe.
unsigned suffix_width(std::uint64_t universe, std::uint64_t m) {
    unsigned w = 1;
    while (w < 63 && (static_cast<unsigned __int128>(m) << w) < universe) ++w;
    return w;
}

} // namespace

EliasFano::EliasFano(const std::vector<std::uint64_t>& values, std::uint64_t universe)
    : m_(values.size()), universe_(universe) {
    if (values.empty()) throw invalid_argument("Elias-Fano needs at least one value");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= universe) throw invalid_argument("value outside universe");
        if (i > 0 && values[i] < values[i - 1]) throw invalid_argument("values must be non-decreasing");
    }
    unsigned w = suffix_width(universe, m_);
    low_ = PackedIntArray(m_, w);
    std::uint64_t top = values.back() >> w;
    PackedBits high(m_ + top);
    std::uint64_t pos = 0, prev = 0;
    for (std::uint64_t i = 0; i < m_; ++i) {
        std::uint64_t prefix = values[i] >> w;
        pos += prefix - prev;  // zeros already present
        high.set(pos++, true);
        prev = prefix;
        low_.set(i, values[i] & low_mask(w));
    }
    high_ = RsBitvector(high);
}

std::uint64_t EliasFano::get(std::uint64_t i) const {
    if (i == 0 || i > m_) throw bounds_error("Elias-Fano index outside sequence");
    std::uint64_t prefix = high_.rank0(high_.select1(i));
    return (prefix << low_.width()) | low_.get(i - 1);
}

EfSearch EliasFano::search(std::uint64_t y) const {
    // Index of the first element >= y.
    std::uint64_t lo = 0, hi = m_;
    while (lo < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (get_unchecked(mid) < y) lo = mid + 1;
        else hi = mid;
    }
    EfSearch out;
    if (lo > 0) out.predecessor = get_unchecked(lo - 1);
    if (lo < m_) {
        out.successor = get_unchecked(lo);
        out.member = *out.successor == y;
    }
    return out;
}

std::vector<std::uint64_t> EliasFano::decode() const {
    std::vector<std::uint64_t> out;
    out.reserve(m_);
    std::uint64_t prefix = 0, idx = 0;
    for (std::uint64_t p = 0; p < high_.size(); ++p) {
        if (high_.get(p)) out.push_back((prefix << low_.width()) | low_.get(idx++));
        else ++prefix;
    }
    return out;
}

void EliasFano::save(serial::Writer& w) const {
    w.header("MDT1", tag, version);
    w.u64(m_);
    w.u64(universe_);
    low_.save(w);
    high_.save(w);
}

EliasFano EliasFano::load(serial::Reader& r) {
    r.expect(r.header("MDT1", version) == tag, "expected an Elias-Fano sequence");
    EliasFano e;
    e.m_ = r.u64();
    e.universe_ = r.u64();
    e.low_ = PackedIntArray::load(r);
    e.high_ = RsBitvector::load(r);
    r.expect(e.m_ >= 1 && e.low_.size() == e.m_, "low part length mismatch");
    r.expect(e.high_.ones() == e.m_, "high part must hold one 1-bit per element");
    r.expect(e.low_.width() == suffix_width(e.universe_, e.m_), "low width mismatch");
    return e;
}

} // namespace mdt
