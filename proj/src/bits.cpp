#include "mdt/bits.hpp"

namespace mdt {

PackedBits PackedBits::from_string(std::string_view s) {
    PackedBits b(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '0' && s[i] != '1') throw invalid_argument("bit string may contain only 0 and 1");
        b.set(i, s[i] == '1');
    }
    return b;
}

std::uint64_t PackedBits::extract(std::uint64_t i, unsigned len) const {
    if (len == 0 || len > 64) throw bounds_error("extract length must be in [1, 64]");
    if (i == 0 || i + len - 1 > n_) throw bounds_error("extract range outside bitvector");
    return read(i - 1, len);
}

std::string PackedBits::to_string() const {
    std::string s(n_, '0');
    for (std::uint64_t i = 0; i < n_; ++i) s[i] = get(i) ? '1' : '0';
    return s;
}

void PackedBits::save(serial::Writer& w) const {
    w.u64(n_);
    w.words(words_);
}

PackedBits PackedBits::load(serial::Reader& r) {
    PackedBits b;
    b.n_ = r.u64();
    b.words_ = r.words();
    r.expect(b.words_.size() == (b.n_ + 63) / 64, "bit length disagrees with word count");
    if (b.n_ % 64 != 0 && !b.words_.empty()) {
        r.expect((b.words_.back() & low_mask(64 - b.n_ % 64)) == 0, "nonzero padding bits");
    }
    return b;
}

PackedIntArray::PackedIntArray(std::uint64_t count, unsigned width)
    : count_(count), width_(width), bits_(count * width) {
    if (width == 0 || width > 64) throw invalid_argument("element width must be in [1, 64]");
}

void PackedIntArray::save(serial::Writer& w) const {
    w.u64(count_);
    w.u8(static_cast<std::uint8_t>(width_));
    bits_.save(w);
}

PackedIntArray PackedIntArray::load(serial::Reader& r) {
    PackedIntArray a;
    a.count_ = r.u64();
    a.width_ = r.u8();
    r.expect(a.width_ >= 1 && a.width_ <= 64, "bad element width");
    a.bits_ = PackedBits::load(r);
    r.expect(a.bits_.size() == a.count_ * a.width_, "element count disagrees with bit length");
    return a;
}

} // namespace mdt
