#include "mdt/text_index.hpp"

#include <algorithm>

namespace mdt {

FmIndex::FmIndex(std::string_view plain) {
    const std::string t = terminated_text(plain);
    n_ = t.size();
    rho_ = std::max(1u, ceil_log2(n_));
    const auto sa = suffix_array_internal(t);
    const auto isa = inverse_permutation(sa);

    std::string bwt(n_, '\0');
    for (std::uint64_t i = 0; i < n_; ++i) bwt[i] = t[(sa[i] + n_ - 2) % n_];
    wt_ = WaveletTree(bwt);
    for (unsigned char ch : t) ++c_[ch + 1];
    for (std::size_t k = 1; k < c_.size(); ++k) c_[k] += c_[k - 1];

    PackedBits mark(n_);
    std::vector<std::uint64_t> sampled;
    for (std::uint64_t i = 0; i < n_; ++i) {
        if (sa[i] % rho_ == 0 || sa[i] == 1) {
            mark.set(i, true);
            sampled.push_back(sa[i]);
        }
    }
    mark_ = RsBitvector(mark);
    ssa_ = PackedIntArray(sampled.size(), bits_for(n_));
    for (std::size_t k = 0; k < sampled.size(); ++k) ssa_.set(k, sampled[k]);

    isa_samples_ = PackedIntArray(n_ / rho_, bits_for(n_));
    for (std::uint64_t k = 1; k * rho_ <= n_; ++k) isa_samples_.set(k - 1, isa[k * rho_ - 1]);
    isa_last_ = isa[n_ - 1];
    primary_ = isa[0];
}

std::uint64_t FmIndex::lf(std::uint64_t i) const {
    if (i == 0 || i > n_) throw bounds_error("row outside BWT");
    std::uint8_t c = wt_.access(i);
    return c_[c] + wt_.rank(c, i);
}

std::uint64_t FmIndex::sa_at(std::uint64_t i, unsigned* steps) const {
    if (i == 0 || i > n_) throw bounds_error("row outside suffix array");
    std::uint64_t row = i, k = 0;
    while (!mark_.get(row - 1)) {
        row = lf(row);
        ++k;
    }
    if (steps) *steps = static_cast<unsigned>(k);
    return ssa_.get(mark_.rank1_unchecked(row) - 1) + k;
}

SaRange FmIndex::count(std::string_view pattern) const {
    if (pattern.empty()) return {};
    std::uint64_t l = 1, r = n_;
    for (std::size_t k = pattern.size(); k-- > 0;) {
        auto c = static_cast<std::uint8_t>(pattern[k]);
        if (c == 0 || c == static_cast<std::uint8_t>(sentinel_char) || !wt_.contains_symbol(c)) return {};
        l = c_[c] + wt_.rank(c, l - 1) + 1;
        r = c_[c] + wt_.rank(c, r);
        if (l > r) return {};
    }
    return SaRange{l, r};
}

std::vector<std::uint64_t> FmIndex::locate(std::string_view pattern) const {
    SaRange r = count(pattern);
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = r.lo; i <= r.hi; ++i) out.push_back(sa_at(i));
    std::sort(out.begin(), out.end());
    return out;
}

// Row holding the suffix that starts at text position p, for 1 <= p <= n + 1;
// position n + 1 wraps to the primary row.
std::uint64_t FmIndex::row_of_position(std::uint64_t p) const {
    if (p == n_ + 1) return primary_;
    std::uint64_t sample = (p + rho_ - 1) / rho_ * rho_;
    std::uint64_t row = sample > n_ ? isa_last_ : isa_samples_.get(sample / rho_ - 1);
    for (std::uint64_t q = std::min(sample, n_); q > p; --q) row = lf(row);
    return row;
}

std::string FmIndex::extract(std::uint64_t i, std::uint64_t len) const {
    if (i == 0 || i > n_ || len > n_ - i + 1) throw bounds_error("extract range outside text");
    std::string out(len, '\0');
    std::uint64_t row = row_of_position(i + len);
    for (std::uint64_t k = len; k-- > 0;) {
        std::uint8_t c = wt_.access(row);
        out[k] = c == 0 ? sentinel_char : static_cast<char>(c);
        row = c_[c] + wt_.rank(c, row);
    }
    return out;
}

std::uint64_t FmIndex::sample_bits() const {
    return 64 * c_.size() + mark_.space_bits() + ssa_.bits_used() + isa_samples_.bits_used() + 128;
}

void FmIndex::save(serial::Writer& w) const {
    w.header("MDTI", static_cast<std::uint8_t>(IndexKind::fm), version);
    w.u64(n_);
    w.u16(static_cast<std::uint16_t>(wt_.code().codewords().size()));
    w.u8(static_cast<std::uint8_t>(rho_));
    wt_.save(w);
    mark_.save(w);
    ssa_.save(w);
    isa_samples_.save(w);
    w.u64(isa_last_);
    w.u64(primary_);
}

FmIndex FmIndex::load(serial::Reader& r) {
    r.expect(r.header("MDTI", version) == static_cast<std::uint8_t>(IndexKind::fm), "expected an FM index");
    FmIndex x;
    x.n_ = r.u64();
    std::uint16_t sigma = r.u16();
    x.rho_ = r.u8();
    r.expect(x.n_ >= 1 && sigma >= 1 && sigma <= 256, "bad index dimensions");
    r.expect(x.rho_ == std::max(1u, ceil_log2(x.n_)), "sample rate does not match text length");
    x.wt_ = WaveletTree::load(r);
    r.expect(x.wt_.size() == x.n_ && x.wt_.code().codewords().size() == sigma, "wavelet tree dimensions mismatch");
    r.expect(x.wt_.contains_symbol(0) && x.wt_.rank(0, x.n_) == 1, "BWT must hold exactly one terminator");
    for (const auto& [c, cw] : x.wt_.code().codewords()) x.c_[c + 1] = x.wt_.rank(c, x.n_);
    for (std::size_t k = 1; k < x.c_.size(); ++k) x.c_[k] += x.c_[k - 1];
    x.mark_ = RsBitvector::load(r);
    x.ssa_ = PackedIntArray::load(r);
    x.isa_samples_ = PackedIntArray::load(r);
    x.isa_last_ = r.u64();
    x.primary_ = r.u64();
    r.expect(x.mark_.size() == x.n_ && x.ssa_.size() == x.mark_.ones(), "sample arrays mismatch");
    r.expect(x.isa_samples_.size() == x.n_ / x.rho_, "inverse sample count mismatch");
    r.expect(x.isa_last_ >= 1 && x.isa_last_ <= x.n_ && x.primary_ >= 1 && x.primary_ <= x.n_,
             "inverse samples outside range");
    r.expect(x.wt_.access(x.primary_) == 0, "primary row must hold the terminator");
    return x;
}

} // namespace mdt
