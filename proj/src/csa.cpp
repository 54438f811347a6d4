#include "mdt/text_index.hpp"

#include <algorithm>

namespace mdt {

namespace {

unsigned sample_rate_for(std::uint64_t n) { return std::max(1u, ceil_log2(n)); }

// Pattern bytes must be symbols other than the terminator.
bool searchable(std::string_view pattern) {
    return !pattern.empty() &&
           std::none_of(pattern.begin(), pattern.end(), [](char c) { return c == '\0' || c == sentinel_char; });
}

} // namespace

CsaIndex::CsaIndex(std::string_view plain) {
    const std::string t = terminated_text(plain);
    n_ = t.size();
    rho_ = sample_rate_for(n_);
    const auto sa = suffix_array_internal(t);
    const auto isa = inverse_permutation(sa);
    const auto psi = psi_array(sa);

    PackedBits fo(n_);
    std::vector<std::vector<std::uint64_t>> runs;
    for (std::uint64_t i = 0; i < n_; ++i) {
        auto f = static_cast<std::uint8_t>(t[sa[i] - 1]);
        if (i == 0 || f != sigma_.back()) {
            fo.set(i, true);
            sigma_.push_back(f);
            runs.emplace_back();
        }
        runs.back().push_back(psi[i] - 1);
    }
    fo_ = RsBitvector(fo);
    for (const auto& run : runs) psi_c_.emplace_back(run, n_);

    PackedBits mark(n_);
    std::vector<std::uint64_t> sampled;
    for (std::uint64_t i = 0; i < n_; ++i) {
        if (sa[i] % rho_ == 0 || sa[i] == n_) {
            mark.set(i, true);
            sampled.push_back(sa[i]);
        }
    }
    mark_ = RsBitvector(mark);
    ssa_ = PackedIntArray(sampled.size(), bits_for(n_));
    for (std::size_t k = 0; k < sampled.size(); ++k) ssa_.set(k, sampled[k]);

    isa_samples_ = PackedIntArray((n_ - 1) / rho_ + 1, bits_for(n_));
    for (std::uint64_t k = 0; 1 + k * rho_ <= n_; ++k) isa_samples_.set(k, isa[k * rho_]);
}

std::uint8_t CsaIndex::first_symbol(std::uint64_t i) const { return sigma_[fo_.rank1_unchecked(i) - 1]; }

std::uint64_t CsaIndex::psi(std::uint64_t i) const {
    std::uint64_t k = fo_.rank1_unchecked(i);
    std::uint64_t start = fo_.select1(k);
    return psi_c_[k - 1].get_unchecked(i - start) + 1;
}

std::uint64_t CsaIndex::sa_at(std::uint64_t i, unsigned* steps) const {
    if (i == 0 || i > n_) throw bounds_error("row outside suffix array");
    std::uint64_t row = i, k = 0;
    while (!mark_.get(row - 1)) {
        row = psi(row);
        ++k;
    }
    if (steps) *steps = static_cast<unsigned>(k);
    return ssa_.get(mark_.rank1_unchecked(row) - 1) - k;
}

int CsaIndex::compare_suffix(std::uint64_t row, std::string_view pattern) const {
    for (char pc : pattern) {
        auto c = first_symbol(row);
        auto p = static_cast<std::uint8_t>(pc);
        if (c != p) return c < p ? -1 : 1;
        row = psi(row);
    }
    return 0;
}

SaRange CsaIndex::count(std::string_view pattern) const {
    if (!searchable(pattern)) return {};
    std::uint64_t lo = 1, hi = n_ + 1;
    while (lo < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (compare_suffix(mid, pattern) < 0) lo = mid + 1;
        else hi = mid;
    }
    std::uint64_t first = lo;
    hi = n_ + 1;
    while (lo < hi) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (compare_suffix(mid, pattern) <= 0) lo = mid + 1;
        else hi = mid;
    }
    return SaRange{first, lo - 1};
}

std::vector<std::uint64_t> CsaIndex::locate(std::string_view pattern) const {
    SaRange r = count(pattern);
    std::vector<std::uint64_t> out;
    for (std::uint64_t i = r.lo; i <= r.hi; ++i) out.push_back(sa_at(i));
    std::sort(out.begin(), out.end());
    return out;
}

std::string CsaIndex::extract(std::uint64_t i, std::uint64_t len) const {
    if (i == 0 || i > n_ || len > n_ - i + 1) throw bounds_error("extract range outside text");
    std::uint64_t k = (i - 1) / rho_;
    std::uint64_t row = isa_samples_.get(k);
    for (std::uint64_t p = 1 + k * rho_; p < i; ++p) row = psi(row);
    std::string out;
    out.reserve(len);
    for (std::uint64_t s = 0; s < len; ++s) {
        auto c = first_symbol(row);
        out.push_back(c == 0 ? sentinel_char : static_cast<char>(c));
        row = psi(row);
    }
    return out;
}

std::uint64_t CsaIndex::space_bits() const {
    std::uint64_t bits = 8 * sigma_.size() + fo_.space_bits() + mark_.space_bits() + ssa_.bits_used() +
                         isa_samples_.bits_used();
    for (const auto& e : psi_c_) bits += e.space_bits();
    return bits;
}

void CsaIndex::save(serial::Writer& w) const {
    w.header("MDTI", static_cast<std::uint8_t>(IndexKind::csa), version);
    w.u64(n_);
    w.u16(static_cast<std::uint16_t>(sigma_.size()));
    w.u8(static_cast<std::uint8_t>(rho_));
    for (auto c : sigma_) w.u8(c);
    fo_.save(w);
    for (const auto& e : psi_c_) e.save(w);
    mark_.save(w);
    ssa_.save(w);
    isa_samples_.save(w);
}

CsaIndex CsaIndex::load(serial::Reader& r) {
    r.expect(r.header("MDTI", version) == static_cast<std::uint8_t>(IndexKind::csa), "expected a CSA index");
    CsaIndex x;
    x.n_ = r.u64();
    std::uint16_t sigma = r.u16();
    x.rho_ = r.u8();
    r.expect(x.n_ >= 1 && sigma >= 1 && sigma <= 256 && sigma <= x.n_, "bad index dimensions");
    r.expect(x.rho_ == sample_rate_for(x.n_), "sample rate does not match text length");
    for (unsigned k = 0; k < sigma; ++k) x.sigma_.push_back(r.u8());
    r.expect(x.sigma_[0] == 0 && std::is_sorted(x.sigma_.begin(), x.sigma_.end()) &&
                 std::adjacent_find(x.sigma_.begin(), x.sigma_.end()) == x.sigma_.end(),
             "alphabet must be sorted, distinct and start with the terminator");
    x.fo_ = RsBitvector::load(r);
    r.expect(x.fo_.size() == x.n_ && x.fo_.ones() == sigma && x.fo_.access(1), "first-occurrence bitvector mismatch");
    std::uint64_t total = 0;
    for (unsigned k = 0; k < sigma; ++k) {
        x.psi_c_.push_back(EliasFano::load(r));
        total += x.psi_c_.back().size();
        r.expect(x.psi_c_.back().universe() == x.n_, "psi run universe mismatch");
    }
    r.expect(total == x.n_, "psi runs do not cover every row");
    for (unsigned k = 0; k < sigma; ++k) {
        std::uint64_t start = x.fo_.select1(k + 1);
        std::uint64_t end = k + 1 < sigma ? x.fo_.select1(k + 2) : x.n_ + 1;
        r.expect(x.psi_c_[k].size() == end - start, "psi run length disagrees with first-occurrence bitvector");
    }
    x.mark_ = RsBitvector::load(r);
    x.ssa_ = PackedIntArray::load(r);
    x.isa_samples_ = PackedIntArray::load(r);
    r.expect(x.mark_.size() == x.n_ && x.ssa_.size() == x.mark_.ones(), "sample arrays mismatch");
    r.expect(x.isa_samples_.size() == (x.n_ - 1) / x.rho_ + 1, "inverse sample count mismatch");
    return x;
}

} // namespace mdt
