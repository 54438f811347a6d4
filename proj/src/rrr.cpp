#include "mdt/rrr.hpp"

#include <algorithm>
#include <bit>

namespace mdt {

const std::array<std::array<std::uint64_t, 65>, 65>& binomial_table() {
    static const auto table = [] {
        std::array<std::array<std::uint64_t, 65>, 65> t{};
        for (unsigned n = 0; n <= 64; ++n) {
            t[n][0] = 1;
            for (unsigned k = 1; k <= n; ++k) t[n][k] = t[n - 1][k - 1] + (k <= n - 1 ? t[n - 1][k] : 0);
        }
        return t;
    }();
    return table;
}

std::uint64_t block_offset(std::uint64_t block, unsigned len) {
    const auto& c = binomial_table();
    unsigned ones = static_cast<unsigned>(std::popcount(block));
    std::uint64_t off = 0;
    for (unsigned j = len; j-- > 0 && ones > 0;) {
        // Strings with a 0 here come first.
        if ((block >> j) & 1) {
            off += c[j][ones];
            --ones;
        }
    }
    return off;
}

std::uint64_t block_decode(unsigned ones, std::uint64_t offset, unsigned len) {
    const auto& c = binomial_table();
    std::uint64_t block = 0;
    for (unsigned j = len; j-- > 0 && ones > 0;) {
        std::uint64_t with_zero = c[j][ones];
        if (offset >= with_zero) {
            offset -= with_zero;
            block |= 1ULL << j;
            --ones;
        }
    }
    return block;
}

unsigned RsBitvector::offset_width(unsigned cls) const {
    return std::max(1u, ceil_log2(binomial(b_, cls)));
}

RsBitvector::RsBitvector(const PackedBits& bits) : n_(bits.size()) {
    b_ = n_ < 4 ? 1 : std::clamp((ceil_log2(n_) + 1) / 2, 1u, 63u);
    std::uint64_t nblocks = (n_ + b_ - 1) / b_;
    std::uint64_t nmacro = (nblocks + b_ - 1) / b_;
    classes_ = PackedIntArray(nblocks, bits_for(b_));

    std::vector<std::uint64_t> macro_pos(nmacro), macro_rank(nmacro);
    std::vector<std::uint64_t> rel_pos(nblocks), rel_rank(nblocks);
    std::uint64_t pos = 0, rank = 0;
    for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
        if (blk % b_ == 0) {
            macro_pos[blk / b_] = pos;
            macro_rank[blk / b_] = rank;
        }
        rel_pos[blk] = pos - macro_pos[blk / b_];
        rel_rank[blk] = rank - macro_rank[blk / b_];

        std::uint64_t start = blk * b_;
        unsigned avail = static_cast<unsigned>(std::min<std::uint64_t>(b_, n_ - start));
        std::uint64_t block = bits.read(start, avail) << (b_ - avail);  // zero padding
        unsigned cls = static_cast<unsigned>(std::popcount(block));
        classes_.set(blk, cls);
        unsigned w = offset_width(cls);
        offsets_.push(block_offset(block, b_), w);
        pos += w;
        rank += cls;
    }
    ones_ = rank;

    unsigned macro_w = bits_for(std::max(pos, n_));
    macro_ = PackedIntArray(2 * nmacro, macro_w);
    for (std::uint64_t m = 0; m < nmacro; ++m) {
        macro_.set(2 * m, macro_pos[m]);
        macro_.set(2 * m + 1, macro_rank[m]);
    }
    unsigned rel_w = std::max(1u, ceil_log2(static_cast<std::uint64_t>(b_) * b_));
    block_ = PackedIntArray(2 * nblocks, rel_w);
    for (std::uint64_t blk = 0; blk < nblocks; ++blk) {
        block_.set(2 * blk, rel_pos[blk]);
        block_.set(2 * blk + 1, rel_rank[blk]);
    }
}

std::uint64_t RsBitvector::offset_start(std::uint64_t blk) const {
    return macro_.get(2 * (blk / b_)) + block_.get(2 * blk);
}

std::uint64_t RsBitvector::block_rank_before(std::uint64_t blk) const {
    return macro_.get(2 * (blk / b_) + 1) + block_.get(2 * blk + 1);
}

std::uint64_t RsBitvector::block_offset_value(std::uint64_t blk) const {
    unsigned cls = static_cast<unsigned>(classes_.get(blk));
    return offsets_.read(offset_start(blk), offset_width(cls));
}

std::uint64_t RsBitvector::decode_block(std::uint64_t blk) const {
    unsigned cls = static_cast<unsigned>(classes_.get(blk));
    if (cls == 0) return 0;
    if (cls == b_) return low_mask(b_);
    return block_decode(cls, offsets_.read(offset_start(blk), offset_width(cls)), b_);
}

bool RsBitvector::get(std::uint64_t p) const {
    std::uint64_t blk = p / b_;
    unsigned in = static_cast<unsigned>(p % b_);
    return (decode_block(blk) >> (b_ - 1 - in)) & 1;
}

bool RsBitvector::access(std::uint64_t i) const {
    if (i == 0 || i > n_) throw bounds_error("access position outside bitvector");
    return get(i - 1);
}

std::uint64_t RsBitvector::rank1_unchecked(std::uint64_t i) const {
    std::uint64_t blk = i / b_;
    unsigned in = static_cast<unsigned>(i % b_);
    if (blk >= classes_.size()) return ones_;
    std::uint64_t r = block_rank_before(blk);
    if (in == 0) return r;
    return r + static_cast<std::uint64_t>(std::popcount(decode_block(blk) >> (b_ - in)));
}

std::uint64_t RsBitvector::rank1(std::uint64_t i, RankProbe* probe) const {
    if (i > n_) throw bounds_error("rank position outside bitvector");
    if (!probe) return rank1_unchecked(i);
    std::uint64_t blk = i / b_;
    unsigned in = static_cast<unsigned>(i % b_);
    if (blk >= classes_.size()) return ones_;
    std::uint64_t r = block_rank_before(blk);
    probe->sample_arrays += 2;
    if (in == 0) return r;
    // Reading the class and offset of one block: the classes array plus one decode.
    probe->sample_arrays += 1;
    probe->block_decodes += 1;
    return r + static_cast<std::uint64_t>(std::popcount(decode_block(blk) >> (b_ - in)));
}

std::uint64_t RsBitvector::select(bool bit, std::uint64_t j) const {
    std::uint64_t total = bit ? ones_ : zeros();
    if (j == 0 || j > total) throw not_found("select index exceeds number of matching bits");
    const std::uint64_t macro_bits = static_cast<std::uint64_t>(b_) * b_;
    auto macro_count = [&](std::uint64_t m) {
        std::uint64_t r = macro_.get(2 * m + 1);
        return bit ? r : m * macro_bits - r;
    };
    // Last macroblock whose preceding count is < j.
    std::uint64_t lo = 0, hi = macro_.size() / 2;
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (macro_count(mid) < j) lo = mid;
        else hi = mid;
    }
    std::uint64_t m = lo;
    std::uint64_t base = macro_count(m);
    auto block_count = [&](std::uint64_t blk) {
        std::uint64_t r = block_.get(2 * blk + 1);
        return bit ? r : (blk - m * b_) * b_ - r;
    };
    std::uint64_t blo = m * b_, bhi = std::min<std::uint64_t>(classes_.size(), blo + b_);
    while (bhi - blo > 1) {
        std::uint64_t mid = blo + (bhi - blo) / 2;
        if (base + block_count(mid) < j) blo = mid;
        else bhi = mid;
    }
    std::uint64_t need = j - base - block_count(blo);
    std::uint64_t block = decode_block(blo);
    if (!bit) block = ~block & low_mask(b_);
    for (unsigned in = 0; in < b_; ++in) {
        if ((block >> (b_ - 1 - in)) & 1) {
            if (--need == 0) return blo * b_ + in + 1;
        }
    }
    throw not_found("select fell off the final block");
}

std::uint64_t RsBitvector::space_bits() const {
    return classes_.bits_used() + offsets_.size() + macro_.bits_used() + block_.bits_used();
}

PackedBits RsBitvector::to_bits() const {
    PackedBits out(n_);
    for (std::uint64_t blk = 0; blk < classes_.size(); ++blk) {
        std::uint64_t start = blk * b_;
        unsigned avail = static_cast<unsigned>(std::min<std::uint64_t>(b_, n_ - start));
        out.write(start, avail, decode_block(blk) >> (b_ - avail));
    }
    return out;
}

bool RsBitvector::samples_consistent() const {
    std::uint64_t pos = 0, rank = 0;
    for (std::uint64_t blk = 0; blk < classes_.size(); ++blk) {
        if (offset_start(blk) != pos || block_rank_before(blk) != rank) return false;
        unsigned cls = static_cast<unsigned>(classes_.get(blk));
        if (cls > b_) return false;
        unsigned w = offset_width(cls);
        if (pos + w > offsets_.size()) return false;
        if (offsets_.read(pos, w) >= binomial(b_, cls)) return false;
        pos += w;
        rank += cls;
    }
    return pos == offsets_.size() && rank == ones_;
}

void RsBitvector::save(serial::Writer& w) const {
    w.header("MDT1", tag, version);
    w.u64(n_);
    w.u8(static_cast<std::uint8_t>(b_));
    w.u64(ones_);
    classes_.save(w);
    offsets_.save(w);
    macro_.save(w);
    block_.save(w);
}

RsBitvector RsBitvector::load(serial::Reader& r) {
    r.expect(r.header("MDT1", version) == tag, "expected a bitvector");
    RsBitvector v;
    v.n_ = r.u64();
    v.b_ = r.u8();
    v.ones_ = r.u64();
    r.expect(v.b_ >= 1 && v.b_ <= 63, "bad block size");
    v.classes_ = PackedIntArray::load(r);
    v.offsets_ = PackedBits::load(r);
    v.macro_ = PackedIntArray::load(r);
    v.block_ = PackedIntArray::load(r);
    std::uint64_t nblocks = (v.n_ + v.b_ - 1) / v.b_;
    r.expect(v.classes_.size() == nblocks, "block count mismatch");
    r.expect(v.block_.size() == 2 * nblocks, "block sample count mismatch");
    r.expect(v.macro_.size() == 2 * ((nblocks + v.b_ - 1) / v.b_), "macro sample count mismatch");
    r.expect(v.ones_ <= v.n_, "more ones than bits");
    r.expect(v.samples_consistent(), "rank samples inconsistent with blocks");
    return v;
}

} // namespace mdt
