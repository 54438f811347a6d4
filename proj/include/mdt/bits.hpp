#pragma once

// Packed bit storage. Bit p (0-based) lives in word p/64 at bit 63 - p%64, so a
// contiguous run read across a word boundary comes out most-significant first,
// matching the left-to-right reading of a written bitvector.

#include <bit>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mdt/error.hpp"
#include "mdt/serial.hpp"

namespace mdt {

inline constexpr std::uint64_t low_mask(unsigned len) {
    return len >= 64 ? ~0ULL : ((1ULL << len) - 1);
}

// Smallest w with 2^w >= x; ceil_log2(0) = ceil_log2(1) = 0.
inline constexpr unsigned ceil_log2(std::uint64_t x) {
    return x <= 1 ? 0 : 64 - static_cast<unsigned>(std::countl_zero(x - 1));
}

inline constexpr unsigned floor_log2(std::uint64_t x) {
    return x == 0 ? 0 : 63 - static_cast<unsigned>(std::countl_zero(x));
}

// Bits needed to store any value in [0, x]; at least 1.
inline constexpr unsigned bits_for(std::uint64_t x) {
    return x == 0 ? 1 : 64 - static_cast<unsigned>(std::countl_zero(x));
}

class PackedBits {
public:
    PackedBits() = default;
    explicit PackedBits(std::uint64_t n) : n_(n), words_((n + 63) / 64, 0) {}

    // Parses a string of '0'/'1'; other characters are rejected.
    static PackedBits from_string(std::string_view s);

    std::uint64_t size() const { return n_; }
    const std::vector<std::uint64_t>& words() const { return words_; }

    bool get(std::uint64_t p) const { return (words_[p >> 6] >> (63 - (p & 63))) & 1; }

    void set(std::uint64_t p, bool b) {
        std::uint64_t m = 1ULL << (63 - (p & 63));
        if (b) words_[p >> 6] |= m;
        else words_[p >> 6] &= ~m;
    }

    // len bits starting at 0-based p, right-aligned; 0 <= len <= 64.
    std::uint64_t read(std::uint64_t p, unsigned len) const {
        if (len == 0) return 0;
        std::uint64_t w = p >> 6;
        unsigned off = p & 63;
        if (off + len <= 64) return (words_[w] >> (64 - off - len)) & low_mask(len);
        unsigned tail = off + len - 64;
        std::uint64_t hi = words_[w] & low_mask(64 - off);
        return (hi << tail) | (words_[w + 1] >> (64 - tail));
    }

    void write(std::uint64_t p, unsigned len, std::uint64_t v) {
        if (len == 0) return;
        v &= low_mask(len);
        std::uint64_t w = p >> 6;
        unsigned off = p & 63;
        if (off + len <= 64) {
            unsigned shift = 64 - off - len;
            words_[w] = (words_[w] & ~(low_mask(len) << shift)) | (v << shift);
            return;
        }
        unsigned tail = off + len - 64;
        words_[w] = (words_[w] & ~low_mask(64 - off)) | (v >> tail);
        unsigned shift = 64 - tail;
        words_[w + 1] = (words_[w + 1] & low_mask(shift)) | (v << shift);
    }

    // Appends len bits of v, most significant first.
    void push(std::uint64_t v, unsigned len) {
        if ((n_ + len + 63) / 64 > words_.size()) words_.push_back(0);
        n_ += len;
        write(n_ - len, len, v);
    }

    // 1-based extraction with bounds checking.
    std::uint64_t extract(std::uint64_t i, unsigned len) const;

    std::uint64_t count_ones() const {
        std::uint64_t c = 0;
        for (auto w : words_) c += static_cast<std::uint64_t>(std::popcount(w));
        return c;
    }

    std::string to_string() const;
    std::uint64_t space_bits() const { return 64 * words_.size(); }

    void save(serial::Writer& w) const;
    static PackedBits load(serial::Reader& r);

    bool operator==(const PackedBits&) const = default;

private:
    std::uint64_t n_ = 0;
    std::vector<std::uint64_t> words_;
};

// Fixed-width integer array: element i occupies bits [i*width, (i+1)*width).
class PackedIntArray {
public:
    PackedIntArray() = default;
    PackedIntArray(std::uint64_t count, unsigned width);

    std::uint64_t size() const { return count_; }
    unsigned width() const { return width_; }
    std::uint64_t get(std::uint64_t i) const { return bits_.read(i * width_, width_); }
    void set(std::uint64_t i, std::uint64_t v) { bits_.write(i * width_, width_, v); }
    std::uint64_t bits_used() const { return count_ * width_; }
    std::uint64_t space_bits() const { return bits_.space_bits(); }
    const PackedBits& bits() const { return bits_; }

    void save(serial::Writer& w) const;
    static PackedIntArray load(serial::Reader& r);

    bool operator==(const PackedIntArray&) const = default;

private:
    std::uint64_t count_ = 0;
    unsigned width_ = 1;
    PackedBits bits_;
};

} // namespace mdt
