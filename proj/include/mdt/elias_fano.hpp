#pragma once

// Non-decreasing integer sequence in [0, universe): each value is split into a
// fixed-width low part and a high part stored as unary gaps in a bitvector.

#include <cstdint>
#include <optional>
#include <vector>

#include "mdt/bits.hpp"
#include "mdt/rrr.hpp"
#include "mdt/serial.hpp"

namespace mdt {

struct EfSearch {
    bool member = false;
    std::optional<std::uint64_t> predecessor;  // largest element < y
    std::optional<std::uint64_t> successor;    // smallest element >= y
};

class EliasFano {
public:
    static constexpr std::uint8_t tag = 2;
    static constexpr std::uint16_t version = 1;

    EliasFano() = default;
    EliasFano(const std::vector<std::uint64_t>& values, std::uint64_t universe);

    std::uint64_t size() const { return m_; }
    std::uint64_t universe() const { return universe_; }
    unsigned low_width() const { return low_.width(); }

    // 1-based.
    std::uint64_t get(std::uint64_t i) const;
    std::uint64_t get_unchecked(std::uint64_t idx0) const {
        return ((high_.select1(idx0 + 1) - 1 - idx0) << low_.width()) | low_.get(idx0);
    }
    EfSearch search(std::uint64_t y) const;
    std::vector<std::uint64_t> decode() const;

    const PackedIntArray& low() const { return low_; }
    const RsBitvector& high() const { return high_; }
    std::uint64_t low_bits() const { return low_.bits_used(); }
    std::uint64_t high_bits() const { return high_.size(); }
    std::uint64_t space_bits() const { return low_.bits_used() + high_.space_bits(); }

    void save(serial::Writer& w) const;
    static EliasFano load(serial::Reader& r);

private:
    std::uint64_t m_ = 0;
    std::uint64_t universe_ = 0;
    PackedIntArray low_;
    RsBitvector high_;
};

} // namespace mdt
