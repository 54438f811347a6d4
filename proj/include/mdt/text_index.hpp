#pragma once

// Suffix arrays, the Burrows-Wheeler transform and two self-indexes over it.
//
// Public strings use '$' for the terminator; internally it is byte 0 so that it
// sorts before every other symbol. Texts may not contain '$' or byte 0 anywhere
// else. All positions and rows are 1-based and n counts the terminator.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mdt/bits.hpp"
#include "mdt/elias_fano.hpp"
#include "mdt/rrr.hpp"
#include "mdt/serial.hpp"
#include "mdt/wavelet_tree.hpp"

namespace mdt {

inline constexpr char sentinel_char = '$';

// Plain text -> internal bytes with the 0 terminator appended.
std::string terminated_text(std::string_view plain);
// Text that already ends in '$' -> internal bytes.
std::string internal_from_display(std::string_view with_sentinel);
std::string display_from_internal(std::string_view internal);

// Suffix array of an internal text, by prefix doubling.
std::vector<std::uint64_t> suffix_array_internal(std::string_view internal);
// Input must end with the only '$'.
std::vector<std::uint64_t> sa_build(std::string_view with_sentinel);
std::vector<std::uint64_t> inverse_permutation(const std::vector<std::uint64_t>& perm);

std::string bwt_from_text(std::string_view with_sentinel);
std::string bwt_invert(std::string_view bwt);

// psi[i] = ISA[SA[i] + 1]; the row of the terminator maps to ISA[1].
std::vector<std::uint64_t> psi_array(const std::vector<std::uint64_t>& sa);

struct SaRange {
    std::uint64_t lo = 1;
    std::uint64_t hi = 0;
    std::uint64_t count() const { return hi >= lo ? hi - lo + 1 : 0; }
    bool operator==(const SaRange&) const = default;
};

enum class IndexKind : std::uint8_t { csa = 1, fm = 2 };

class CsaIndex {
public:
    static constexpr std::uint16_t version = 1;

    CsaIndex() = default;
    explicit CsaIndex(std::string_view plain);

    std::uint64_t size() const { return n_; }
    unsigned sample_rate() const { return rho_; }

    std::uint64_t psi(std::uint64_t i) const;
    std::uint8_t first_symbol(std::uint64_t i) const;  // F[i], internal byte
    // SA[i] via psi steps to the nearest sampled row.
    std::uint64_t sa_at(std::uint64_t i, unsigned* steps = nullptr) const;

    SaRange count(std::string_view pattern) const;
    std::vector<std::uint64_t> locate(std::string_view pattern) const;
    std::string extract(std::uint64_t i, std::uint64_t len) const;

    const std::vector<std::uint8_t>& alphabet() const { return sigma_; }
    const RsBitvector& first_occurrence() const { return fo_; }
    const EliasFano& psi_run(std::size_t k) const { return psi_c_.at(k); }
    std::uint64_t space_bits() const;

    void save(serial::Writer& w) const;
    static CsaIndex load(serial::Reader& r);

private:
    int compare_suffix(std::uint64_t row, std::string_view pattern) const;

    std::uint64_t n_ = 0;
    unsigned rho_ = 1;
    std::vector<std::uint8_t> sigma_;
    RsBitvector fo_;
    std::vector<EliasFano> psi_c_;  // 0-based values psi - 1
    RsBitvector mark_;
    PackedIntArray ssa_;
    PackedIntArray isa_samples_;  // ISA[1 + k*rho]
};

class FmIndex {
public:
    static constexpr std::uint16_t version = 1;

    FmIndex() = default;
    explicit FmIndex(std::string_view plain);

    std::uint64_t size() const { return n_; }
    unsigned sample_rate() const { return rho_; }

    std::uint64_t lf(std::uint64_t i) const;
    std::uint8_t bwt_at(std::uint64_t i) const { return wt_.access(i); }
    std::uint64_t sa_at(std::uint64_t i, unsigned* steps = nullptr) const;

    SaRange count(std::string_view pattern) const;
    std::vector<std::uint64_t> locate(std::string_view pattern) const;
    std::string extract(std::uint64_t i, std::uint64_t len) const;

    const WaveletTree& wavelet() const { return wt_; }
    std::uint64_t c_of(std::uint8_t c) const { return c_[c]; }
    std::uint64_t payload_bits() const { return wt_.space_bits(); }
    std::uint64_t sample_bits() const;
    std::uint64_t space_bits() const { return payload_bits() + sample_bits(); }

    void save(serial::Writer& w) const;
    static FmIndex load(serial::Reader& r);

private:
    std::uint64_t row_of_position(std::uint64_t p) const;

    std::uint64_t n_ = 0;
    unsigned rho_ = 1;
    WaveletTree wt_;
    std::array<std::uint64_t, 257> c_{};  // c_[c] = symbols smaller than c
    RsBitvector mark_;
    PackedIntArray ssa_;
    PackedIntArray isa_samples_;  // ISA[k*rho] for k >= 1
    std::uint64_t isa_last_ = 0;  // ISA[n]
    std::uint64_t primary_ = 0;   // ISA[1], the row whose BWT symbol is the terminator
};

// Kind byte of a serialized index, or corrupt_artifact.
IndexKind peek_index_kind(std::string_view bytes);

} // namespace mdt
