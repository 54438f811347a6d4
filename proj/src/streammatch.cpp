#include "mdt/streammatch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mdt/error.hpp"

namespace mdt {

namespace {

RabinContext checked_context(const RabinContext& ctx, std::uint64_t n) {
    if (n == 0) throw invalid_argument("pattern must be non-empty");
    if (ctx.levels() < static_cast<unsigned>(std::bit_width(n))) throw invalid_argument("context covers fewer powers than the pattern needs");
    return ctx;
}

} // namespace

KrMatcher::KrMatcher(std::string_view pattern, const RabinContext& ctx)
    : ctx_(checked_context(ctx, pattern.size())),
      pattern_fp_(ctx_.of(pattern)),
      window_(pattern.size(), '\0'),
      z_pow_nm1_(ctx_.zpow(pattern.size() - 1)) {}

KrMatcher::KrMatcher(std::string_view pattern, std::uint64_t max_stream, std::uint64_t seed)
    : KrMatcher(pattern, RabinContext::for_stream(max_stream, std::max<std::size_t>(pattern.size(), 1), seed)) {}

bool KrMatcher::push(std::uint8_t c) {
    const std::uint64_t n = window_.size();
    std::size_t slot = clock_ % n;
    ++clock_;
    if (clock_ <= n) {
        window_fp_ = ctx_.append(window_fp_, c);
    } else {
        window_fp_ = ctx_.slide(window_fp_, static_cast<std::uint8_t>(window_[slot]), c, z_pow_nm1_);
    }
    window_[slot] = static_cast<char>(c);
    bool hit = clock_ >= n && window_fp_.value == pattern_fp_.value;
    occ_ += hit;
    return hit;
}

PpMatcher::PpMatcher(std::string_view pattern, const RabinContext& ctx)
    : ctx_(checked_context(ctx, pattern.size())),
      n_(pattern.size()),
      first_byte_(static_cast<std::uint8_t>(pattern[0])),
      z_inv_(ctx_.inv_pow2(0)) {
    const unsigned top = static_cast<unsigned>(std::bit_width(n_)) - 1;
    levels_.resize(top + 1);
    RabinFingerprint f;
    std::uint64_t next_prefix = 1;
    for (std::uint64_t len = 1; len <= n_; ++len) {
        f = ctx_.append(f, static_cast<std::uint8_t>(pattern[len - 1]));
        if (len == next_prefix) {
            prefix_fp_.push_back(f.value);
            next_prefix <<= 1;
        }
    }
    for (unsigned i = 0; i <= top; ++i) {
        std::uint64_t len = check_length(i);
        check_fp_.push_back(ctx_.of(pattern.substr(0, len)).value);
        check_zpow_.push_back(i < top ? ctx_.pow2(i + 1) : ctx_.zpow(n_));
    }
}

PpMatcher::PpMatcher(std::string_view pattern, std::uint64_t max_stream, std::uint64_t seed)
    : PpMatcher(pattern, RabinContext::for_stream(max_stream, std::max<std::size_t>(pattern.size(), 1), seed)) {}

std::uint64_t PpMatcher::check_length(unsigned i) const {
    return i + 1 < levels_.size() ? 2ULL << i : n_;
}

std::optional<std::uint64_t> PpMatcher::push(std::uint8_t c) {
    if (finished_) throw contract_violation("push after finish");
    const std::uint64_t q = ctx_.q();
    last_ops_ = 0;
    std::optional<std::uint64_t> found;
    if (n_ > 1) found = run_checks(len_ + 1);

    a_ = addmod(mulmod(a_, ctx_.z(), q), c % q, q);
    ++len_;
    for (PpLevel& level : levels_) {
        ++last_ops_;
        if (level.t == 0) continue;
        level.z_r1 = mulmod(level.z_r1, ctx_.z(), q);
        level.z_r1_inv = mulmod(level.z_r1_inv, z_inv_, q);
    }

    if (c == first_byte_) {
        if (n_ == 1) {
            ++occ_;
            found = len_;
        } else {
            insert(0, len_);
        }
    }
    return found;
}

std::optional<std::uint64_t> PpMatcher::finish() {
    if (finished_) throw contract_violation("finish called twice");
    finished_ = true;
    last_ops_ = 0;
    if (n_ == 1) return std::nullopt;
    return run_checks(len_ + 1);
}

// Step j: the stream holds x[1, j-1]; the oldest stored position of each level is
// checked once its window reaches the level's check length.
std::optional<std::uint64_t> PpMatcher::run_checks(std::uint64_t j) {
    const std::uint64_t q = ctx_.q();
    const unsigned top = static_cast<unsigned>(levels_.size()) - 1;
    std::optional<std::uint64_t> found;
    for (unsigned i = 0; i <= top; ++i) {
        ++last_ops_;
        PpLevel& level = levels_[i];
        if (level.t == 0 || level.r1 + check_length(i) != j) continue;
        std::uint64_t r = level.r1;
        std::uint64_t window = submod(a_, mulmod(level.c, check_zpow_[i], q), q);
        remove_first(i);
        if (window != check_fp_[i]) continue;
        if (i < top) {
            insert(i + 1, r);
        } else {
            ++occ_;
            found = j - 1;
        }
    }
    return found;
}

// r is an occurrence of y[1, 2^i] whose last byte is the newest stream byte.
void PpMatcher::insert(unsigned i, std::uint64_t r) {
    const std::uint64_t q = ctx_.q();
    PpLevel& level = levels_[i];
    const std::uint64_t tail = submod(a_, prefix_fp_[i], q);
    if (level.t == 0) {
        level.r1 = r;
        level.t = 1;
        level.c = mulmod(tail, ctx_.inv_pow2(i), q);
        level.z_r1 = ctx_.pow2(i);
        level.z_r1_inv = ctx_.inv_pow2(i);
    } else if (level.t == 1) {
        level.p = r - level.r1;
        level.t = 2;
        level.b = mulmod(submod(tail, mulmod(level.c, level.z_r1, q), q), ctx_.inv_pow2(i), q);
        level.z_p = mulmod(level.z_r1, ctx_.inv_pow2(i), q);
        level.z_p_inv = mulmod(level.z_r1_inv, ctx_.pow2(i), q);
    } else if (r == level.r1 + level.t * level.p) {
        ++level.t;
    } else {
        ++breaks_;
    }
}

void PpMatcher::remove_first(unsigned i) {
    const std::uint64_t q = ctx_.q();
    PpLevel& level = levels_[i];
    if (level.t == 1) {
        level = PpLevel{};
        return;
    }
    level.c = addmod(mulmod(level.c, level.z_p, q), level.b, q);
    level.r1 += level.p;
    --level.t;
    level.z_r1 = mulmod(level.z_r1, level.z_p_inv, q);
    level.z_r1_inv = mulmod(level.z_r1_inv, level.z_p, q);
    if (level.t == 1) {
        level.p = 0;
        level.b = 0;
        level.z_p = level.z_p_inv = 1;
    }
}

std::vector<std::uint64_t> prime_shift_set(unsigned k, std::uint64_t n) {
    if (n == 0) throw invalid_argument("pattern length must be positive");
    const long double target = static_cast<long double>(k + 1) * (k + 1) * std::log2(static_cast<long double>(n));
    std::vector<std::uint64_t> primes;
    long double sum = 0;
    for (std::uint64_t d = std::max<std::uint64_t>(k + 1, 2); primes.empty() || sum <= target; ++d) {
        if (!is_prime(d)) continue;
        primes.push_back(d);
        sum += std::log2(static_cast<long double>(d));
    }
    return primes;
}

KMismatchMatcher::KMismatchMatcher(std::string_view pattern, unsigned k, std::uint64_t max_stream, std::uint64_t seed)
    : k_(k), n_(pattern.size()) {
    if (n_ == 0) throw invalid_argument("pattern must be non-empty");
    RabinContext ctx = RabinContext::for_stream(max_stream, n_, seed);
    if (k == 0) {
        exact_.emplace(pattern, ctx);
        return;
    }
    primes_ = prime_shift_set(k, n_);
    max_prime_ = primes_.back();
    by_residue_.resize(primes_.size());
    for (unsigned pi = 0; pi < primes_.size(); ++pi) {
        const std::uint64_t d = primes_[pi];
        const std::uint64_t shifts = std::min(d, n_);
        shifts_.push_back(shifts);
        by_residue_[pi].resize(d);
        for (std::uint64_t shift = 0; shift < shifts; ++shift) {
            std::string sub;
            for (std::uint64_t idx = shift; idx < n_; idx += d) sub.push_back(pattern[idx]);
            const std::uint64_t last = shift + (sub.size() - 1) * d;
            for (std::uint64_t residue = 0; residue < d; ++residue) {
                by_residue_[pi][residue].push_back(sub_.size());
                sub_.push_back(Sub{pi, shift, residue, n_ - 1 - last, PpMatcher(sub, ctx)});
            }
        }
    }
    // Pending alignment ends span at most 2 * max_prime consecutive values.
    tallies_.assign(2 * max_prime_ + 2, std::vector<std::uint64_t>(primes_.size(), 0));
    tally_owner_.assign(tallies_.size(), 0);
}

void KMismatchMatcher::record(const Sub& s, std::uint64_t sub_end) {
    const std::uint64_t d = primes_[s.prime];
    const std::uint64_t first = s.residue == 0 ? d : s.residue;
    const std::uint64_t end = first + (sub_end - 1) * d + s.tail;
    if (end < n_) return;  // the alignment would start before the stream
    std::size_t slot = end % tallies_.size();
    if (tally_owner_[slot] != end) {
        std::fill(tallies_[slot].begin(), tallies_[slot].end(), 0);
        tally_owner_[slot] = end;
    }
    ++tallies_[slot][s.prime];
}

std::optional<KmOccurrence> KMismatchMatcher::decide(std::uint64_t end) {
    decided_ = end;
    std::size_t slot = end % tallies_.size();
    bool owned = tally_owner_[slot] == end;
    unsigned worst = 0;
    for (std::size_t pi = 0; pi < primes_.size(); ++pi) {
        std::uint64_t matched = owned ? tallies_[slot][pi] : 0;
        std::uint64_t mismatched = shifts_[pi] - matched;
        if (mismatched > k_) return std::nullopt;
        worst = std::max(worst, static_cast<unsigned>(mismatched));
    }
    return KmOccurrence{end, worst};
}

std::vector<KmOccurrence> KMismatchMatcher::push(std::uint8_t c) {
    if (finished_) throw contract_violation("push after finish");
    std::vector<KmOccurrence> out;
    ++len_;
    if (exact_) {
        if (auto e = exact_->push(c)) out.push_back({*e, 0});
        return out;
    }
    for (std::size_t pi = 0; pi < primes_.size(); ++pi) {
        for (std::size_t idx : by_residue_[pi][len_ % primes_[pi]]) {
            if (auto e = sub_[idx].matcher.push(c)) record(sub_[idx], *e);
        }
    }
    // Every report for an alignment ending at e arrives by stream position e + max_prime.
    if (len_ >= n_ + max_prime_) {
        if (auto occ = decide(len_ - max_prime_)) out.push_back(*occ);
    }
    return out;
}

std::vector<KmOccurrence> KMismatchMatcher::finish() {
    if (finished_) throw contract_violation("finish called twice");
    finished_ = true;
    std::vector<KmOccurrence> out;
    if (exact_) {
        if (auto e = exact_->finish()) out.push_back({*e, 0});
        return out;
    }
    for (Sub& s : sub_) {
        if (auto e = s.matcher.finish()) record(s, *e);
    }
    for (std::uint64_t end = std::max(decided_ + 1, n_); end <= len_; ++end) {
        if (auto occ = decide(end)) out.push_back(*occ);
    }
    return out;
}

} // namespace mdt
