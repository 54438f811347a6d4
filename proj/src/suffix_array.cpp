#include "mdt/text_index.hpp"

#include <algorithm>

namespace mdt {

std::string terminated_text(std::string_view plain) {
    for (char c : plain) {
        if (c == sentinel_char || c == '\0') throw invalid_argument("text may not contain '$' or NUL");
    }
    std::string t(plain);
    t.push_back('\0');
    return t;
}

std::string internal_from_display(std::string_view with_sentinel) {
    if (with_sentinel.empty() || with_sentinel.back() != sentinel_char) {
        throw invalid_argument("text must end with the '$' terminator");
    }
    return terminated_text(with_sentinel.substr(0, with_sentinel.size() - 1));
}

std::string display_from_internal(std::string_view internal) {
    std::string out(internal);
    std::replace(out.begin(), out.end(), '\0', sentinel_char);
    return out;
}

// Cyclic-shift doubling with counting sorts. Since the terminator is unique and
// smallest, sorting rotations sorts suffixes.
std::vector<std::uint64_t> suffix_array_internal(std::string_view t) {
    const std::size_t n = t.size();
    if (n == 0) return {};
    std::vector<std::size_t> p(n), c(n), pn(n), cn(n);
    {
        std::vector<std::size_t> cnt(256, 0);
        for (unsigned char ch : t) ++cnt[ch];
        for (std::size_t k = 1; k < 256; ++k) cnt[k] += cnt[k - 1];
        for (std::size_t i = n; i-- > 0;) p[--cnt[static_cast<unsigned char>(t[i])]] = i;
        c[p[0]] = 0;
        std::size_t classes = 1;
        for (std::size_t i = 1; i < n; ++i) {
            if (t[p[i]] != t[p[i - 1]]) ++classes;
            c[p[i]] = classes - 1;
        }
        std::vector<std::size_t> cnt2(std::max<std::size_t>(classes, 1));
        for (std::size_t h = 1; h < n && classes < n; h <<= 1) {
            for (std::size_t i = 0; i < n; ++i) pn[i] = (p[i] + n - h % n) % n;
            cnt2.assign(classes, 0);
            for (std::size_t i = 0; i < n; ++i) ++cnt2[c[pn[i]]];
            for (std::size_t k = 1; k < classes; ++k) cnt2[k] += cnt2[k - 1];
            for (std::size_t i = n; i-- > 0;) p[--cnt2[c[pn[i]]]] = pn[i];
            cn[p[0]] = 0;
            classes = 1;
            for (std::size_t i = 1; i < n; ++i) {
                bool differ = c[p[i]] != c[p[i - 1]] || c[(p[i] + h) % n] != c[(p[i - 1] + h) % n];
                if (differ) ++classes;
                cn[p[i]] = classes - 1;
            }
            c.swap(cn);
        }
    }
    std::vector<std::uint64_t> sa(n);
    for (std::size_t i = 0; i < n; ++i) sa[i] = p[i] + 1;
    return sa;
}

std::vector<std::uint64_t> sa_build(std::string_view with_sentinel) {
    return suffix_array_internal(internal_from_display(with_sentinel));
}

std::vector<std::uint64_t> inverse_permutation(const std::vector<std::uint64_t>& perm) {
    std::vector<std::uint64_t> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i] - 1] = i + 1;
    return inv;
}

std::string bwt_from_text(std::string_view with_sentinel) {
    std::string t = internal_from_display(with_sentinel);
    auto sa = suffix_array_internal(t);
    std::string out(t.size(), '\0');
    for (std::size_t i = 0; i < sa.size(); ++i) out[i] = t[(sa[i] + t.size() - 2) % t.size()];
    return display_from_internal(out);
}

std::string bwt_invert(std::string_view bwt) {
    if (std::count(bwt.begin(), bwt.end(), sentinel_char) != 1) {
        throw invalid_argument("BWT must contain exactly one '$'");
    }
    if (std::find(bwt.begin(), bwt.end(), '\0') != bwt.end()) throw invalid_argument("BWT may not contain NUL");
    std::string l(bwt);
    std::replace(l.begin(), l.end(), sentinel_char, '\0');
    const std::size_t n = l.size();
    std::array<std::uint64_t, 257> c{};
    for (unsigned char ch : l) ++c[ch + 1];
    for (std::size_t k = 1; k < 257; ++k) c[k] += c[k - 1];
    // lf[i] = C[L[i]] + rank of this occurrence of L[i] (0-based rows).
    std::vector<std::uint64_t> lf(n);
    std::array<std::uint64_t, 256> seen{};
    for (std::size_t i = 0; i < n; ++i) {
        auto ch = static_cast<unsigned char>(l[i]);
        lf[i] = c[ch] + seen[ch]++;
    }
    std::string t(n, '\0');
    std::size_t row = 0;  // the terminator's own suffix sorts first
    for (std::size_t k = n - 1; k-- > 0;) {
        t[k] = l[row];
        row = lf[row];
        if (t[k] == '\0') throw invalid_argument("input is not a valid BWT");
    }
    if (n > 0 && l[row] != '\0') throw invalid_argument("input is not a valid BWT");
    return display_from_internal(t);
}

std::vector<std::uint64_t> psi_array(const std::vector<std::uint64_t>& sa) {
    const std::size_t n = sa.size();
    auto isa = inverse_permutation(sa);
    std::vector<std::uint64_t> psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = isa[sa[i] % n];
    return psi;
}

IndexKind peek_index_kind(std::string_view bytes) {
    if (bytes.size() < 7 || bytes.substr(0, 4) != "MDTI") throw corrupt_artifact("not an index artifact");
    auto kind = static_cast<std::uint8_t>(bytes[4]);
    if (kind != 1 && kind != 2) throw corrupt_artifact("unknown index kind");
    return static_cast<IndexKind>(kind);
}

} // namespace mdt
