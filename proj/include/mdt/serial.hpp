#pragma once

// Little-endian binary writer/reader shared by every serializable structure.

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mdt/error.hpp"

namespace mdt::serial {

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const void* p, std::size_t n) {
        out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    }

    template <typename T>
    void uint(T v) {
        std::array<unsigned char, sizeof(T)> buf{};
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            buf[i] = static_cast<unsigned char>(static_cast<std::uint64_t>(v) >> (8 * i));
        }
        bytes(buf.data(), buf.size());
    }

    void u8(std::uint8_t v) { uint(v); }
    void u16(std::uint16_t v) { uint(v); }
    void u32(std::uint32_t v) { uint(v); }
    void u64(std::uint64_t v) { uint(v); }

    void f64(double v) {
        std::uint64_t raw = 0;
        std::memcpy(&raw, &v, sizeof raw);
        u64(raw);
    }

    void words(const std::vector<std::uint64_t>& w) {
        u64(w.size());
        for (auto x : w) u64(x);
    }

    void str(std::string_view s) {
        u64(s.size());
        bytes(s.data(), s.size());
    }

    void header(std::string_view magic, std::uint8_t tag, std::uint16_t version) {
        bytes(magic.data(), 4);
        u8(tag);
        u16(version);
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in_.gcount()) != n) throw corrupt_artifact("truncated artifact");
    }

    template <typename T>
    T uint() {
        std::array<unsigned char, sizeof(T)> buf{};
        bytes(buf.data(), buf.size());
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
        return static_cast<T>(v);
    }

    std::uint8_t u8() { return uint<std::uint8_t>(); }
    std::uint16_t u16() { return uint<std::uint16_t>(); }
    std::uint32_t u32() { return uint<std::uint32_t>(); }
    std::uint64_t u64() { return uint<std::uint64_t>(); }

    double f64() {
        std::uint64_t raw = u64();
        double v = 0;
        std::memcpy(&v, &raw, sizeof v);
        return v;
    }

    // Length-prefixed arrays are capped so a corrupt length cannot exhaust memory.
    std::uint64_t length(std::uint64_t limit = (1ULL << 34)) {
        std::uint64_t n = u64();
        if (n > limit) throw corrupt_artifact("implausible length field");
        return n;
    }

    std::vector<std::uint64_t> words() {
        std::vector<std::uint64_t> w(length());
        for (auto& x : w) x = u64();
        return w;
    }

    std::string str() {
        std::string s(length(), '\0');
        if (!s.empty()) bytes(s.data(), s.size());
        return s;
    }

    // Returns the tag byte after validating magic and version.
    std::uint8_t header(std::string_view magic, std::uint16_t version) {
        char m[4];
        bytes(m, 4);
        if (std::string_view(m, 4) != magic) throw corrupt_artifact("bad magic");
        std::uint8_t tag = u8();
        if (u16() != version) throw corrupt_artifact("unsupported version");
        return tag;
    }

    void expect(bool cond, const char* what) {
        if (!cond) throw corrupt_artifact(what);
    }

private:
    std::istream& in_;
};

} // namespace mdt::serial
