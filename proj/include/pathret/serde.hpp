#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "pathret/corpus.hpp"

// Little-endian binary IO helpers for the index and model file formats.
// All lengths are 64-bit.

namespace pathret::serde {

inline void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw DataError("unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void write_i32(std::ostream& out, std::int32_t v) {
    write_u64(out, static_cast<std::uint32_t>(v));
}

inline std::int32_t read_i32(std::istream& in) {
    return static_cast<std::int32_t>(static_cast<std::uint32_t>(read_u64(in)));
}

inline void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    write_u64(out, bits);
}

inline double read_f64(std::istream& in) {
    std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string read_string(std::istream& in) {
    std::uint64_t n = read_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw DataError("unexpected end of file");
    return s;
}

inline void write_magic(std::ostream& out, const char (&magic)[5], std::uint32_t version) {
    out.write(magic, 4);
    write_u64(out, version);
}

inline void expect_magic(std::istream& in, const char (&magic)[5], std::uint32_t version) {
    char got[4];
    in.read(got, 4);
    if (!in || std::string(got, 4) != std::string(magic, 4)) {
        throw DataError("bad magic bytes (wrong file type?)");
    }
    std::uint64_t v = read_u64(in);
    if (v != version) {
        throw DataError("unsupported format version " + std::to_string(v));
    }
}

inline void write_vocabulary(std::ostream& out, const Vocabulary& vocab) {
    write_u64(out, vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        write_string(out, vocab.surface(static_cast<TokenId>(i)));
    }
}

inline Vocabulary read_vocabulary(std::istream& in) {
    std::uint64_t n = read_u64(in);
    Vocabulary vocab;
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string s = read_string(in);
        if (i < static_cast<std::uint64_t>(kFirstRegularToken)) {
            if (vocab.surface(static_cast<TokenId>(i)) != s) {
                throw DataError("reserved token table mismatch in file");
            }
            continue;
        }
        TokenId id = vocab.add(s);
        if (static_cast<std::uint64_t>(id) != i) throw DataError("duplicate vocabulary entry");
    }
    return vocab;
}

}  // namespace pathret::serde
