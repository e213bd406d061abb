#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "da/common.hpp"

namespace da {

// Little-endian primitive IO on iostreams. Every reader takes the error type
// to throw on short reads so each file format reports its own failure.

template <class T>
void write_le(std::ostream& os, T v) {
    static_assert(std::is_arithmetic_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T, class E>
T read_le(std::istream& is, const char* what) {
    static_assert(std::is_arithmetic_v<T>);
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
        throw E(std::string("truncated while reading ") + what);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

template <class E>
void read_bytes(std::istream& is, void* dst, size_t n, const char* what) {
    is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (is.gcount() != static_cast<std::streamsize>(n))
        throw E(std::string("truncated while reading ") + what);
}

template <class E>
void expect_magic(std::istream& is, const char magic[4], const std::string& what) {
    char got[4];
    is.read(got, 4);
    if (is.gcount() != 4 || std::memcmp(got, magic, 4) != 0)
        throw E(std::string("bad magic, expected ") + std::string(magic, 4) + " in " + what);
}

template <class E>
std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw E("cannot open for writing: " + path);
    return os;
}

template <class E>
std::ifstream open_in(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw E("cannot open: " + path);
    return is;
}

}  // namespace da
