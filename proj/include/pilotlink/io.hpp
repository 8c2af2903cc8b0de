// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

#include "pilotlink/tensor.hpp"

namespace pl::io {

// Checkpoint files are little-endian regardless of host byte order.

inline void write_i32(std::ostream& os, std::int32_t v) {
    unsigned char b[4];
    const auto u = static_cast<std::uint32_t>(v);
    b[0] = u & 0xff;
    b[1] = (u >> 8) & 0xff;
    b[2] = (u >> 16) & 0xff;
    b[3] = (u >> 24) & 0xff;
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::int32_t read_i32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    return static_cast<std::int32_t>(u);
}

inline void write_f32(std::ostream& os, float v) {
    std::uint32_t u;
    static_assert(sizeof(u) == sizeof(v));
    __builtin_memcpy(&u, &v, 4);
    unsigned char b[4] = {static_cast<unsigned char>(u & 0xff),
                          static_cast<unsigned char>((u >> 8) & 0xff),
                          static_cast<unsigned char>((u >> 16) & 0xff),
                          static_cast<unsigned char>((u >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline float read_f32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    const std::uint32_t u = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                            (static_cast<std::uint32_t>(b[2]) << 16) |
                            (static_cast<std::uint32_t>(b[3]) << 24);
    float v;
    __builtin_memcpy(&v, &u, 4);
    return v;
}

inline void write_tensor_f32(std::ostream& os, const Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) write_f32(os, static_cast<float>(t[i]));
}

inline void read_tensor_f32(std::istream& is, Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(read_f32(is));
}

} // namespace pl::io
