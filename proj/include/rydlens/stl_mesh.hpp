#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "rydlens/error.hpp"
#include "rydlens/lens_design.hpp"
#include "rydlens/vec3.hpp"

namespace rydlens {

// Binary STL: 80-byte header, uint32 triangle count, then 50-byte records
// (normal, 3 vertices as float32 triples, uint16 attribute), little-endian.

namespace detail {

inline void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

inline void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

inline void put_vertex(std::vector<std::uint8_t>& out, const Vec3& v) {
    put_f32(out, static_cast<float>(v.x));
    put_f32(out, static_cast<float>(v.y));
    put_f32(out, static_cast<float>(v.z));
}

}  // namespace detail

/// Appends the 12 triangles of an axis-aligned cube (outward normals,
/// counter-clockwise winding seen from outside).
inline void append_cube_triangles(std::vector<std::uint8_t>& out, const Vec3& center,
                                  double side) {
    const double h = 0.5 * side;
    const Vec3 lo = center - Vec3{h, h, h};
    const Vec3 hi = center + Vec3{h, h, h};
    // corner(i): bit 0 -> x, bit 1 -> y, bit 2 -> z
    auto corner = [&](int i) {
        return Vec3{(i & 1) ? hi.x : lo.x, (i & 2) ? hi.y : lo.y, (i & 4) ? hi.z : lo.z};
    };
    struct Face {
        Vec3 normal;
        std::array<int, 4> quad;  // CCW from outside
    };
    static const Face faces[6] = {
        {{-1, 0, 0}, {0, 4, 6, 2}}, {{+1, 0, 0}, {1, 3, 7, 5}},
        {{0, -1, 0}, {0, 1, 5, 4}}, {{0, +1, 0}, {2, 6, 7, 3}},
        {{0, 0, -1}, {0, 2, 3, 1}}, {{0, 0, +1}, {4, 5, 7, 6}},
    };
    for (const auto& f : faces) {
        const int tris[2][3] = {{f.quad[0], f.quad[1], f.quad[2]},
                                {f.quad[0], f.quad[2], f.quad[3]}};
        for (const auto& t : tris) {
            detail::put_vertex(out, f.normal);
            for (int idx : t)
                detail::put_vertex(out, corner(idx));
            detail::put_u16(out, 0);
        }
    }
}

/// Emits the lattice (optionally a single octant segment) as binary STL
/// bytes. Solid cells only; an empty selection still yields a valid
/// 0-triangle file.
inline std::vector<std::uint8_t> export_stl(const LensLattice& lattice,
                                            std::optional<int> segment = std::nullopt) {
    if (segment && (*segment < 0 || *segment > 7))
        throw DomainError("export_stl: segment id outside 0..7");

    std::vector<std::uint8_t> out;
    out.resize(80, 0);
    const std::string tag = "rydlens cubic-lattice GRIN lens";
    std::memcpy(out.data(), tag.data(), tag.size());

    std::uint32_t count = 0;
    detail::put_u32(out, 0);  // placeholder
    for (const auto& cell : lattice.cells) {
        if (cell.fill_param_b <= 0.0)
            continue;
        if (segment && cell.segment != *segment)
            continue;
        append_cube_triangles(out, cell.center_xyz, cell.fill_param_b);
        ++count;
    }
    count *= 12;
    for (int i = 0; i < 4; ++i)
        out[80 + i] = static_cast<std::uint8_t>((count >> (8 * i)) & 0xff);
    return out;
}

/// Triangle count stored in an STL byte buffer.
inline std::uint32_t stl_triangle_count(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 84)
        throw DataError("STL buffer shorter than header");
    std::uint32_t n = 0;
    for (int i = 3; i >= 0; --i)
        n = (n << 8) | bytes[80 + i];
    if (bytes.size() != 84 + 50ull * n)
        throw DataError("STL buffer size inconsistent with triangle count");
    return n;
}

/// The raw 50-byte triangle records of an STL buffer.
inline std::vector<std::array<std::uint8_t, 50>> stl_records(
    const std::vector<std::uint8_t>& bytes) {
    const std::uint32_t n = stl_triangle_count(bytes);
    std::vector<std::array<std::uint8_t, 50>> rec(n);
    for (std::uint32_t i = 0; i < n; ++i)
        std::memcpy(rec[i].data(), bytes.data() + 84 + 50ull * i, 50);
    return rec;
}

}  // namespace rydlens
