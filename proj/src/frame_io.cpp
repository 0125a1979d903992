#include "xrdn/frame_io.hpp"

#include <cmath>
#include <cstring>

#include "xrdn/binio.hpp"

namespace xrdn {

namespace {

[[noreturn]] void throw_truncated(std::size_t pos) {
    throw FrameIoError(FrameIoError::Kind::truncated,
                       "frame data truncated at byte " + std::to_string(pos));
}

void put_axis(std::vector<std::uint8_t>& out, const AxisSpec& a) {
    binio::put_u8(out, static_cast<std::uint8_t>(a.label));
    binio::put_f64(out, a.origin);
    binio::put_f64(out, a.step);
}

AxisSpec read_axis(binio::Reader& r) {
    AxisSpec a;
    a.label = static_cast<char>(r.u8());
    a.origin = r.f64();
    a.step = r.f64();
    return a;
}

}  // namespace

std::vector<std::uint8_t> encode_frame(const Frame& f) {
    if (f.height <= 0 || f.width <= 0 ||
        f.intensities.size() != static_cast<std::size_t>(f.height) *
                                    static_cast<std::size_t>(f.width))
        throw FrameIoError(FrameIoError::Kind::bad_header,
                           "frame shape inconsistent with buffers");
    for (float v : f.intensities)
        if (!std::isfinite(v))
            throw FrameIoError(FrameIoError::Kind::non_finite,
                               "refusing to encode non-finite intensity");

    const bool has_mask = f.any_dead();
    const bool has_axes = f.axes.has_value();

    std::vector<std::uint8_t> out;
    out.reserve(15 + f.intensities.size() * 4);
    out.push_back('D');
    out.push_back('F');
    out.push_back('R');
    out.push_back('M');
    binio::put_u16(out, kFrameFormatVersion);
    binio::put_u32(out, static_cast<std::uint32_t>(f.height));
    binio::put_u32(out, static_cast<std::uint32_t>(f.width));
    std::uint8_t flags = 0;
    if (has_mask) flags |= 1;
    if (has_axes) flags |= 2;
    out.push_back(flags);

    for (float v : f.intensities) binio::put_f32(out, v);

    if (has_mask) {
        if (f.dead.size() != f.intensities.size())
            throw FrameIoError(FrameIoError::Kind::bad_header,
                               "dead mask size mismatch");
        const std::size_t n = f.dead.size();
        for (std::size_t i = 0; i < n; i += 8) {
            std::uint8_t byte = 0;
            for (std::size_t b = 0; b < 8 && i + b < n; ++b)
                if (f.dead[i + b]) byte |= static_cast<std::uint8_t>(1u << b);
            out.push_back(byte);
        }
    }

    if (has_axes) {
        const auto& ax = *f.axes;
        out.push_back(ax.stack ? 3 : 2);
        put_axis(out, ax.x);
        put_axis(out, ax.y);
        if (ax.stack) put_axis(out, *ax.stack);
    }
    return out;
}

Frame decode_frame(const std::vector<std::uint8_t>& bytes) {
    binio::Reader r(bytes.data(), bytes.size(), &throw_truncated);
    r.need(4);
    char magic[4];
    for (char& c : magic) c = static_cast<char>(r.u8());
    if (std::memcmp(magic, "DFRM", 4) != 0)
        throw FrameIoError(FrameIoError::Kind::bad_magic, "bad magic");

    const std::uint16_t version = r.u16();
    if (version != kFrameFormatVersion)
        throw FrameIoError(FrameIoError::Kind::bad_header,
                           "unsupported version " + std::to_string(version));

    Frame f;
    const std::uint32_t height = r.u32();
    const std::uint32_t width = r.u32();
    if (height == 0 || width == 0)
        throw FrameIoError(FrameIoError::Kind::bad_header, "zero frame dimension");
    if (height > 0x7fffffffu || width > 0x7fffffffu)
        throw FrameIoError(FrameIoError::Kind::bad_header, "frame dimension overflow");
    f.height = static_cast<int>(height);
    f.width = static_cast<int>(width);
    const std::uint8_t flags = r.u8();
    if (flags & ~0x03u)
        throw FrameIoError(FrameIoError::Kind::bad_header,
                           "unknown flag bits set");

    const std::size_t n =
        static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
    f.intensities.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.intensities[i] = r.f32();
        if (!std::isfinite(f.intensities[i]))
            throw FrameIoError(FrameIoError::Kind::non_finite,
                               "non-finite intensity at index " + std::to_string(i));
    }

    if (flags & 1) {
        f.dead.assign(n, 0);
        for (std::size_t i = 0; i < n; i += 8) {
            const std::uint8_t byte = r.u8();
            for (std::size_t b = 0; b < 8 && i + b < n; ++b)
                f.dead[i + b] = (byte >> b) & 1;
        }
    } else {
        f.dead.assign(n, 0);
    }

    if (flags & 2) {
        const std::uint8_t count = r.u8();
        if (count != 2 && count != 3)
            throw FrameIoError(FrameIoError::Kind::bad_header,
                               "axis count must be 2 or 3");
        ReciprocalAxes ax;
        ax.x = read_axis(r);
        ax.y = read_axis(r);
        if (count == 3) ax.stack = read_axis(r);
        f.axes = ax;
    }

    if (r.remaining() != 0)
        throw FrameIoError(FrameIoError::Kind::bad_header,
                           "trailing bytes after frame payload");
    return f;
}

void save_frame(const Frame& f, const std::string& path) {
    const auto bytes = encode_frame(f);
    try {
        binio::write_file(path, bytes);
    } catch (const std::runtime_error& e) {
        throw FrameIoError(FrameIoError::Kind::io, e.what());
    }
}

Frame load_frame(const std::string& path) {
    std::vector<std::uint8_t> bytes;
    try {
        bytes = binio::read_file(path);
    } catch (const std::runtime_error& e) {
        throw FrameIoError(FrameIoError::Kind::io, e.what());
    }
    return decode_frame(bytes);
}

}  // namespace xrdn
