#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xrdn/frame.hpp"

namespace xrdn {

// Binary frame container, little-endian throughout:
//   magic "DFRM" | version u16 | height u32 | width u32 | flags u8
//   intensities  f32 row-major, height*width values
//   [flags bit0] dead mask, packed bits LSB-first, ceil(h*w/8) bytes
//   [flags bit1] axes: count u8, then per axis label u8, origin f64, step f64
//                in x, y, stack order
class FrameIoError : public FrameError {
public:
    enum class Kind { bad_magic, bad_header, truncated, non_finite, io };

    FrameIoError(Kind kind, const std::string& what)
        : FrameError(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

constexpr std::uint16_t kFrameFormatVersion = 1;

std::vector<std::uint8_t> encode_frame(const Frame& f);
Frame decode_frame(const std::vector<std::uint8_t>& bytes);

void save_frame(const Frame& f, const std::string& path);
Frame load_frame(const std::string& path);

}  // namespace xrdn
