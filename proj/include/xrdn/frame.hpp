#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xrdn {

// One reciprocal-space axis: coordinate of the first pixel (or frame) and the
// increment per pixel (or per frame for the stack axis). Labels are 'h', 'k'
// or 'l'. Steps may be negative after a flip.
struct AxisSpec {
    char label = 'h';
    double origin = 0.0;
    double step = 1.0;
};

struct ReciprocalAxes {
    AxisSpec x;                     // in-frame horizontal axis (columns)
    AxisSpec y;                     // in-frame vertical axis (rows)
    std::optional<AxisSpec> stack;  // origin = this frame's coordinate on the stack axis

    bool labels_distinct() const {
        if (x.label == y.label) return false;
        if (stack && (stack->label == x.label || stack->label == y.label)) return false;
        return true;
    }
};

class FrameError : public std::runtime_error {
public:
    explicit FrameError(const std::string& what) : std::runtime_error(what) {}
};

// One 2D detector exposure. Intensities are row-major; dead pixels carry
// intensity 0 and are flagged in the mask.
struct Frame {
    int height = 0;
    int width = 0;
    std::vector<float> intensities;   // height * width, row-major
    std::vector<std::uint8_t> dead;   // same length; 1 = dead
    std::optional<ReciprocalAxes> axes;

    Frame() = default;
    Frame(int h, int w, float fill = 0.0f)
        : height(h), width(w),
          intensities(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), fill),
          dead(static_cast<std::size_t>(h) * static_cast<std::size_t>(w), 0) {}

    std::size_t size() const { return intensities.size(); }
    float& at(int r, int c) { return intensities[static_cast<std::size_t>(r) * width + c]; }
    float at(int r, int c) const { return intensities[static_cast<std::size_t>(r) * width + c]; }
    bool is_dead(int r, int c) const { return dead[static_cast<std::size_t>(r) * width + c] != 0; }
    bool is_dead(std::size_t i) const { return dead[i] != 0; }
    bool any_dead() const {
        for (auto d : dead)
            if (d) return true;
        return false;
    }
    bool same_shape(const Frame& o) const { return height == o.height && width == o.width; }
};

// Shape/mask/axes consistency and finiteness. Throws FrameError with `context`
// in the message. `require_nonneg` is for raw-count frames.
void validate_frame(const Frame& f, const std::string& context = {}, bool require_nonneg = false);

// Force intensity 0 on dead pixels.
void zero_dead(Frame& f);

// Aligned low-count / high-count exposure of the same scene.
struct FramePair {
    Frame lc;
    Frame hc;
    std::string pair_id;
};

// Both frames must share shape, dead mask and axes metadata.
void validate_pair(const FramePair& pair);

}  // namespace xrdn
