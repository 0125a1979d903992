#include "xrdn/frame.hpp"

#include <cmath>

namespace xrdn {

void validate_frame(const Frame& f, const std::string& context, bool require_nonneg) {
    const std::string where = context.empty() ? std::string("frame") : context;
    if (f.height <= 0 || f.width <= 0)
        throw FrameError(where + ": non-positive dimensions");
    const std::size_t n = static_cast<std::size_t>(f.height) * static_cast<std::size_t>(f.width);
    if (f.intensities.size() != n)
        throw FrameError(where + ": intensity count does not match height*width");
    if (f.dead.size() != n)
        throw FrameError(where + ": dead mask size does not match height*width");
    for (std::size_t i = 0; i < n; ++i) {
        const float v = f.intensities[i];
        if (!std::isfinite(v))
            throw FrameError(where + ": non-finite intensity at index " + std::to_string(i));
        if (require_nonneg && v < 0.0f)
            throw FrameError(where + ": negative intensity at index " + std::to_string(i));
        if (f.dead[i] && v != 0.0f)
            throw FrameError(where + ": dead pixel with nonzero intensity at index " + std::to_string(i));
    }
    if (f.axes) {
        if (f.axes->x.step == 0.0 || f.axes->y.step == 0.0 ||
            (f.axes->stack && f.axes->stack->step == 0.0))
            throw FrameError(where + ": zero axis step");
        if (!f.axes->labels_distinct())
            throw FrameError(where + ": axis labels not distinct");
    }
}

void zero_dead(Frame& f) {
    for (std::size_t i = 0; i < f.intensities.size(); ++i)
        if (f.dead[i]) f.intensities[i] = 0.0f;
}

static bool axes_equal(const std::optional<ReciprocalAxes>& a, const std::optional<ReciprocalAxes>& b) {
    if (a.has_value() != b.has_value()) return false;
    if (!a) return true;
    auto eq = [](const AxisSpec& p, const AxisSpec& q) {
        return p.label == q.label && p.origin == q.origin && p.step == q.step;
    };
    if (!eq(a->x, b->x) || !eq(a->y, b->y)) return false;
    if (a->stack.has_value() != b->stack.has_value()) return false;
    return !a->stack || eq(*a->stack, *b->stack);
}

void validate_pair(const FramePair& pair) {
    const std::string where = pair.pair_id.empty() ? std::string("pair") : "pair " + pair.pair_id;
    if (!pair.lc.same_shape(pair.hc))
        throw FrameError(where + ": lc/hc shape mismatch");
    if (pair.lc.dead != pair.hc.dead)
        throw FrameError(where + ": lc/hc dead masks differ");
    if (!axes_equal(pair.lc.axes, pair.hc.axes))
        throw FrameError(where + ": lc/hc axes differ");
    validate_frame(pair.lc, where + " (lc)");
    validate_frame(pair.hc, where + " (hc)");
}

}  // namespace xrdn
