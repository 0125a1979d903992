#include "xrdn/augment.hpp"

#include <algorithm>

namespace xrdn {

namespace {

template <typename T>
void reverse_rows(std::vector<T>& data, std::size_t h, std::size_t w) {
    if (data.empty()) return;
    for (std::size_t top = 0, bot = h - 1; top < bot; ++top, --bot) {
        std::swap_ranges(data.begin() + static_cast<std::ptrdiff_t>(top * w),
                         data.begin() + static_cast<std::ptrdiff_t>((top + 1) * w),
                         data.begin() + static_cast<std::ptrdiff_t>(bot * w));
    }
}

}  // namespace

void flip_l(Frame& f) {
    reverse_rows(f.intensities, f.height, f.width);
    reverse_rows(f.dead, f.height, f.width);
    if (f.axes) {
        AxisSpec& y = f.axes->y;
        y.origin = y.origin + static_cast<double>(f.height - 1) * y.step;
        y.step = -y.step;
    }
}

void flip_pair(FramePair& pair) {
    flip_l(pair.lc);
    flip_l(pair.hc);
}

FramePair flipped_copy(const FramePair& pair) {
    FramePair out = pair;
    flip_pair(out);
    out.pair_id = pair.pair_id + "+flip";
    return out;
}

}  // namespace xrdn
