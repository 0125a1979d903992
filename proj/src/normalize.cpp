#include "xrdn/normalize.hpp"

#include <cmath>
#include <limits>

namespace xrdn {

NormRecord normalize_minmax(Frame& f, const std::string& context) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    const std::size_t n = f.intensities.size();
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
        if (f.is_dead(i)) continue;
        const double v = f.intensities[i];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        any = true;
    }
    if (!any)
        throw FrameError("cannot normalize a frame with no live pixels" +
                         (context.empty() ? "" : " (" + context + ")"));
    if (!(hi > lo))
        throw FrameError("cannot normalize a constant frame" +
                         (context.empty() ? "" : " (" + context + ")"));

    NormRecord rec{lo, hi};
    const double span = rec.span();
    for (std::size_t i = 0; i < n; ++i) {
        if (f.is_dead(i)) {
            f.intensities[i] = 0.0f;
        } else {
            f.intensities[i] =
                static_cast<float>((f.intensities[i] - lo) / span);
        }
    }
    return rec;
}

void denormalize_minmax(Frame& f, const NormRecord& rec) {
    const double span = rec.span();
    const std::size_t n = f.intensities.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (f.is_dead(i)) {
            f.intensities[i] = 0.0f;
        } else {
            f.intensities[i] =
                static_cast<float>(f.intensities[i] * span + rec.min);
        }
    }
}

PairNormRecords normalize_pair(FramePair& pair) {
    PairNormRecords recs;
    recs.lc = normalize_minmax(pair.lc, pair.pair_id + ".lc");
    recs.hc = normalize_minmax(pair.hc, pair.pair_id + ".hc");
    return recs;
}

}  // namespace xrdn
