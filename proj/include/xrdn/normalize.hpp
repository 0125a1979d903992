#pragma once

#include "xrdn/frame.hpp"

namespace xrdn {

// Per-frame affine record needed to undo min-max scaling. Stored in double
// so the round trip stays well inside 1e-6 relative error.
struct NormRecord {
    double min = 0.0;
    double max = 0.0;

    double span() const { return max - min; }
};

// Scales non-dead pixels to [0, 1] by the frame's own min and max (dead
// pixels are excluded from the statistics and forced to zero). A constant
// frame cannot be scaled and raises FrameError naming `context`.
NormRecord normalize_minmax(Frame& f, const std::string& context = "");

// Inverse of normalize_minmax given the frame's record.
void denormalize_minmax(Frame& f, const NormRecord& rec);

struct PairNormRecords {
    NormRecord lc;
    NormRecord hc;
};

// Each exposure is scaled independently.
PairNormRecords normalize_pair(FramePair& pair);

}  // namespace xrdn
