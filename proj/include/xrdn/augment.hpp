#pragma once

#include "xrdn/frame.hpp"

namespace xrdn {

// Mirrors the frame along the slow axis (row order reversed). The y axis is
// re-expressed so pixel coordinates are preserved: origin moves to the old
// last row, step changes sign. Applying it twice restores the input.
void flip_l(Frame& f);

void flip_pair(FramePair& pair);

// Flipped duplicate with "+flip" appended to the pair id.
FramePair flipped_copy(const FramePair& pair);

// Coin-gated form used by the training loop.
inline FramePair augment_flip(const FramePair& pair, bool coin) {
    if (!coin) return pair;
    FramePair out = pair;
    flip_pair(out);
    return out;
}

}  // namespace xrdn
