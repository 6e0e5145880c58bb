#pragma once
// Shared helper for walking a timeline's event-aligned segments clipped to a
// query window [t0, T].  The integrands built on top are piecewise constant
// per segment, so every consumer reduces to "state at the grid point, length
// of the clipped piece".

#include <algorithm>

#include "flair/timeline.hpp"

namespace flair::detail {

// Invokes fn(j, a, b) for every grid segment j whose intersection (a, b) with
// [t0, T] is non-degenerate.  Validates the window against the span first; a
// zero-length window visits nothing.
template <class F>
void for_window_segments(const PoolTimeline& tl, double t0, double T, F&& fn) {
    if (!(t0 <= T)) fail(Errc::out_of_range_time, "window start exceeds window end");
    tl.segment_index(t0);  // span checks (throw out_of_range_time)
    tl.segment_index(T);
    for (size_t j = tl.segment_index(t0); j < tl.segment_count(); ++j) {
        if (tl.grid_time(j) >= T) break;
        const double a = std::max(tl.grid_time(j), t0);
        const double b = std::min(tl.grid_time(j + 1), T);
        if (a < b) fn(j, a, b);
    }
}

}  // namespace flair::detail
