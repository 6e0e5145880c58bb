#pragma once
// The competitiveness-metric integration engine.  For a position i over a
// window [t0, T]:
//
//   CM_i = integral of  [fee rate at t / V_i(t)] * [L_i(p_implied;t) / L(p_implied;t)]  dt
//
// and for the pool aggregate:
//
//   CM_agg = integral of  [fee rate at t / V(t)]  dt
//
// where V marks the risky leg at the external price and composes reserves at
// the implied price.  Under the timeline's conventions every factor is
// constant on each event-aligned segment, so the integrals are computed as
// exact finite sums — no quadrature error is introduced here.

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "flair/timeline.hpp"
#include "flair/toxicity.hpp"

namespace flair {

struct MetricSegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double integrand = 0.0;      // instantaneous fee return on capital
    double contribution = 0.0;   // integrand * (t_end - t_start)
};

struct MetricReport {
    std::string subject;  // position id, or "aggregate"
    double t0 = 0.0;
    double t1 = 0.0;
    double value = 0.0;  // sum of segment contributions
    std::vector<MetricSegment> segments;

    nlohmann::json to_json() const;
    // Two columns: segment boundary time, cumulative value up to that time.
    void write_csv(std::ostream& out) const;
};

// Per-position competitiveness.  Segments where the position earns no fee
// share contribute zero; a positive fee share with zero position value is a
// data error (ZeroCapitalWithFeeShare), never a silently clamped number.
MetricReport flair_position(const PoolTimeline& tl, const std::string& position_id, double t0, double T);

// Pool-aggregate competitiveness over the same grid.
MetricReport flair_aggregate(const PoolTimeline& tl, double t0, double T);

// The quadrant coordinate pair: x is flair_aggregate(...).value bit-for-bit,
// y the toxicity report's value.  The toxicity report must cover the same
// window (WindowMismatch otherwise).  Axis orientation is left to renderers.
std::pair<double, double> quadrant_point(const PoolTimeline& tl, const ToxicityReport& toxicity,
                                         double t0, double T);

}  // namespace flair
