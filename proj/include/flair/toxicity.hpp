#pragma once
// Order-flow toxicity measures for the quadrant's second axis and the
// backtester's profitability objective.  Two interchangeable measures ship:
//
//  - lvr: the Black-Scholes instantaneous loss-versus-rebalancing rate
//        l_t = (sigma^2 p_t^2 / 2) * |dx*/dp|(p_implied),
//    integrated over event-aligned segments.  For a level L at the implied
//    price the marginal reserve sensitivity is |dx*/dp| = L / (2 p^{3/2}).
//  - markout: per-swap adverse selection against the external price a fixed
//    horizon after the trade, sized by the pool's signed risky-asset flow.
//
// Both produce a ToxicityReport with the same serialization surface as
// MetricReport so report consumers can swap measures freely.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "flair/timeline.hpp"

namespace flair {

enum class ToxicityKind { lvr, markout };

const char* toxicity_kind_name(ToxicityKind k);

// For lvr: integrand is the instantaneous loss rate on [t_start, t_end) and
// contribution = integrand * length.  For markout: one entry per swap
// boundary, t_start the trade time, t_end the forward lookup time, integrand
// the pool's signed risky-asset outflow, contribution the markout value.
struct ToxicitySegment {
    double t_start = 0.0;
    double t_end = 0.0;
    double integrand = 0.0;
    double contribution = 0.0;
};

struct ToxicityReport {
    ToxicityKind kind = ToxicityKind::lvr;
    double t0 = 0.0;
    double t1 = 0.0;
    double value = 0.0;
    double sigma = 0.0;       // lvr only: volatility used
    bool normalized = false;  // lvr only: per unit of aggregate pool value
    double horizon = 0.0;     // markout only
    bool truncated = false;   // markout only: swaps dropped for missing forward prices
    std::vector<ToxicitySegment> segments;

    nlohmann::json to_json() const;
    // Two columns: segment boundary time, cumulative value up to that time.
    void write_csv(std::ostream& out) const;
};

// Integrated LVR over [t0, T].  sigma is per sqrt(time-unit) of the log's
// native clock.  When normalized, each segment's rate divides by the
// aggregate portfolio value at that instant.
ToxicityReport lvr(const PoolTimeline& tl, double sigma, double t0, double T, bool normalized = false);

// Realized volatility of the implied log-price over the window's event grid:
// sqrt( sum (delta log p)^2 / (T - t0) ), annualization-free.
double estimate_volatility(const PoolTimeline& tl, double t0, double T);

// Sum of per-swap markouts for swaps in (t0, T]: (external price at trade
// time + horizon  -  post-trade implied price) * pool risky outflow, where
// the outflow is x*(p_before) - x*(p_after) on the pre-boundary aggregate
// distribution.  Swaps whose forward time falls past the log's span are
// dropped with the truncated flag set, or rejected when strict.
ToxicityReport markout(const PoolTimeline& tl, double horizon, double t0, double T, bool strict = false);

}  // namespace flair
