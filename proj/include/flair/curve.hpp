#pragma once
// Price-space view of a two-asset AMM pool: piecewise-constant liquidity
// distributions L(p), the reserve maps x*(p)/y*(p), tick arithmetic, and the
// implied-price consistency check.  Everything here is pure math on doubles;
// no event or time awareness.

#include <cstdint>
#include <vector>

#include "flair/errors.hpp"

namespace flair {

enum class CurveKind { constant_product, concentrated_v3 };

struct CurveSpec {
    CurveKind kind = CurveKind::concentrated_v3;
    double fee_rate = 0.003;    // fraction of volume retained as fees, in [0, 1)
    int64_t tick_spacing = 60;  // v3 range alignment; also the granularity tick strategies use
    // Stand-ins for (0, +inf) on full-range intervals.  Reserve formulas treat a
    // lower bound <= p_min_sentinel as 0 and an upper bound >= p_max_sentinel as
    // +inf, which recovers the constant-product limit x* = L/sqrt(p), y* = L*sqrt(p).
    double p_min_sentinel = 1e-18;
    double p_max_sentinel = 1e18;

    void validate() const;
};

// Non-negative piecewise-constant liquidity over strictly increasing
// breakpoints; right-continuous at every breakpoint, zero outside the support.
// Stored in canonical form: no zero-level edge intervals, no equal-level
// neighbours, so structural equality compares meaningfully.
class LiquidityDistribution {
public:
    LiquidityDistribution() = default;  // identically-zero distribution
    LiquidityDistribution(std::vector<double> breakpoints, std::vector<double> levels);
    static LiquidityDistribution single(double p_lo, double p_hi, double level);

    // Right-continuous evaluation: p on a breakpoint reads the interval above it.
    double operator()(double p) const;

    bool is_zero() const { return lvl_.empty(); }
    const std::vector<double>& breakpoints() const { return bps_; }
    const std::vector<double>& levels() const { return lvl_; }

    // Pointwise addition via breakpoint refinement.
    void accumulate(const LiquidityDistribution& other);
    friend LiquidityDistribution operator+(LiquidityDistribution a, const LiquidityDistribution& b) {
        a.accumulate(b);
        return a;
    }

    // Adds delta on [p_lo, p_hi); negative deltas floor at zero and reject
    // anything that would drive a level materially below it.
    void apply_delta(double p_lo, double p_hi, double delta);

    LiquidityDistribution scaled(double factor) const;

    bool operator==(const LiquidityDistribution&) const = default;

private:
    void prune();

    std::vector<double> bps_;  // n+1 entries for n intervals; empty when zero
    std::vector<double> lvl_;  // n entries
};

// Reserve maps at implied price p.  x* is denominated in the risky asset,
// y* in the numeraire; both are sums over the distribution's intervals with
// the active interval split at p.
double reserves_x(const CurveSpec& curve, double p, const LiquidityDistribution& dist);
double reserves_y(const CurveSpec& curve, double p, const LiquidityDistribution& dist);

// Position value under an external mark: risky leg priced at p_ext, reserve
// composition taken at the pool-implied price p_implied.
double portfolio_value(const CurveSpec& curve, double p_ext, double p_implied,
                       const LiquidityDistribution& dist);

inline constexpr int64_t kMaxTick = 887272;

// 1.0001^tick by repeated squaring from the exact double constant, so results
// do not depend on any platform transcendental function.  Negative ticks use
// the reciprocal of the positive power.
double tick_to_price(int64_t tick);

// Same power computed in Q64.64 fixed point (128-bit intermediate products);
// validation path for tick_to_price.  Defined for |tick| <= 400000.
double tick_to_price_q64(int64_t tick);

// Nearest tick-grid prices enclosing p: tick_lower is the largest multiple of
// spacing whose price is <= p, tick_upper the smallest with price >= p.  A
// price exactly on a multiple returns that multiple for both.
int64_t tick_lower(double p, int64_t spacing);
int64_t tick_upper(double p, int64_t spacing);

// Recovers the implied price from a reserve pair by monotone bisection on y*,
// then insists both legs reproduce to within 1e-9 * max(1, |x|, |y|).
double implied_price_check(const CurveSpec& curve, double x, double y,
                           const LiquidityDistribution& dist);

}  // namespace flair
