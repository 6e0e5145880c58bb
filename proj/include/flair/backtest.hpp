#pragma once
// Competitiveness backtesting for hypothetical new positions: simulate a
// parametrized liquidity strategy through a historical timeline under a
// capital constraint at deployment, compute its competitiveness (the fee-share
// denominator includes the new liquidity itself) and its profitability (fees
// net of the attributed loss rate), and take the best over an explicit grid.
//
// Conventions:
//  - Capital binds at t0 only; every later rebalance is self-financing: the
//    position's current value, marked at the prevailing prices, is redeployed
//    into the new range by re-solving the liquidity scalar.
//  - Historical fees and prices are held fixed; only shares are recomputed
//    with the new liquidity added (stated limitation: flow response to added
//    depth is not modelled).
//  - No lookahead: a scheduled (TickTracking) rebalance re-centers on the
//    last price observed strictly before the rebalance instant; an event at
//    the same timestamp as a price change therefore acts on the prior price.
//    JustInTime is the deliberate exception - it re-ranges at every segment
//    start around that segment's own price, which is the point of the family.
//  - The attributed loss share mirrors fee attribution: the new position's
//    loss is the pool rate times its in-range liquidity share, which reduces
//    to the Black-Scholes rate on its own liquidity.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "flair/timeline.hpp"

namespace flair {

enum class StrategyFamily : int {
    passive_full_range = 0,
    passive_fixed_range = 1,
    tick_tracking = 2,
    just_in_time = 3,
};

const char* strategy_family_name(StrategyFamily f);
StrategyFamily strategy_family_from_name(const std::string& name);

struct StrategySpec {
    StrategyFamily family = StrategyFamily::passive_full_range;
    double capital = 1.0;        // numeraire value deployed at t0
    int64_t tick_lower = 0;      // passive_fixed_range
    int64_t tick_upper = 0;      // passive_fixed_range
    int64_t width = 1;           // tick_tracking: range width in spacings
    double rebalance_every = 0;  // tick_tracking: re-center interval

    void validate(const CurveSpec& curve) const;
    std::string label() const;
};

// One constant-state stretch of the simulated position.  own_level and share
// are taken at the segment's implied price; value marks the risky leg at the
// segment's external price.
struct StrategyPiece {
    double t_start = 0.0;
    double t_end = 0.0;
    double own_level = 0.0;
    double share = 0.0;  // own / (incumbent aggregate + own)
    double value = 0.0;
    double cm_integrand = 0.0;
    double profit_integrand = 0.0;
};

// Self-financing audit record: values immediately before and after a
// redeployment, both marked at the same prevailing prices.
struct RebalanceRecord {
    double t = 0.0;
    double value_before = 0.0;
    double value_after = 0.0;
    double p_lo = 0.0;  // new range, price space
    double p_hi = 0.0;
};

struct StrategyOutcome {
    StrategySpec spec;
    double cm = 0.0;
    double profit = 0.0;
    size_t rebalances = 0;  // executed range changes (no-op re-centers excluded)
    std::vector<StrategyPiece> pieces;
    std::vector<RebalanceRecord> events;
};

// Simulates one strategy over [t0, T].  sigma feeds the loss rate in the
// profitability objective; zero makes profit coincide with cm bit-for-bit.
StrategyOutcome evaluate_strategy(const PoolTimeline& tl, const StrategySpec& spec, double t0, double T,
                                  double sigma = 0.0);

enum class Objective { competitiveness, profitability };

struct BacktestResult {
    Objective objective = Objective::competitiveness;
    double capital = 0.0;
    double sigma = 0.0;
    double t0 = 0.0;
    double t1 = 0.0;
    std::vector<StrategyOutcome> outcomes;  // grid order
    size_t best_competitiveness = 0;        // index into outcomes
    size_t best_profitability = 0;

    const StrategyOutcome& winner() const {
        return outcomes[objective == Objective::competitiveness ? best_competitiveness
                                                                : best_profitability];
    }
    nlohmann::json to_json() const;
    // One row per strategy, ranked by the chosen objective (ties: fewest
    // rebalances, then family declaration order, then grid order).
    void write_ranking_csv(std::ostream& out) const;
};

// Evaluates every candidate with the uniform capital c and returns the
// arg-sup per objective under the ranking order above.
BacktestResult optimize(const PoolTimeline& tl, std::vector<StrategySpec> grid, double c, double t0,
                        double T, Objective objective, double sigma = 0.0);

struct GridConfig {
    double capital = 0.0;  // 0 = not given in the file
    std::vector<StrategySpec> strategies;
};

// Parses a strategy-grid config: {"capital": c, "strategies": [descriptor...]}
// where a descriptor carries "family" plus family parameters; TickTracking's
// "width" and "rebalance_every" accept scalars or arrays (cross-product).
GridConfig strategy_grid_from_json(const nlohmann::json& j);

}  // namespace flair
