#pragma once
// Synthetic scenario generators.  Each produces a well-formed event log whose
// ingested aggregate competitiveness is known either in closed form or by an
// independent limit argument, so they double as the oracle corpus for the
// acceptance suite:
//
//  - CfmmConstantPrice: n equal full-range constant-product LPs, capital c
//    each, price pinned; CM_agg = f (T - t0) / (n c) at any grid.
//  - CfmmLinearPrice: same pool under a linearly rising price; CM_agg
//    converges to 2 f (T - t0) sqrt(p_min) / (n c (sqrt(p_min)+sqrt(p_max)))
//    as the grid step shrinks (left-endpoint sampling, O(step) error).
//  - V3FullyCompetitivePair: n just-in-time LPs re-ranging every step around
//    the current price, each re-sized so the aggregate pool value is always
//    f / (2 gamma); CM_agg = 2 gamma (T - t0) at any grid, any trajectory.
//  - V3PassiveVsCompetitive: one passive LP spanning [p_min, p_max] against
//    one re-ranging LP on a rebalance cadence; no general closed form (tick
//    rounding dominates), but with a spacing wide enough to span the band it
//    reproduces the fully-competitive value.
//  - GbmPath: passive LPs under a seeded geometric-Brownian log-price walk
//    reflected at the band edges (keeps every fee-bearing segment backed by
//    live liquidity).
//
// Identical specs generate byte-identical logs.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "flair/curve.hpp"
#include "flair/timeline.hpp"

namespace flair {

enum class ScenarioKind {
    cfmm_constant_price,
    cfmm_linear_price,
    v3_fully_competitive_pair,
    v3_passive_vs_competitive,
    gbm_path,
};

enum class Trajectory { constant, linear };

const char* scenario_kind_name(ScenarioKind k);
ScenarioKind scenario_kind_from_name(const std::string& name);

struct ClosedForm {
    bool available = false;
    double value = 0.0;
    // True when the generated log reproduces the value at any grid step;
    // false when the value is the grid-step -> 0 limit.
    bool exact_at_any_grid = false;
};

struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::cfmm_constant_price;
    double p_min = 1.0;
    double p_max = 4.0;
    double t0 = 0.0;
    double T = 10.0;
    double fee = 1.0;          // fee lump per unit time landing on each swap
    double gamma = 0.003;      // pool fee fraction (v3 kinds' sizing constant)
    int64_t tick_spacing = 60;
    int n = 2;                 // LP count
    double c = 5.0;            // per-LP capital; 0 on v3 kinds = flow-serving default
    double grid_step = 0.0;    // 0 -> (T - t0) / 2048
    Trajectory trajectory = Trajectory::constant;  // v3 kinds' price path
    double sigma = 0.0;        // gbm_path volatility per sqrt(time unit)
    uint64_t seed = 0;         // gbm_path
    double rebalance_every = 0.0;  // v3_passive_vs_competitive cadence; 0 -> grid_step

    static ScenarioSpec from_json(const nlohmann::json& j);
    void validate() const;

    // Curve the generated log is meant to be ingested with.
    CurveSpec curve() const;

    double step() const { return grid_step > 0.0 ? grid_step : (T - t0) / 2048.0; }
    size_t step_count() const;
};

std::vector<PoolEvent> generate(const ScenarioSpec& spec);

ClosedForm closed_form(const ScenarioSpec& spec);

}  // namespace flair
