#pragma once
// Shared helpers for the test suites: relative comparison and randomized
// generators for distributions and event logs.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flair/curve.hpp"
#include "flair/rng.hpp"
#include "flair/timeline.hpp"

namespace testsupport {

inline bool rel_close(double a, double b, double tol) {
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    return std::abs(a - b) <= tol * scale;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1e-300, std::abs(want));
}

// Random piecewise-constant distribution: up to max_intervals intervals with
// multiplicative gaps, levels in [0, 1000] with occasional zeros.
inline flair::LiquidityDistribution random_dist(flair::SplitMix64& rng, int max_intervals = 5) {
    const int n = 1 + static_cast<int>(rng.below(static_cast<uint64_t>(max_intervals)));
    std::vector<double> bps, lvl;
    double p = std::exp(rng.uniform(std::log(1e-3), std::log(1e3)));
    bps.push_back(p);
    bool any_positive = false;
    for (int i = 0; i < n; ++i) {
        p *= rng.uniform(1.05, 3.0);
        bps.push_back(p);
        double level = rng.uniform() < 0.2 ? 0.0 : rng.uniform(1e-3, 1000.0);
        if (level > 0.0) any_positive = true;
        lvl.push_back(level);
    }
    if (!any_positive) lvl[0] = rng.uniform(1e-3, 1000.0);
    return flair::LiquidityDistribution(bps, lvl);
}

struct RandomLog {
    flair::CurveSpec curve;
    std::vector<flair::PoolEvent> events;
};

// Valid random event log: a wide anchor position keeps every fee-bearing
// segment backed by active liquidity; extra positions mint and partially burn
// tick-aligned ranges that may drift out of range.
inline RandomLog random_log(flair::SplitMix64& rng, int steps = 30) {
    using namespace flair;
    RandomLog out;
    out.curve.kind = CurveKind::concentrated_v3;
    out.curve.tick_spacing = rng.uniform() < 0.5 ? 10 : 60;
    out.curve.fee_rate = 0.003;
    const int64_t ts = out.curve.tick_spacing;

    std::vector<double> path(static_cast<size_t>(steps) + 1);
    path[0] = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    for (int j = 1; j <= steps; ++j) path[j] = path[j - 1] * std::exp(0.02 * rng.normal());
    const auto [lo_it, hi_it] = std::minmax_element(path.begin(), path.end());

    std::vector<double> times(path.size());
    times[0] = rng.uniform(0.0, 10.0);
    for (size_t j = 1; j < times.size(); ++j) times[j] = times[j - 1] + rng.uniform(0.1, 2.0);

    const int64_t anchor_lo = tick_lower(*lo_it / 1.3, ts), anchor_hi = tick_upper(*hi_it * 1.3, ts);
    PoolEvent mark;
    mark.timestamp = times[0];
    mark.kind = EventKind::price_mark;
    mark.implied_price_after = path[0];
    out.events.push_back(mark);

    PoolEvent anchor;
    anchor.timestamp = times[0];
    anchor.kind = EventKind::mint;
    anchor.position_id = "anchor";
    anchor.tick_lower = anchor_lo;
    anchor.tick_upper = anchor_hi;
    anchor.liquidity_delta = rng.uniform(50.0, 500.0);
    out.events.push_back(anchor);

    struct Lot {
        int64_t lo, hi;
        double amount;
    };
    std::vector<std::vector<Lot>> lots(3);
    const auto position_name = [](size_t k) { return "lp" + std::to_string(k); };
    const int extra = 1 + static_cast<int>(rng.below(3));
    for (int k = 0; k < extra; ++k) {
        PoolEvent m;
        m.timestamp = times[0];
        m.kind = EventKind::mint;
        m.position_id = position_name(static_cast<size_t>(k));
        const int64_t width = ts * static_cast<int64_t>(1 + rng.below(8));
        const int64_t lo = tick_lower(path[0] * std::exp(rng.uniform(-0.05, 0.05)), ts);
        m.tick_lower = lo - width / 2 / ts * ts;
        m.tick_upper = *m.tick_lower + width;
        m.liquidity_delta = rng.uniform(10.0, 300.0);
        lots[static_cast<size_t>(k)].push_back({*m.tick_lower, *m.tick_upper, m.liquidity_delta});
        out.events.push_back(m);
    }

    for (int j = 1; j <= steps; ++j) {
        PoolEvent s;
        s.timestamp = times[static_cast<size_t>(j)];
        s.kind = EventKind::swap;
        s.fee_amount = rng.uniform() < 0.2 ? 0.0 : rng.uniform(0.01, 2.0);
        s.implied_price_after = path[static_cast<size_t>(j)];
        if (rng.uniform() < 0.15) s.external_price = path[static_cast<size_t>(j)] * rng.uniform(0.99, 1.01);
        out.events.push_back(s);
        // Occasional extra mint or partial burn between swaps.
        if (rng.uniform() < 0.25) {
            const size_t k = rng.below(static_cast<uint64_t>(extra));
            if (!lots[k].empty() && rng.uniform() < 0.5) {
                Lot& lot = lots[k][rng.below(lots[k].size())];
                if (lot.amount > 1e-6) {
                    PoolEvent b;
                    b.timestamp = s.timestamp;
                    b.kind = EventKind::burn;
                    b.position_id = position_name(k);
                    b.tick_lower = lot.lo;
                    b.tick_upper = lot.hi;
                    const double part = lot.amount * rng.uniform(0.2, 1.0);
                    b.liquidity_delta = -part;
                    lot.amount -= part;
                    out.events.push_back(b);
                }
            } else {
                PoolEvent m;
                m.timestamp = s.timestamp;
                m.kind = EventKind::mint;
                m.position_id = position_name(k);
                const int64_t lo = tick_lower(path[static_cast<size_t>(j)], ts);
                m.tick_lower = lo;
                m.tick_upper = lo + ts * static_cast<int64_t>(1 + rng.below(4));
                m.liquidity_delta = rng.uniform(5.0, 100.0);
                lots[k].push_back({*m.tick_lower, *m.tick_upper, m.liquidity_delta});
                out.events.push_back(m);
            }
        }
    }
    return out;
}

// Two equal full-range constant-product LPs ("a" and "b") holding capital c
// each at constant price p, with a fee lump f landing every unit step over
// [0, steps].  Full-range value is 2 L sqrt(p), so L = c / (2 sqrt(p)).
inline RandomLog cfmm_pool_log(double c = 5.0, double f = 1.0, double p = 4.0, int steps = 10) {
    using namespace flair;
    RandomLog out;
    out.curve.kind = CurveKind::constant_product;
    const double level = c / (2.0 * std::sqrt(p));
    for (const char* id : {"a", "b"}) {
        PoolEvent m;
        m.timestamp = 0.0;
        m.kind = EventKind::mint;
        m.position_id = id;
        m.liquidity_delta = level;
        out.events.push_back(m);
    }
    PoolEvent mark;
    mark.timestamp = 0.0;
    mark.kind = EventKind::price_mark;
    mark.implied_price_after = p;
    out.events.push_back(mark);
    for (int k = 1; k <= steps; ++k) {
        PoolEvent s;
        s.timestamp = static_cast<double>(k);
        s.kind = EventKind::swap;
        s.fee_amount = f;
        s.implied_price_after = p;
        out.events.push_back(s);
    }
    return out;
}

// Scales every mint/burn liquidity_delta by factor; restricted to one
// position when only_id is non-empty.  Price path and fees are untouched.
inline std::vector<flair::PoolEvent> scale_liquidity(std::vector<flair::PoolEvent> events, double factor,
                                                     const std::string& only_id = "") {
    for (auto& e : events) {
        const bool is_liq = e.kind == flair::EventKind::mint || e.kind == flair::EventKind::burn;
        if (is_liq && (only_id.empty() || e.position_id == only_id)) e.liquidity_delta *= factor;
    }
    return events;
}

// Drops explicit external prices so the external path coincides with the
// implied path everywhere.
inline std::vector<flair::PoolEvent> strip_external(std::vector<flair::PoolEvent> events) {
    for (auto& e : events)
        if (e.kind != flair::EventKind::price_mark) e.external_price.reset();
    return events;
}

}  // namespace testsupport
