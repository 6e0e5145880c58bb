#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "flair/backtest.hpp"
#include "flair/metrics.hpp"
#include "flair/scenarios.hpp"
#include "support.hpp"

using namespace flair;
using testsupport::cfmm_pool_log;
using testsupport::random_log;
using testsupport::rel_close;

namespace {

StrategySpec full_range(double capital = 1.0) {
    StrategySpec s;
    s.family = StrategyFamily::passive_full_range;
    s.capital = capital;
    return s;
}

StrategySpec fixed_range(int64_t lo, int64_t hi, double capital = 1.0) {
    StrategySpec s;
    s.family = StrategyFamily::passive_fixed_range;
    s.capital = capital;
    s.tick_lower = lo;
    s.tick_upper = hi;
    return s;
}

StrategySpec tracker(int64_t width, double every, double capital = 1.0) {
    StrategySpec s;
    s.family = StrategyFamily::tick_tracking;
    s.capital = capital;
    s.width = width;
    s.rebalance_every = every;
    return s;
}

StrategySpec jit(double capital = 1.0) {
    StrategySpec s;
    s.family = StrategyFamily::just_in_time;
    s.capital = capital;
    return s;
}

// Pieces must tile [t0, T] in order; rebalance records must be value-neutral.
void check_invariants(const StrategyOutcome& out, double t0, double T) {
    double covered = 0.0, cursor = t0;
    for (const auto& piece : out.pieces) {
        CHECK(piece.t_start == cursor);
        CHECK(piece.t_end > piece.t_start);
        CHECK(piece.share >= 0.0);
        CHECK(piece.share <= 1.0);
        covered += piece.t_end - piece.t_start;
        cursor = piece.t_end;
    }
    CHECK(cursor == T);
    CHECK(rel_close(covered, T - t0, 1e-12));
    CHECK(out.events.size() == out.rebalances);
    for (const auto& ev : out.events)
        CHECK(rel_close(ev.value_before, ev.value_after, 1e-9));
}

}  // namespace

TEST_CASE("full range on the two-LP constant-product pool: closed-form competitiveness") {
    // Incumbent aggregate value 2c = 10 at p = 4; a full-range entrant with
    // capital 5 holds a 1/3 liquidity share, so cm = 10 * (1/3) / 5 = 2/3.
    const auto log = cfmm_pool_log(5.0, 1.0, 4.0, 10);
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto out = evaluate_strategy(tl, full_range(5.0), 0.0, 10.0);
    CHECK(rel_close(out.cm, 2.0 / 3.0, 1e-12));
    CHECK(out.profit == out.cm);  // sigma = 0: identical bit for bit
    CHECK(out.rebalances == 0);
    CHECK(out.pieces.size() == 10);
    CHECK(rel_close(out.pieces.front().value, 5.0, 1e-9));
    CHECK(rel_close(out.pieces.front().share, 1.0 / 3.0, 1e-12));
    check_invariants(out, 0.0, 10.0);
}

TEST_CASE("capital constraint binds at deployment for every family") {
    SplitMix64 rng(401u);
    for (int trial = 0; trial < 40; ++trial) {
        const auto rl = random_log(rng, 20);
        const auto tl = PoolTimeline::ingest(rl.curve, rl.events);
        const double t0 = tl.span_start(), T = tl.span_end();
        const double c = std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
        const int64_t ts = tl.curve().tick_spacing;
        const int64_t lo = tick_lower(tl.implied_price(0), ts);
        for (const auto& spec : {full_range(c), fixed_range(lo - 5 * ts, lo + 5 * ts, c),
                                 tracker(3, (T - t0) / 7.0, c), jit(c)}) {
            const auto out = evaluate_strategy(tl, spec, t0, T);
            REQUIRE(!out.pieces.empty());
            CHECK(std::abs(out.pieces.front().value - c) <= 1e-9 * std::max(1.0, c));
            CHECK(out.profit == out.cm);
            CHECK(std::isfinite(out.cm));
            check_invariants(out, t0, T);
        }
    }
}

TEST_CASE("narrow tracker beats the full range when the price never moves") {
    const auto log = cfmm_pool_log(5.0, 1.0, 4.0, 10);
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto fr = evaluate_strategy(tl, full_range(5.0), 0.0, 10.0);
    const auto tt = evaluate_strategy(tl, tracker(1, 1.0, 5.0), 0.0, 10.0);
    // One spacing around a pinned price concentrates the whole budget where
    // the fees land; the share premium is large, not marginal.
    CHECK(tt.cm > fr.cm);
    CHECK(tt.cm > 2.0 * fr.cm);
    CHECK(tt.rebalances == 0);  // re-centers on an unmoved price are no-ops
    check_invariants(tt, 0.0, 10.0);
}

TEST_CASE("just-in-time entrant recovers the competitive benchmark on the pair scenario") {
    ScenarioSpec spec;
    spec.kind = ScenarioKind::v3_fully_competitive_pair;
    spec.grid_step = 10.0 / 128.0;
    const auto tl = PoolTimeline::ingest(spec.curve(), generate(spec));
    const double c = spec.fee / (4.0 * spec.gamma);  // one incumbent's capital
    const auto j = evaluate_strategy(tl, jit(c), spec.t0, spec.T);
    // Same range and sizing rule as the two incumbents: the entrant becomes a
    // third equal competitor with share 1/3 throughout.
    CHECK(rel_close(j.cm, (spec.T - spec.t0) * spec.fee / (3.0 * c), 1e-9));
    CHECK(j.rebalances == 0);
    const auto fr = evaluate_strategy(tl, full_range(c), spec.t0, spec.T);
    CHECK(j.cm > 5.0 * fr.cm);
    check_invariants(j, spec.t0, spec.T);
}

TEST_CASE("just-in-time re-ranges follow a trending price and stay self-financing") {
    ScenarioSpec spec;
    spec.kind = ScenarioKind::v3_fully_competitive_pair;
    spec.trajectory = Trajectory::linear;
    spec.grid_step = 10.0 / 128.0;
    const auto tl = PoolTimeline::ingest(spec.curve(), generate(spec));
    const auto out = evaluate_strategy(tl, jit(10.0), spec.t0, spec.T);
    // The price sweeps [1, 4], roughly 230 tick cells at spacing 60; nearly
    // every one of the 128 steps lands in a fresh cell.
    CHECK(out.rebalances > 50);
    check_invariants(out, spec.t0, spec.T);
}

TEST_CASE("scheduled re-centers act on the price observed strictly before the boundary") {
    // Price 1 on [0,1), then 4 on [1,3).  A width-1 tracker re-centering every
    // unit: the re-center at t=1 still sees price 1 (no-op), so segment [1,2)
    // earns nothing; the one at t=2 sees price 4 and moves the range.
    std::vector<PoolEvent> events;
    PoolEvent mark;
    mark.timestamp = 0.0;
    mark.kind = EventKind::price_mark;
    mark.implied_price_after = 1.0;
    events.push_back(mark);
    PoolEvent anchor;
    anchor.timestamp = 0.0;
    anchor.kind = EventKind::mint;
    anchor.position_id = "anchor";
    anchor.tick_lower = -2640;
    anchor.tick_upper = 16500;
    anchor.liquidity_delta = 100.0;
    events.push_back(anchor);
    for (int k = 1; k <= 3; ++k) {
        PoolEvent s;
        s.timestamp = static_cast<double>(k);
        s.kind = EventKind::swap;
        s.fee_amount = 1.0;
        s.implied_price_after = 4.0;
        events.push_back(s);
    }
    CurveSpec curve;  // concentrated, spacing 60
    const auto tl = PoolTimeline::ingest(curve, events);

    const auto out = evaluate_strategy(tl, tracker(1, 1.0, 5.0), 0.0, 3.0);
    REQUIRE(out.pieces.size() == 3);
    CHECK(out.pieces[0].share > 0.9);   // in range while the price sits at 1
    CHECK(out.pieces[1].share == 0.0);  // stale range through [1,2)
    CHECK(out.pieces[2].share > 0.8);   // re-centered at t=2 onto price 4
    CHECK(out.rebalances == 1);
    REQUIRE(out.events.size() == 1);
    CHECK(out.events[0].t == 2.0);
    check_invariants(out, 0.0, 3.0);

    // Mid-segment re-centers read the same segment's price: with cadence 0.8
    // the t=1.6 re-center already sees price 4 and recovers half of [1,2).
    const auto mid = evaluate_strategy(tl, tracker(1, 0.8, 5.0), 0.0, 3.0);
    REQUIRE(mid.pieces.size() == 6);  // splits at 0.8, 1.6 and 2.4
    CHECK(mid.pieces[2].t_start == 1.0);
    CHECK(mid.pieces[2].t_end == 1.6);
    CHECK(mid.pieces[2].share == 0.0);
    CHECK(mid.pieces[3].t_start == 1.6);
    CHECK(mid.pieces[3].share > 0.8);
    CHECK(mid.rebalances == 1);
    check_invariants(mid, 0.0, 3.0);
}

TEST_CASE("bouncing price: the wide range beats the tracker that is always late") {
    // Price alternates 1,4,1,4,... each unit step; the unit-cadence tracker
    // re-centers onto the price that just left and earns only the first
    // segment, while the wide range keeps a constant share.
    std::vector<PoolEvent> events;
    PoolEvent mark;
    mark.timestamp = 0.0;
    mark.kind = EventKind::price_mark;
    mark.implied_price_after = 1.0;
    events.push_back(mark);
    PoolEvent anchor;
    anchor.timestamp = 0.0;
    anchor.kind = EventKind::mint;
    anchor.position_id = "anchor";
    anchor.tick_lower = -2640;
    anchor.tick_upper = 16500;
    anchor.liquidity_delta = 100.0;
    events.push_back(anchor);
    for (int k = 1; k <= 100; ++k) {
        PoolEvent s;
        s.timestamp = static_cast<double>(k);
        s.kind = EventKind::swap;
        s.fee_amount = 1.0;
        s.implied_price_after = (k % 2 == 1) ? 4.0 : 1.0;
        events.push_back(s);
    }
    CurveSpec curve;
    const auto tl = PoolTimeline::ingest(curve, events);

    const auto res = optimize(tl, {full_range(), tracker(1, 1.0)}, 5.0, 0.0, 100.0,
                              Objective::competitiveness);
    CHECK(res.outcomes[res.best_competitiveness].spec.label() == "PassiveFullRange");
    const auto& tt = res.outcomes[1];
    CHECK(tt.cm < res.outcomes[0].cm);
    // First boundary still sees price 1 (no-op); each later one flips the range.
    CHECK(tt.rebalances == 98);
    for (size_t i = 1; i < tt.pieces.size(); ++i) CHECK(tt.pieces[i].share == 0.0);
}

TEST_CASE("high volatility splits the two objectives") {
    const auto log = cfmm_pool_log(5.0, 1.0, 4.0, 10);
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const std::vector<StrategySpec> grid{full_range(), tracker(1, 1.0)};

    const auto calm = optimize(tl, grid, 5.0, 0.0, 10.0, Objective::competitiveness, 0.0);
    CHECK(calm.best_competitiveness == calm.best_profitability);
    for (const auto& o : calm.outcomes) CHECK(o.profit == o.cm);

    // At sigma = 0.5 the tracker's concentrated liquidity makes its loss rate
    // dwarf its fees; fee share still favours it, net profit does not.
    const auto wild = optimize(tl, grid, 5.0, 0.0, 10.0, Objective::profitability, 0.5);
    CHECK(wild.best_competitiveness == 1);
    CHECK(wild.best_profitability == 0);
    CHECK(wild.outcomes[1].profit < 0.0);
    CHECK(wild.outcomes[0].profit > 0.0);
    CHECK(wild.outcomes[1].cm > wild.outcomes[0].cm);
    CHECK(wild.winner().spec.family == StrategyFamily::passive_full_range);

    const auto j = wild.to_json();
    CHECK(j["objective"] == "profitability");
    CHECK(j["best_competitiveness"] == "TickTracking(w=1,every=1.0)");
    CHECK(j["best_profitability"] == "PassiveFullRange");
    CHECK(j["winner"] == "PassiveFullRange");
    CHECK(j["outcomes"].size() == 2);

    std::ostringstream csv;
    wild.write_ranking_csv(csv);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "rank,strategy,cm,profit,rebalances");
    std::getline(lines, line);
    CHECK(line.rfind("1,PassiveFullRange,", 0) == 0);
    std::getline(lines, line);
    CHECK(line.rfind("2,TickTracking(w=1,every=1.0),", 0) == 0);
}

TEST_CASE("a larger grid never does worse") {
    SplitMix64 rng(402u);
    for (int trial = 0; trial < 25; ++trial) {
        const auto rl = random_log(rng, 25);
        const auto tl = PoolTimeline::ingest(rl.curve, rl.events);
        const double t0 = tl.span_start(), T = tl.span_end();
        const std::vector<StrategySpec> small{full_range()};
        std::vector<StrategySpec> big = small;
        big.push_back(tracker(1, (T - t0) / 11.0));
        big.push_back(tracker(5, (T - t0) / 5.0));
        big.push_back(jit());
        const auto a = optimize(tl, small, 3.0, t0, T, Objective::competitiveness);
        const auto b = optimize(tl, big, 3.0, t0, T, Objective::competitiveness);
        CHECK(b.outcomes[b.best_competitiveness].cm >= a.outcomes[a.best_competitiveness].cm);
        CHECK(b.outcomes[b.best_profitability].profit >= a.outcomes[a.best_profitability].profit);
    }
}

TEST_CASE("out-of-range fixed position earns nothing but keeps its value") {
    const auto log = cfmm_pool_log(5.0, 1.0, 4.0, 10);  // price pinned at 4
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto out = evaluate_strategy(tl, fixed_range(60000, 60600, 5.0), 0.0, 10.0);
    CHECK(out.cm == 0.0);
    CHECK(out.profit == 0.0);
    for (const auto& piece : out.pieces) {
        CHECK(piece.share == 0.0);
        CHECK(piece.value > 0.0);  // all-risky leg, still marked to market
    }
    check_invariants(out, 0.0, 10.0);
}

TEST_CASE("spec validation and evaluation failures carry the right kinds") {
    const auto log = cfmm_pool_log();
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto kind_of = [&](const StrategySpec& s, double t0, double T, double sigma = 0.0) {
        try {
            evaluate_strategy(tl, s, t0, T, sigma);
        } catch (const Error& e) {
            return e.kind();
        }
        return Errc::internal;
    };
    CHECK(kind_of(full_range(0.0), 0.0, 10.0) == Errc::invalid_spec);
    CHECK(kind_of(fixed_range(120, 60), 0.0, 10.0) == Errc::invalid_spec);
    CHECK(kind_of(fixed_range(30, 120), 0.0, 10.0) == Errc::invalid_spec);  // misaligned
    CHECK(kind_of(tracker(0, 1.0), 0.0, 10.0) == Errc::invalid_spec);
    CHECK(kind_of(tracker(1, 0.0), 0.0, 10.0) == Errc::invalid_spec);
    CHECK(kind_of(full_range(), 4.0, 4.0) == Errc::window_mismatch);
    CHECK(kind_of(full_range(), 0.0, 99.0) == Errc::out_of_range_time);
    CHECK(kind_of(full_range(), 0.0, 10.0, -1.0) == Errc::invalid_config);

    try {
        optimize(tl, {}, 1.0, 0.0, 10.0, Objective::competitiveness);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == Errc::empty_grid);
    }

    // A log with no price observation anywhere cannot host a deployment.
    std::vector<PoolEvent> blind;
    for (double t : {0.0, 5.0}) {
        PoolEvent m;
        m.timestamp = t;
        m.kind = EventKind::mint;
        m.position_id = "a";
        m.tick_lower = -60;
        m.tick_upper = 60;
        m.liquidity_delta = 10.0;
        blind.push_back(m);
    }
    const auto dark = PoolTimeline::ingest(CurveSpec{}, blind);
    try {
        evaluate_strategy(dark, full_range(), 0.0, 5.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == Errc::infeasible_capital);
    }
}

TEST_CASE("singleton grid: winner is the only candidate under either objective") {
    const auto log = cfmm_pool_log();
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    for (const auto obj : {Objective::competitiveness, Objective::profitability}) {
        const auto res = optimize(tl, {full_range()}, 2.0, 0.0, 10.0, obj);
        CHECK(res.best_competitiveness == 0);
        CHECK(res.best_profitability == 0);
        CHECK(res.winner().spec.label() == "PassiveFullRange");
        CHECK(res.capital == 2.0);
    }
}

TEST_CASE("strategy grid config: cross-product expansion and validation") {
    const auto j = nlohmann::json::parse(R"({
        "capital": 7.5,
        "strategies": [
            {"family": "PassiveFullRange"},
            {"family": "PassiveFixedRange", "tick_lower": -120, "tick_upper": 180},
            {"family": "TickTracking", "width": [1, 3], "rebalance_every": [0.5, 2.0]},
            {"family": "JustInTime"}
        ]
    })");
    const auto cfg = strategy_grid_from_json(j);
    CHECK(cfg.capital == 7.5);
    REQUIRE(cfg.strategies.size() == 7);
    CHECK(cfg.strategies[0].label() == "PassiveFullRange");
    CHECK(cfg.strategies[1].label() == "PassiveFixedRange[-120,180]");
    CHECK(cfg.strategies[2].label() == "TickTracking(w=1,every=0.5)");
    CHECK(cfg.strategies[3].label() == "TickTracking(w=1,every=2.0)");
    CHECK(cfg.strategies[4].label() == "TickTracking(w=3,every=0.5)");
    CHECK(cfg.strategies[5].label() == "TickTracking(w=3,every=2.0)");
    CHECK(cfg.strategies[6].label() == "JustInTime");

    const auto kind_of = [](const char* text) {
        try {
            strategy_grid_from_json(nlohmann::json::parse(text));
        } catch (const Error& e) {
            return e.kind();
        }
        return Errc::internal;
    };
    CHECK(kind_of(R"({"strategies": []})") == Errc::invalid_config);
    CHECK(kind_of(R"({"strategies": [{"family": "NoSuchFamily"}]})") == Errc::invalid_config);
    CHECK(kind_of(R"({"strategies": [{"width": 3}]})") == Errc::invalid_config);
    CHECK(kind_of(R"({"budget": 1, "strategies": [{"family": "JustInTime"}]})") ==
          Errc::invalid_config);
    CHECK(kind_of(R"({"strategies": [{"family": "PassiveFullRange", "width": 3}]})") ==
          Errc::invalid_config);
    CHECK(kind_of(R"({"capital": "lots", "strategies": [{"family": "JustInTime"}]})") ==
          Errc::invalid_config);
    CHECK(kind_of(R"([1, 2, 3])") == Errc::invalid_config);

    // A tracker descriptor without a cadence parses, but cannot be evaluated.
    const auto half = strategy_grid_from_json(
        nlohmann::json::parse(R"({"strategies": [{"family": "TickTracking", "width": 1}]})"));
    REQUIRE(half.strategies.size() == 1);
    const auto log = cfmm_pool_log();
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    CHECK_THROWS_AS(evaluate_strategy(tl, half.strategies[0], 0.0, 10.0), Error);
}

TEST_CASE("family names round-trip") {
    for (const auto f : {StrategyFamily::passive_full_range, StrategyFamily::passive_fixed_range,
                         StrategyFamily::tick_tracking, StrategyFamily::just_in_time})
        CHECK(strategy_family_from_name(strategy_family_name(f)) == f);
    CHECK_THROWS_AS(strategy_family_from_name("Martingale"), Error);
}
