#include <doctest.h>

#include <cmath>
#include <sstream>

#include "flair/metrics.hpp"
#include "support.hpp"

using namespace flair;
using testsupport::cfmm_pool_log;
using testsupport::random_log;
using testsupport::rel_close;
using testsupport::scale_liquidity;

TEST_CASE("two equal full-range LPs at constant price: CM_i and CM_agg hit the closed form") {
    // Capital 5 each at price 4, fee 1 per unit time for 10 units:
    // CM_agg = 10 / (2*5) = 1, and each CM_i = 10 * (1 * 0.5 / 5) = 1.
    const auto log = cfmm_pool_log(5.0, 1.0, 4.0, 10);
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto agg = flair_aggregate(tl, 0.0, 10.0);
    CHECK(rel_close(agg.value, 1.0, 1e-12));
    CHECK(agg.subject == "aggregate");
    CHECK(agg.segments.size() == 10);
    for (const char* id : {"a", "b"}) {
        const auto r = flair_position(tl, id, 0.0, 10.0);
        CHECK(rel_close(r.value, 1.0, 1e-12));
        double sum = 0.0;
        for (const auto& s : r.segments) {
            CHECK(s.contribution >= 0.0);
            sum += s.contribution;
        }
        CHECK(r.value == sum);
    }
}

TEST_CASE("randomized closed-form triples (c, f, span)") {
    SplitMix64 rng(21u);
    for (int k = 0; k < 20; ++k) {
        const double c = rng.uniform(0.5, 50.0);
        const double f = rng.uniform(0.1, 4.0);
        const double p = std::exp(rng.uniform(std::log(0.25), std::log(25.0)));
        const int steps = 2 + static_cast<int>(rng.below(15));
        const auto log = cfmm_pool_log(c, f, p, steps);
        const auto tl = PoolTimeline::ingest(log.curve, log.events);
        const double want = f * steps / (2.0 * c);
        CHECK(rel_close(flair_aggregate(tl, 0.0, steps).value, want, 1e-9));
        CHECK(rel_close(flair_position(tl, "a", 0.0, steps).value, want, 1e-9));
    }
}

TEST_CASE("degenerate and error windows") {
    const auto log = cfmm_pool_log();
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto r = flair_aggregate(tl, 3.0, 3.0);
    CHECK(r.value == 0.0);
    CHECK(r.segments.empty());
    CHECK_THROWS_AS(flair_aggregate(tl, -1.0, 5.0), Error);
    CHECK_THROWS_AS(flair_aggregate(tl, 0.0, 11.0), Error);
    CHECK_THROWS_AS(flair_aggregate(tl, 7.0, 3.0), Error);
    CHECK_THROWS_AS(flair_position(tl, "nobody", 0.0, 10.0), Error);
}

TEST_CASE("a position out of range throughout earns zero") {
    // v3 pool: c sits in (p as low as ~0.5) while the price lives near 4.
    std::vector<PoolEvent> events;
    PoolEvent m;
    m.timestamp = 0.0;
    m.kind = EventKind::mint;
    m.position_id = "wide";
    m.tick_lower = 0;
    m.tick_upper = 2 * 6960;
    m.liquidity_delta = 100.0;
    events.push_back(m);
    m.position_id = "low";
    m.tick_lower = -6960;
    m.tick_upper = -6900;
    events.push_back(m);
    PoolEvent mark;
    mark.timestamp = 0.0;
    mark.kind = EventKind::price_mark;
    mark.implied_price_after = 4.0;
    events.push_back(mark);
    PoolEvent s;
    s.timestamp = 5.0;
    s.kind = EventKind::swap;
    s.fee_amount = 2.0;
    s.implied_price_after = 4.0;
    events.push_back(s);
    const auto tl = PoolTimeline::ingest(CurveSpec{}, events);
    CHECK(flair_position(tl, "low", 0.0, 5.0).value == 0.0);
    CHECK(flair_position(tl, "wide", 0.0, 5.0).value > 0.0);
}

TEST_CASE("zero-fee stream yields zero aggregate") {
    std::vector<PoolEvent> events;
    PoolEvent m;
    m.timestamp = 0.0;
    m.kind = EventKind::mint;
    m.position_id = "a";
    m.tick_lower = 0;
    m.tick_upper = 6960;
    m.liquidity_delta = 10.0;
    events.push_back(m);
    PoolEvent mark;
    mark.timestamp = 0.0;
    mark.kind = EventKind::price_mark;
    mark.implied_price_after = 1.5;
    events.push_back(mark);
    mark.timestamp = 8.0;
    events.push_back(mark);
    const auto tl = PoolTimeline::ingest(CurveSpec{}, events);
    CHECK(flair_aggregate(tl, 0.0, 8.0).value == 0.0);
    CHECK(flair_position(tl, "a", 0.0, 8.0).value == 0.0);
}

TEST_CASE("window additivity at random split points (200 cases)") {
    SplitMix64 rng(22u);
    for (int c = 0; c < 200; ++c) {
        const auto log = random_log(rng, 14);
        const auto tl = PoolTimeline::ingest(log.curve, log.events);
        const double t0 = tl.span_start(), T = tl.span_end();
        const double tm = rng.uniform(t0, T);
        CHECK(rel_close(flair_aggregate(tl, t0, tm).value + flair_aggregate(tl, tm, T).value,
                        flair_aggregate(tl, t0, T).value, 1e-12));
        const std::string id = tl.position_ids()[rng.below(tl.position_ids().size())];
        CHECK(rel_close(flair_position(tl, id, t0, tm).value + flair_position(tl, id, tm, T).value,
                        flair_position(tl, id, t0, T).value, 1e-12));
    }
}

TEST_CASE("capital-scaling inverse law (200 cases)") {
    SplitMix64 rng(23u);
    for (int c = 0; c < 200; ++c) {
        const auto log = random_log(rng, 12);
        const double lambda = std::exp(rng.uniform(std::log(0.2), std::log(5.0)));
        const auto tl = PoolTimeline::ingest(log.curve, log.events);
        const auto scaled = PoolTimeline::ingest(log.curve, scale_liquidity(log.events, lambda));
        const double t0 = tl.span_start(), T = tl.span_end();
        CHECK(rel_close(flair_aggregate(scaled, t0, T).value, flair_aggregate(tl, t0, T).value / lambda,
                        1e-12));
        for (const auto& id : tl.position_ids())
            CHECK(rel_close(flair_position(scaled, id, t0, T).value,
                            flair_position(tl, id, t0, T).value / lambda, 1e-12));
    }
}

TEST_CASE("scaling one position's liquidity never lowers its fee share (100 cases)") {
    SplitMix64 rng(24u);
    for (int c = 0; c < 100; ++c) {
        const auto log = random_log(rng, 10);
        const auto tl = PoolTimeline::ingest(log.curve, log.events);
        const std::string id = tl.position_ids()[rng.below(tl.position_ids().size())];
        const double lambda = rng.uniform(1.5, 6.0);
        const auto boosted = PoolTimeline::ingest(log.curve, scale_liquidity(log.events, lambda, id));
        for (size_t j = 0; j < tl.segment_count(); ++j) {
            const double before = tl.fee_share_at(id, tl.grid_time(j));
            const double after = boosted.fee_share_at(id, boosted.grid_time(j));
            CHECK(after >= before - 1e-12);
        }
    }
}

TEST_CASE("positions identical up to scale all match the aggregate metric") {
    SplitMix64 rng(25u);
    for (int c = 0; c < 50; ++c) {
        // n full-range CP positions with random sizes; every CM_i equals
        // CM_agg, so the value-weighted sum reproduces it exactly.
        CurveSpec cp;
        cp.kind = CurveKind::constant_product;
        std::vector<PoolEvent> events;
        const int n = 2 + static_cast<int>(rng.below(4));
        for (int k = 0; k < n; ++k) {
            PoolEvent m;
            m.timestamp = 0.0;
            m.kind = EventKind::mint;
            m.position_id = "lp" + std::to_string(k);
            m.liquidity_delta = rng.uniform(1.0, 50.0);
            events.push_back(m);
        }
        double p = std::exp(rng.uniform(std::log(0.5), std::log(8.0)));
        PoolEvent mark;
        mark.timestamp = 0.0;
        mark.kind = EventKind::price_mark;
        mark.implied_price_after = p;
        events.push_back(mark);
        for (int j = 1; j <= 6; ++j) {
            p *= std::exp(0.05 * rng.normal());
            PoolEvent s;
            s.timestamp = static_cast<double>(j);
            s.kind = EventKind::swap;
            s.fee_amount = rng.uniform(0.1, 2.0);
            s.implied_price_after = p;
            events.push_back(s);
        }
        const auto tl = PoolTimeline::ingest(cp, events);
        const double agg = flair_aggregate(tl, 0.0, 6.0).value;
        for (const auto& id : tl.position_ids())
            CHECK(rel_close(flair_position(tl, id, 0.0, 6.0).value, agg, 1e-12));
    }
}

TEST_CASE("quadrant point pairs the aggregate metric with the toxicity value") {
    const auto log = cfmm_pool_log();
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto tox = lvr(tl, 0.0, 0.0, 10.0);
    const auto [x, y] = quadrant_point(tl, tox, 0.0, 10.0);
    CHECK(x == flair_aggregate(tl, 0.0, 10.0).value);  // bit-exact by construction
    CHECK(rel_close(x, 1.0, 1e-12));
    CHECK(y == 0.0);
    try {
        quadrant_point(tl, tox, 0.0, 9.0);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.kind() == Errc::window_mismatch);
    }
}

TEST_CASE("report serialization: JSON fields and cumulative CSV") {
    const auto log = cfmm_pool_log();
    const auto tl = PoolTimeline::ingest(log.curve, log.events);
    const auto r = flair_aggregate(tl, 0.0, 10.0);
    const auto j = r.to_json();
    CHECK(j["subject"] == "aggregate");
    CHECK(j["value"].get<double>() == r.value);
    CHECK(j["window"]["start"].get<double>() == 0.0);
    CHECK(j["segments"].size() == 10);
    CHECK(j["segments"][0]["contribution"].get<double>() == r.segments[0].contribution);

    std::stringstream csv;
    r.write_csv(csv);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,cumulative_value");
    std::getline(csv, line);
    CHECK(line == "0.0,0.0");
    std::string last;
    int rows = 0;
    while (std::getline(csv, line)) {
        last = line;
        ++rows;
    }
    CHECK(rows == 10);
    CHECK(last.substr(0, 5) == "10.0,");
    const double total = std::stod(last.substr(5));
    CHECK(rel_close(total, r.value, 1e-12));
}
