#include "flair/scenarios.hpp"

#include <cmath>
#include <utility>

#include "flair/rng.hpp"

namespace flair {

namespace {

PoolEvent mk_mark(double t, double implied) {
    PoolEvent e;
    e.timestamp = t;
    e.kind = EventKind::price_mark;
    e.implied_price_after = implied;
    return e;
}

PoolEvent mk_swap(double t, double fee, double implied) {
    PoolEvent e;
    e.timestamp = t;
    e.kind = EventKind::swap;
    e.fee_amount = fee;
    e.implied_price_after = implied;
    return e;
}

PoolEvent mk_mint(double t, const std::string& id, double liquidity) {
    PoolEvent e;
    e.timestamp = t;
    e.kind = EventKind::mint;
    e.position_id = id;
    e.liquidity_delta = liquidity;
    return e;
}

PoolEvent mk_mint(double t, const std::string& id, int64_t lo, int64_t hi, double liquidity) {
    PoolEvent e = mk_mint(t, id, liquidity);
    e.tick_lower = lo;
    e.tick_upper = hi;
    return e;
}

PoolEvent mk_burn(double t, const std::string& id, int64_t lo, int64_t hi, double liquidity) {
    PoolEvent e = mk_mint(t, id, lo, hi, -liquidity);
    e.kind = EventKind::burn;
    return e;
}

// Value of one unit of liquidity on the tick range [lo, hi] marked at p, via
// the same reserve maps ingestion uses, so sized positions reproduce their
// target value bit-for-bit downstream.
double unit_value(const CurveSpec& cv, double p, int64_t lo, int64_t hi) {
    const auto dist = LiquidityDistribution::single(tick_to_price(lo), tick_to_price(hi), 1.0);
    return portfolio_value(cv, p, p, dist);
}

// Tightest tick range containing p: one spacing, widened to two when p sits
// exactly on a grid multiple.
std::pair<int64_t, int64_t> jit_range(double p, int64_t spacing) {
    int64_t lo = tick_lower(p, spacing);
    int64_t hi = tick_upper(p, spacing);
    if (lo == hi) {
        lo -= spacing;
        hi += spacing;
    }
    return {lo, hi};
}

std::string lp_name(int k) { return "lp" + std::to_string(k); }

std::vector<PoolEvent> gen_cfmm(const ScenarioSpec& s) {
    const size_t N = s.step_count();
    const double dt = s.step();
    const bool linear = s.kind == ScenarioKind::cfmm_linear_price;
    std::vector<PoolEvent> ev;
    const double level = s.c / (2.0 * std::sqrt(s.p_min));
    for (int k = 0; k < s.n; ++k) ev.push_back(mk_mint(s.t0, lp_name(k), level));
    ev.push_back(mk_mark(s.t0, s.p_min));
    for (size_t k = 1; k <= N; ++k) {
        const double frac = static_cast<double>(k) / static_cast<double>(N);
        const double p = linear ? s.p_min + (s.p_max - s.p_min) * frac : s.p_min;
        ev.push_back(mk_swap(s.t0 + static_cast<double>(k) * dt, s.fee * dt, p));
    }
    return ev;
}

double trajectory_price(const ScenarioSpec& s, size_t k, size_t N) {
    if (s.trajectory == Trajectory::constant) return s.p_min;
    return s.p_min + (s.p_max - s.p_min) * (static_cast<double>(k) / static_cast<double>(N));
}

std::vector<PoolEvent> gen_pair(const ScenarioSpec& s) {
    const size_t N = s.step_count();
    const double dt = s.step();
    const CurveSpec cv = s.curve();
    // Flow-serving sizing: aggregate pool value fee/(2 gamma) at every step,
    // split evenly, so the fee return rate is pinned at 2 gamma throughout.
    const double target = s.fee / (2.0 * static_cast<double>(s.n) * s.gamma);
    std::vector<PoolEvent> ev;
    std::vector<std::pair<int64_t, int64_t>> held(static_cast<size_t>(s.n));
    std::vector<double> held_liq(static_cast<size_t>(s.n));

    const auto deploy = [&](double t, double p) {
        const auto range = jit_range(p, s.tick_spacing);
        const double liq = target / unit_value(cv, p, range.first, range.second);
        for (int k = 0; k < s.n; ++k) {
            ev.push_back(mk_mint(t, lp_name(k), range.first, range.second, liq));
            held[static_cast<size_t>(k)] = range;
            held_liq[static_cast<size_t>(k)] = liq;
        }
    };

    ev.push_back(mk_mark(s.t0, trajectory_price(s, 0, N)));
    deploy(s.t0, trajectory_price(s, 0, N));
    for (size_t k = 1; k <= N; ++k) {
        const double t = s.t0 + static_cast<double>(k) * dt;
        const double p = trajectory_price(s, k, N);
        ev.push_back(mk_swap(t, s.fee * dt, p));
        if (k < N) {
            for (int i = 0; i < s.n; ++i)
                ev.push_back(mk_burn(t, lp_name(i), held[static_cast<size_t>(i)].first,
                                     held[static_cast<size_t>(i)].second, held_liq[static_cast<size_t>(i)]));
            deploy(t, p);
        }
    }
    return ev;
}

std::vector<PoolEvent> gen_passive_vs_competitive(const ScenarioSpec& s) {
    const size_t N = s.step_count();
    const double dt = s.step();
    const CurveSpec cv = s.curve();
    const double cadence = s.rebalance_every > 0.0 ? s.rebalance_every : dt;
    const auto every = static_cast<size_t>(std::llround(cadence / dt));
    const double target = s.c > 0.0 ? s.c : s.fee / (4.0 * s.gamma);

    const int64_t pas_lo = tick_lower(s.p_min, s.tick_spacing);
    const int64_t pas_hi = tick_upper(s.p_max, s.tick_spacing);
    std::vector<PoolEvent> ev;
    const double p0 = trajectory_price(s, 0, N);
    ev.push_back(mk_mark(s.t0, p0));
    ev.push_back(mk_mint(s.t0, "passive", pas_lo, pas_hi, target / unit_value(cv, p0, pas_lo, pas_hi)));

    auto comp = jit_range(p0, s.tick_spacing);
    double comp_liq = target / unit_value(cv, p0, comp.first, comp.second);
    ev.push_back(mk_mint(s.t0, "competitive", comp.first, comp.second, comp_liq));

    for (size_t k = 1; k <= N; ++k) {
        const double t = s.t0 + static_cast<double>(k) * dt;
        const double p = trajectory_price(s, k, N);
        ev.push_back(mk_swap(t, s.fee * dt, p));
        if (k < N && k % every == 0) {
            ev.push_back(mk_burn(t, "competitive", comp.first, comp.second, comp_liq));
            comp = jit_range(p, s.tick_spacing);
            comp_liq = target / unit_value(cv, p, comp.first, comp.second);
            ev.push_back(mk_mint(t, "competitive", comp.first, comp.second, comp_liq));
        }
    }
    return ev;
}

std::vector<PoolEvent> gen_gbm(const ScenarioSpec& s) {
    const size_t N = s.step_count();
    const double dt = s.step();
    const CurveSpec cv = s.curve();
    const double lo = std::log(s.p_min), hi = std::log(s.p_max);
    const double span = hi - lo;

    // Driftless log-price walk reflected into [log p_min, log p_max].
    SplitMix64 rng(s.seed);
    const double vol_step = s.sigma * std::sqrt(dt);
    std::vector<double> path(N + 1);
    double l = 0.5 * (lo + hi);
    path[0] = std::exp(l);
    for (size_t k = 1; k <= N; ++k) {
        l += vol_step * rng.normal();
        double y = std::fmod(l - lo, 2.0 * span);
        if (y < 0.0) y += 2.0 * span;
        l = lo + (y <= span ? y : 2.0 * span - y);
        path[k] = std::exp(l);
    }

    // Passive LPs covering the whole band, upper edge pushed one spacing past
    // p_max so a path point landing exactly on the band edge stays in range.
    const int64_t band_lo = tick_lower(s.p_min, s.tick_spacing);
    const int64_t band_hi = tick_upper(s.p_max, s.tick_spacing) + s.tick_spacing;
    std::vector<PoolEvent> ev;
    ev.push_back(mk_mark(s.t0, path[0]));
    const double liq = s.c / unit_value(cv, path[0], band_lo, band_hi);
    for (int k = 0; k < s.n; ++k) ev.push_back(mk_mint(s.t0, lp_name(k), band_lo, band_hi, liq));
    for (size_t k = 1; k <= N; ++k)
        ev.push_back(mk_swap(s.t0 + static_cast<double>(k) * dt, s.fee * dt, path[k]));
    return ev;
}

}  // namespace

const char* scenario_kind_name(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::cfmm_constant_price: return "CfmmConstantPrice";
        case ScenarioKind::cfmm_linear_price: return "CfmmLinearPrice";
        case ScenarioKind::v3_fully_competitive_pair: return "V3FullyCompetitivePair";
        case ScenarioKind::v3_passive_vs_competitive: return "V3PassiveVsCompetitive";
        case ScenarioKind::gbm_path: return "GbmPath";
    }
    fail(Errc::internal, "unhandled scenario kind");
}

ScenarioKind scenario_kind_from_name(const std::string& name) {
    for (ScenarioKind k :
         {ScenarioKind::cfmm_constant_price, ScenarioKind::cfmm_linear_price,
          ScenarioKind::v3_fully_competitive_pair, ScenarioKind::v3_passive_vs_competitive,
          ScenarioKind::gbm_path})
        if (name == scenario_kind_name(k)) return k;
    fail(Errc::invalid_spec, "unknown scenario kind '" + name + "'");
}

ScenarioSpec ScenarioSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(Errc::invalid_spec, "scenario spec must be a JSON object");
    ScenarioSpec s;
    bool saw_kind = false;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "kind") {
                s.kind = scenario_kind_from_name(value.get<std::string>());
                saw_kind = true;
            } else if (key == "p_min") {
                s.p_min = value.get<double>();
            } else if (key == "p_max") {
                s.p_max = value.get<double>();
            } else if (key == "t0") {
                s.t0 = value.get<double>();
            } else if (key == "T") {
                s.T = value.get<double>();
            } else if (key == "fee") {
                s.fee = value.get<double>();
            } else if (key == "gamma") {
                s.gamma = value.get<double>();
            } else if (key == "tick_spacing") {
                s.tick_spacing = value.get<int64_t>();
            } else if (key == "n") {
                s.n = value.get<int>();
            } else if (key == "c") {
                s.c = value.get<double>();
            } else if (key == "grid_step") {
                s.grid_step = value.get<double>();
            } else if (key == "trajectory") {
                const auto name = value.get<std::string>();
                if (name == "constant")
                    s.trajectory = Trajectory::constant;
                else if (name == "linear")
                    s.trajectory = Trajectory::linear;
                else
                    fail(Errc::invalid_spec, "unknown trajectory '" + name + "'");
            } else if (key == "sigma") {
                s.sigma = value.get<double>();
            } else if (key == "seed") {
                s.seed = value.get<uint64_t>();
            } else if (key == "rebalance_every") {
                s.rebalance_every = value.get<double>();
            } else {
                fail(Errc::invalid_spec, "unknown scenario spec key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_spec, std::string("malformed scenario spec: ") + e.what());
    }
    if (!saw_kind) fail(Errc::invalid_spec, "scenario spec requires a 'kind'");
    s.validate();
    return s;
}

void ScenarioSpec::validate() const {
    const auto bad = [](const std::string& msg) { fail(Errc::invalid_spec, msg); };
    if (!(p_min > 0.0) || !(p_max > p_min)) bad("requires 0 < p_min < p_max");
    if (!(T > t0)) bad("requires t0 < T");
    if (!(fee >= 0.0) || !std::isfinite(fee)) bad("fee must be finite and non-negative");
    if (!(gamma > 0.0) || !(gamma < 1.0)) bad("gamma must lie in (0, 1)");
    if (tick_spacing < 1) bad("tick_spacing must be at least 1");
    if (n < 1) bad("needs at least one liquidity provider");
    if (!(grid_step >= 0.0) || !std::isfinite(grid_step)) bad("grid_step must be finite and non-negative");
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) bad("sigma must be finite and non-negative");
    if (!(rebalance_every >= 0.0)) bad("rebalance_every must be non-negative");
    if (!(c >= 0.0) || !std::isfinite(c)) bad("capital must be finite and non-negative");

    const double dt = step();
    const double len = T - t0;
    const auto N = std::llround(len / dt);
    if (N < 1 || std::abs(static_cast<double>(N) * dt - len) > 1e-9 * std::max(1.0, len))
        bad("grid_step must divide T - t0");
    if (rebalance_every > 0.0) {
        const auto r = std::llround(rebalance_every / dt);
        if (r < 1 || std::abs(static_cast<double>(r) * dt - rebalance_every) > 1e-9 * rebalance_every)
            bad("rebalance_every must be a multiple of the grid step");
    }

    switch (kind) {
        case ScenarioKind::cfmm_constant_price:
        case ScenarioKind::cfmm_linear_price:
        case ScenarioKind::gbm_path:
            if (!(c > 0.0)) bad("this scenario kind requires per-LP capital c > 0");
            break;
        case ScenarioKind::v3_fully_competitive_pair:
            if (!(fee > 0.0)) bad("flow-serving sizing requires a positive fee rate");
            break;
        case ScenarioKind::v3_passive_vs_competitive:
            if (!(fee > 0.0) && !(c > 0.0))
                bad("flow-serving sizing requires a positive fee rate when c is omitted");
            break;
    }
    if (kind == ScenarioKind::gbm_path && !(sigma > 0.0)) bad("gbm_path requires sigma > 0");
}

CurveSpec ScenarioSpec::curve() const {
    CurveSpec cv;
    cv.kind = (kind == ScenarioKind::cfmm_constant_price || kind == ScenarioKind::cfmm_linear_price)
                  ? CurveKind::constant_product
                  : CurveKind::concentrated_v3;
    cv.fee_rate = gamma;
    cv.tick_spacing = tick_spacing;
    return cv;
}

size_t ScenarioSpec::step_count() const {
    return static_cast<size_t>(std::llround((T - t0) / step()));
}

std::vector<PoolEvent> generate(const ScenarioSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case ScenarioKind::cfmm_constant_price:
        case ScenarioKind::cfmm_linear_price: return gen_cfmm(spec);
        case ScenarioKind::v3_fully_competitive_pair: return gen_pair(spec);
        case ScenarioKind::v3_passive_vs_competitive: return gen_passive_vs_competitive(spec);
        case ScenarioKind::gbm_path: return gen_gbm(spec);
    }
    fail(Errc::internal, "unhandled scenario kind");
}

ClosedForm closed_form(const ScenarioSpec& spec) {
    spec.validate();
    ClosedForm out;
    const double len = spec.T - spec.t0;
    switch (spec.kind) {
        case ScenarioKind::cfmm_constant_price:
            out.available = true;
            out.value = spec.fee * len / (static_cast<double>(spec.n) * spec.c);
            out.exact_at_any_grid = true;
            break;
        case ScenarioKind::cfmm_linear_price: {
            out.available = true;
            const double rm = std::sqrt(spec.p_min), rx = std::sqrt(spec.p_max);
            out.value = 2.0 * spec.fee * len * rm / (static_cast<double>(spec.n) * spec.c * (rm + rx));
            out.exact_at_any_grid = false;
            break;
        }
        case ScenarioKind::v3_fully_competitive_pair:
            out.available = true;
            out.value = 2.0 * spec.gamma * len;
            out.exact_at_any_grid = true;
            break;
        case ScenarioKind::v3_passive_vs_competitive:
        case ScenarioKind::gbm_path: break;  // no closed form
    }
    return out;
}

}  // namespace flair
