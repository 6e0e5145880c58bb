#include "flair/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <utility>

#include "flair/curve.hpp"
#include "flair/window.hpp"

namespace flair {

namespace {

std::string num(double v) { return nlohmann::json(v).dump(); }

struct PriceRange {
    double lo = 0.0;
    double hi = 0.0;
    bool operator==(const PriceRange&) const = default;
};

}  // namespace

const char* strategy_family_name(StrategyFamily f) {
    switch (f) {
        case StrategyFamily::passive_full_range: return "PassiveFullRange";
        case StrategyFamily::passive_fixed_range: return "PassiveFixedRange";
        case StrategyFamily::tick_tracking: return "TickTracking";
        case StrategyFamily::just_in_time: return "JustInTime";
    }
    fail(Errc::internal, "unhandled strategy family");
}

StrategyFamily strategy_family_from_name(const std::string& name) {
    for (StrategyFamily f : {StrategyFamily::passive_full_range, StrategyFamily::passive_fixed_range,
                             StrategyFamily::tick_tracking, StrategyFamily::just_in_time})
        if (name == strategy_family_name(f)) return f;
    fail(Errc::invalid_config, "unknown strategy family '" + name + "'");
}

void StrategySpec::validate(const CurveSpec& curve) const {
    if (!(capital > 0.0) || !std::isfinite(capital))
        fail(Errc::invalid_spec, "strategy capital must be positive and finite");
    switch (family) {
        case StrategyFamily::passive_full_range:
        case StrategyFamily::just_in_time: break;
        case StrategyFamily::passive_fixed_range:
            if (tick_lower >= tick_upper)
                fail(Errc::invalid_spec, "fixed range requires tick_lower < tick_upper");
            if (tick_lower % curve.tick_spacing != 0 || tick_upper % curve.tick_spacing != 0)
                fail(Errc::invalid_spec, "fixed range ticks must align to the tick spacing");
            if (std::llabs(tick_lower) > kMaxTick || std::llabs(tick_upper) > kMaxTick)
                fail(Errc::invalid_spec, "fixed range ticks exceed the representable tick bound");
            break;
        case StrategyFamily::tick_tracking:
            if (width < 1) fail(Errc::invalid_spec, "tracking width must be at least one spacing");
            if (!(rebalance_every > 0.0) || !std::isfinite(rebalance_every))
                fail(Errc::invalid_spec, "tracking rebalance interval must be positive");
            break;
    }
}

std::string StrategySpec::label() const {
    switch (family) {
        case StrategyFamily::passive_full_range: return "PassiveFullRange";
        case StrategyFamily::passive_fixed_range:
            return "PassiveFixedRange[" + std::to_string(tick_lower) + "," + std::to_string(tick_upper) +
                   "]";
        case StrategyFamily::tick_tracking:
            return "TickTracking(w=" + std::to_string(width) + ",every=" + num(rebalance_every) + ")";
        case StrategyFamily::just_in_time: return "JustInTime";
    }
    fail(Errc::internal, "unhandled strategy family");
}

namespace {

// Target range of the family when the decision price is p.
PriceRange target_range(const StrategySpec& s, const CurveSpec& cv, double p) {
    switch (s.family) {
        case StrategyFamily::passive_full_range: return {cv.p_min_sentinel, cv.p_max_sentinel};
        case StrategyFamily::passive_fixed_range:
            return {tick_to_price(s.tick_lower), tick_to_price(s.tick_upper)};
        case StrategyFamily::tick_tracking: {
            const int64_t ts = cv.tick_spacing;
            const int64_t lo = tick_lower(p, ts) - ((s.width - 1) / 2) * ts;
            return {tick_to_price(lo), tick_to_price(lo + s.width * ts)};
        }
        case StrategyFamily::just_in_time: {
            const int64_t ts = cv.tick_spacing;
            int64_t lo = tick_lower(p, ts), hi = tick_upper(p, ts);
            if (lo == hi) {
                lo -= ts;
                hi += ts;
            }
            return {tick_to_price(lo), tick_to_price(hi)};
        }
    }
    fail(Errc::internal, "unhandled strategy family");
}

double range_unit_value(const CurveSpec& cv, double pe, double pi, const PriceRange& r) {
    return portfolio_value(cv, pe, pi, LiquidityDistribution::single(r.lo, r.hi, 1.0));
}

}  // namespace

StrategyOutcome evaluate_strategy(const PoolTimeline& tl, const StrategySpec& spec, double t0, double T,
                                  double sigma) {
    const CurveSpec& cv = tl.curve();
    spec.validate(cv);
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        fail(Errc::invalid_config, "volatility must be finite and non-negative");
    if (!(t0 < T)) fail(Errc::window_mismatch, "backtest window must have positive length");
    tl.segment_index(t0);
    tl.segment_index(T);

    StrategyOutcome out;
    out.spec = spec;

    // Deployment state at t0.
    const size_t j0 = tl.segment_index(t0);
    if (!tl.has_price(j0))
        fail(Errc::infeasible_capital, "no observable price at deployment time " + std::to_string(t0));
    PriceRange range = target_range(spec, cv, tl.implied_price(j0));
    const double unit0 = range_unit_value(cv, tl.external_price(j0), tl.implied_price(j0), range);
    if (!(unit0 > 0.0) || !std::isfinite(unit0))
        fail(Errc::infeasible_capital, "deployment range has no positive unit value");
    double level = spec.capital / unit0;

    const auto redeploy = [&](double t, double decision_p, double pe, double pi) {
        const PriceRange next = target_range(spec, cv, decision_p);
        if (next == range) return;
        const double before =
            portfolio_value(cv, pe, pi, LiquidityDistribution::single(range.lo, range.hi, level));
        const double unit = range_unit_value(cv, pe, pi, next);
        if (!(unit > 0.0) || !std::isfinite(unit))
            fail(Errc::infeasible_capital, "rebalance target range has no positive unit value");
        range = next;
        level = before / unit;
        const double after =
            portfolio_value(cv, pe, pi, LiquidityDistribution::single(range.lo, range.hi, level));
        out.events.push_back({t, before, after, range.lo, range.hi});
        ++out.rebalances;
    };

    const auto emit = [&](size_t j, double a, double b) {
        if (!(a < b)) return;
        StrategyPiece piece;
        piece.t_start = a;
        piece.t_end = b;
        const double rate = tl.fee_rate(j);
        if (tl.has_price(j)) {
            const double pe = tl.external_price(j), pi = tl.implied_price(j);
            const auto dist = LiquidityDistribution::single(range.lo, range.hi, level);
            piece.own_level = dist(pi);
            piece.value = portfolio_value(cv, pe, pi, dist);
            const double agg = tl.aggregate_at(tl.grid_time(j))(pi);
            piece.share = piece.own_level > 0.0 ? piece.own_level / (agg + piece.own_level) : 0.0;
            if (!(piece.value > 0.0)) {
                if (rate * piece.share > 0.0)
                    fail(Errc::zero_capital_with_fee_share,
                         "strategy value vanished on a fee-earning segment at t=" + std::to_string(a));
            } else {
                const double own_loss =
                    0.5 * sigma * sigma * pe * pe * (piece.own_level / (2.0 * pi * std::sqrt(pi)));
                piece.cm_integrand = rate * piece.share / piece.value;
                piece.profit_integrand = (rate * piece.share - own_loss) / piece.value;
            }
        }
        out.cm += piece.cm_integrand * (b - a);
        out.profit += piece.profit_integrand * (b - a);
        out.pieces.push_back(piece);
    };

    double next_tau = spec.family == StrategyFamily::tick_tracking
                          ? t0 + spec.rebalance_every
                          : std::numeric_limits<double>::infinity();

    detail::for_window_segments(tl, t0, T, [&](size_t j, double a, double b) {
        const bool priced = tl.has_price(j);
        const double pe = priced ? tl.external_price(j) : 0.0;
        const double pi = priced ? tl.implied_price(j) : 0.0;

        if (spec.family == StrategyFamily::just_in_time && priced) redeploy(a, pi, pe, pi);

        if (spec.family == StrategyFamily::tick_tracking) {
            if (next_tau <= a) {
                // Re-centers due at the segment boundary see the price that
                // was live strictly before it.
                while (next_tau <= a) next_tau += spec.rebalance_every;
                if (j > 0 && tl.has_price(j - 1) && priced)
                    redeploy(a, tl.implied_price(j - 1), pe, pi);
            }
            double cursor = a;
            while (next_tau < b) {
                emit(j, cursor, next_tau);
                cursor = next_tau;
                // Mid-segment, the last observed price is this segment's own.
                if (priced) redeploy(next_tau, pi, pe, pi);
                next_tau += spec.rebalance_every;
            }
            emit(j, cursor, b);
        } else {
            emit(j, a, b);
        }
    });
    return out;
}

namespace {

template <class Key>
size_t arg_best(const std::vector<StrategyOutcome>& outcomes, Key&& key) {
    size_t best = 0;
    for (size_t i = 1; i < outcomes.size(); ++i) {
        const double ki = key(outcomes[i]), kb = key(outcomes[best]);
        if (ki > kb) {
            best = i;
        } else if (ki == kb) {
            const auto& a = outcomes[i];
            const auto& b = outcomes[best];
            if (a.rebalances < b.rebalances ||
                (a.rebalances == b.rebalances &&
                 static_cast<int>(a.spec.family) < static_cast<int>(b.spec.family)))
                best = i;
        }
    }
    return best;
}

}  // namespace

BacktestResult optimize(const PoolTimeline& tl, std::vector<StrategySpec> grid, double c, double t0,
                        double T, Objective objective, double sigma) {
    if (grid.empty()) fail(Errc::empty_grid, "strategy grid is empty");
    BacktestResult res;
    res.objective = objective;
    res.capital = c;
    res.sigma = sigma;
    res.t0 = t0;
    res.t1 = T;
    for (auto& spec : grid) {
        spec.capital = c;
        res.outcomes.push_back(evaluate_strategy(tl, spec, t0, T, sigma));
    }
    res.best_competitiveness = arg_best(res.outcomes, [](const StrategyOutcome& o) { return o.cm; });
    res.best_profitability = arg_best(res.outcomes, [](const StrategyOutcome& o) { return o.profit; });
    return res;
}

nlohmann::json BacktestResult::to_json() const {
    nlohmann::json j;
    j["objective"] = objective == Objective::competitiveness ? "competitiveness" : "profitability";
    j["capital"] = capital;
    j["sigma"] = sigma;
    j["window"] = {{"start", t0}, {"end", t1}};
    auto& rows = j["outcomes"] = nlohmann::json::array();
    for (const auto& o : outcomes)
        rows.push_back({{"strategy", o.spec.label()},
                        {"family", strategy_family_name(o.spec.family)},
                        {"cm", o.cm},
                        {"profit", o.profit},
                        {"rebalances", o.rebalances}});
    j["best_competitiveness"] = outcomes[best_competitiveness].spec.label();
    j["best_profitability"] = outcomes[best_profitability].spec.label();
    j["winner"] = winner().spec.label();
    return j;
}

void BacktestResult::write_ranking_csv(std::ostream& out) const {
    std::vector<size_t> order(outcomes.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    const auto key = [&](size_t i) {
        return objective == Objective::competitiveness ? outcomes[i].cm : outcomes[i].profit;
    };
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (key(a) != key(b)) return key(a) > key(b);
        if (outcomes[a].rebalances != outcomes[b].rebalances)
            return outcomes[a].rebalances < outcomes[b].rebalances;
        return static_cast<int>(outcomes[a].spec.family) < static_cast<int>(outcomes[b].spec.family);
    });
    out << "rank,strategy,cm,profit,rebalances\n";
    for (size_t r = 0; r < order.size(); ++r) {
        const auto& o = outcomes[order[r]];
        out << (r + 1) << "," << o.spec.label() << "," << num(o.cm) << "," << num(o.profit) << ","
            << o.rebalances << "\n";
    }
}

GridConfig strategy_grid_from_json(const nlohmann::json& j) {
    if (!j.is_object()) fail(Errc::invalid_config, "strategy grid config must be a JSON object");
    GridConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "capital") {
                cfg.capital = value.get<double>();
            } else if (key == "strategies") {
                if (!value.is_array() || value.empty())
                    fail(Errc::invalid_config, "'strategies' must be a non-empty array");
                for (const auto& d : value) {
                    if (!d.is_object() || !d.contains("family"))
                        fail(Errc::invalid_config, "each strategy descriptor needs a 'family'");
                    StrategySpec base;
                    base.family = strategy_family_from_name(d["family"].get<std::string>());
                    std::vector<int64_t> widths{1};
                    std::vector<double> cadences{0.0};
                    for (const auto& [pk, pv] : d.items()) {
                        if (pk == "family") continue;
                        if (pk == "tick_lower" && base.family == StrategyFamily::passive_fixed_range) {
                            base.tick_lower = pv.get<int64_t>();
                        } else if (pk == "tick_upper" &&
                                   base.family == StrategyFamily::passive_fixed_range) {
                            base.tick_upper = pv.get<int64_t>();
                        } else if (pk == "width" && base.family == StrategyFamily::tick_tracking) {
                            widths.clear();
                            if (pv.is_array())
                                for (const auto& w : pv) widths.push_back(w.get<int64_t>());
                            else
                                widths.push_back(pv.get<int64_t>());
                        } else if (pk == "rebalance_every" &&
                                   base.family == StrategyFamily::tick_tracking) {
                            cadences.clear();
                            if (pv.is_array())
                                for (const auto& r : pv) cadences.push_back(r.get<double>());
                            else
                                cadences.push_back(pv.get<double>());
                        } else {
                            fail(Errc::invalid_config, "unknown or misplaced strategy key '" + pk +
                                                           "' for family " + d["family"].get<std::string>());
                        }
                    }
                    if (base.family == StrategyFamily::tick_tracking) {
                        for (const int64_t w : widths)
                            for (const double r : cadences) {
                                StrategySpec s = base;
                                s.width = w;
                                s.rebalance_every = r;
                                cfg.strategies.push_back(s);
                            }
                    } else {
                        cfg.strategies.push_back(base);
                    }
                }
            } else {
                fail(Errc::invalid_config, "unknown grid config key '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::invalid_config, std::string("malformed strategy grid config: ") + e.what());
    }
    if (cfg.strategies.empty()) fail(Errc::invalid_config, "grid config declares no strategies");
    return cfg;
}

}  // namespace flair
