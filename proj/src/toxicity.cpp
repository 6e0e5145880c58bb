#include "flair/toxicity.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "flair/curve.hpp"
#include "flair/window.hpp"

namespace flair {

namespace {

std::string num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

const char* toxicity_kind_name(ToxicityKind k) {
    return k == ToxicityKind::lvr ? "lvr" : "markout";
}

nlohmann::json ToxicityReport::to_json() const {
    nlohmann::json j;
    j["kind"] = toxicity_kind_name(kind);
    j["window"] = {{"start", t0}, {"end", t1}};
    j["value"] = value;
    if (kind == ToxicityKind::lvr) {
        j["sigma"] = sigma;
        j["normalized"] = normalized;
    } else {
        j["horizon"] = horizon;
        j["truncated"] = truncated;
    }
    auto& segs = j["segments"] = nlohmann::json::array();
    for (const auto& s : segments)
        segs.push_back({{"t_start", s.t_start},
                        {"t_end", s.t_end},
                        {"integrand", s.integrand},
                        {"contribution", s.contribution}});
    return j;
}

void ToxicityReport::write_csv(std::ostream& out) const {
    out << "t,cumulative_value\n";
    out << num(t0) << "," << num(0.0) << "\n";
    double cum = 0.0;
    for (const auto& s : segments) {
        cum += s.contribution;
        out << num(s.t_end) << "," << num(cum) << "\n";
    }
}

ToxicityReport lvr(const PoolTimeline& tl, double sigma, double t0, double T, bool normalized) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        fail(Errc::invalid_config, "volatility must be finite and non-negative");
    ToxicityReport r;
    r.kind = ToxicityKind::lvr;
    r.t0 = t0;
    r.t1 = T;
    r.sigma = sigma;
    r.normalized = normalized;
    detail::for_window_segments(tl, t0, T, [&](size_t j, double a, double b) {
        double rate = 0.0;
        if (sigma > 0.0 && tl.has_price(j)) {
            const double pe = tl.external_price(j);
            const double pi = tl.implied_price(j);
            const auto& dist = tl.aggregate_at(tl.grid_time(j));
            const double level = dist(pi);
            rate = 0.5 * sigma * sigma * pe * pe * (level / (2.0 * pi * std::sqrt(pi)));
            if (normalized && rate > 0.0) {
                const double v = portfolio_value(tl.curve(), pe, pi, dist);
                if (!(v > 0.0))
                    fail(Errc::zero_pool_capital_with_fee,
                         "cannot normalize a positive loss rate by zero pool value at t=" +
                             std::to_string(tl.grid_time(j)));
                rate /= v;
            }
        }
        r.segments.push_back({a, b, rate, rate * (b - a)});
        r.value += rate * (b - a);
    });
    return r;
}

double estimate_volatility(const PoolTimeline& tl, double t0, double T) {
    if (!(t0 <= T)) fail(Errc::out_of_range_time, "window start exceeds window end");
    tl.segment_index(t0);
    tl.segment_index(T);
    if (t0 == T) return 0.0;
    double rv = 0.0;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (size_t j = tl.segment_index(t0); j <= tl.segment_index(T); ++j) {
        if (!tl.has_price(j)) continue;
        const double lp = std::log(tl.implied_price(j));
        if (!std::isnan(prev)) rv += (lp - prev) * (lp - prev);
        prev = lp;
    }
    return std::sqrt(rv / (T - t0));
}

ToxicityReport markout(const PoolTimeline& tl, double horizon, double t0, double T, bool strict) {
    if (!(horizon >= 0.0) || !std::isfinite(horizon))
        fail(Errc::invalid_config, "markout horizon must be finite and non-negative");
    if (!(t0 <= T)) fail(Errc::out_of_range_time, "window start exceeds window end");
    tl.segment_index(t0);
    tl.segment_index(T);
    ToxicityReport r;
    r.kind = ToxicityKind::markout;
    r.t0 = t0;
    r.t1 = T;
    r.horizon = horizon;
    size_t dropped = 0;
    // Swap boundaries strictly inside the window's left edge keep adjacent
    // windows additive: a swap exactly at t0 belongs to the previous window.
    for (size_t j = tl.segment_index(t0); j <= tl.segment_count(); ++j) {
        const double s = tl.grid_time(j);
        if (s > T) break;
        if (s <= t0 || !tl.swap_at(j)) continue;
        const double p_after = tl.implied_price(j);
        const double p_before = tl.implied_price(j - 1);
        const auto& pre = tl.aggregate_at(tl.grid_time(j - 1));
        const double dx = reserves_x(tl.curve(), p_before, pre) - reserves_x(tl.curve(), p_after, pre);
        const double t_fwd = s + horizon;
        double fwd = std::numeric_limits<double>::quiet_NaN();
        if (t_fwd <= tl.span_end()) fwd = tl.external_price(tl.segment_index(t_fwd));
        if (!std::isfinite(fwd)) {
            ++dropped;
            continue;
        }
        const double tox = (fwd - p_after) * dx;
        r.segments.push_back({s, t_fwd, dx, tox});
        r.value += tox;
    }
    if (dropped > 0) {
        if (strict)
            fail(Errc::missing_forward_prices,
                 std::to_string(dropped) + " swap(s) lack an external price at trade time + horizon");
        r.truncated = true;
    }
    return r;
}

}  // namespace flair
