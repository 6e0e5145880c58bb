#include "flair/metrics.hpp"

#include <ostream>

#include "flair/curve.hpp"
#include "flair/window.hpp"

namespace flair {

namespace {

std::string num(double v) { return nlohmann::json(v).dump(); }

}  // namespace

nlohmann::json MetricReport::to_json() const {
    nlohmann::json j;
    j["subject"] = subject;
    j["window"] = {{"start", t0}, {"end", t1}};
    j["value"] = value;
    auto& segs = j["segments"] = nlohmann::json::array();
    for (const auto& s : segments)
        segs.push_back({{"t_start", s.t_start},
                        {"t_end", s.t_end},
                        {"integrand", s.integrand},
                        {"contribution", s.contribution}});
    return j;
}

void MetricReport::write_csv(std::ostream& out) const {
    out << "t,cumulative_value\n";
    out << num(t0) << "," << num(0.0) << "\n";
    double cum = 0.0;
    for (const auto& s : segments) {
        cum += s.contribution;
        out << num(s.t_end) << "," << num(cum) << "\n";
    }
}

MetricReport flair_position(const PoolTimeline& tl, const std::string& position_id, double t0, double T) {
    if (!tl.has_position(position_id))
        fail(Errc::unknown_position, "no position '" + position_id + "' in this timeline");
    MetricReport r;
    r.subject = position_id;
    r.t0 = t0;
    r.t1 = T;
    detail::for_window_segments(tl, t0, T, [&](size_t j, double a, double b) {
        const double rate = tl.fee_rate(j);
        double integrand = 0.0;
        if (rate > 0.0) {
            const double share = tl.fee_share_at(position_id, tl.grid_time(j));
            if (share > 0.0) {
                const double v = portfolio_value(tl.curve(), tl.external_price(j), tl.implied_price(j),
                                                 tl.distribution_at(position_id, tl.grid_time(j)));
                if (!(v > 0.0))
                    fail(Errc::zero_capital_with_fee_share,
                         "position '" + position_id + "' earns fees with zero capital at t=" +
                             std::to_string(tl.grid_time(j)));
                integrand = rate * share / v;
            }
        }
        r.segments.push_back({a, b, integrand, integrand * (b - a)});
        r.value += integrand * (b - a);
    });
    return r;
}

MetricReport flair_aggregate(const PoolTimeline& tl, double t0, double T) {
    MetricReport r;
    r.subject = "aggregate";
    r.t0 = t0;
    r.t1 = T;
    detail::for_window_segments(tl, t0, T, [&](size_t j, double a, double b) {
        const double rate = tl.fee_rate(j);
        double integrand = 0.0;
        if (rate > 0.0) {
            const double v = portfolio_value(tl.curve(), tl.external_price(j), tl.implied_price(j),
                                             tl.aggregate_at(tl.grid_time(j)));
            if (!(v > 0.0))
                fail(Errc::zero_pool_capital_with_fee,
                     "pool earns fees with zero aggregate capital at t=" +
                         std::to_string(tl.grid_time(j)));
            integrand = rate / v;
        }
        r.segments.push_back({a, b, integrand, integrand * (b - a)});
        r.value += integrand * (b - a);
    });
    return r;
}

std::pair<double, double> quadrant_point(const PoolTimeline& tl, const ToxicityReport& toxicity,
                                         double t0, double T) {
    if (toxicity.t0 != t0 || toxicity.t1 != T)
        fail(Errc::window_mismatch, "toxicity report covers [" + std::to_string(toxicity.t0) + ", " +
                                        std::to_string(toxicity.t1) + "], queried [" +
                                        std::to_string(t0) + ", " + std::to_string(T) + "]");
    return {flair_aggregate(tl, t0, T).value, toxicity.value};
}

}  // namespace flair
