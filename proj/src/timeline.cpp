#include "flair/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace flair {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool same_or_both_nan(double a, double b) {
    return (std::isnan(a) && std::isnan(b)) || a == b;
}

std::string at_line(const std::vector<int>* lines, size_t idx) {
    if (lines == nullptr || idx >= lines->size()) return "";
    return " (line " + std::to_string((*lines)[idx]) + ")";
}

}  // namespace

// ============================ event model ==================================

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::mint: return "mint";
        case EventKind::burn: return "burn";
        case EventKind::swap: return "swap";
        case EventKind::price_mark: return "price_mark";
    }
    return "?";
}

EventKind event_kind_from_name(const std::string& name) {
    if (name == "mint") return EventKind::mint;
    if (name == "burn") return EventKind::burn;
    if (name == "swap") return EventKind::swap;
    if (name == "price_mark") return EventKind::price_mark;
    fail(Errc::invalid_event, "unknown event kind '" + name + "'");
}

void validate_event_shape(const PoolEvent& e) {
    if (!std::isfinite(e.timestamp)) fail(Errc::invalid_event, "timestamp must be finite");
    const auto check_price_opt = [](const std::optional<double>& p, const char* what) {
        if (p && (!std::isfinite(*p) || *p <= 0.0))
            fail(Errc::invalid_event, std::string(what) + " must be a positive finite price");
    };
    check_price_opt(e.implied_price_after, "implied_price_after");
    check_price_opt(e.external_price, "external_price");
    switch (e.kind) {
        case EventKind::mint:
            if (e.position_id.empty()) fail(Errc::invalid_event, "mint requires a position_id");
            if (!std::isfinite(e.liquidity_delta) || e.liquidity_delta <= 0.0)
                fail(Errc::invalid_event, "mint requires liquidity_delta > 0");
            break;
        case EventKind::burn:
            if (e.position_id.empty()) fail(Errc::invalid_event, "burn requires a position_id");
            if (!std::isfinite(e.liquidity_delta) || e.liquidity_delta >= 0.0)
                fail(Errc::invalid_event, "burn requires liquidity_delta < 0");
            break;
        case EventKind::swap:
            if (!(e.fee_amount >= 0.0) || !std::isfinite(e.fee_amount))
                fail(Errc::invalid_event, "swap requires fee_amount >= 0");
            if (!e.implied_price_after) fail(Errc::invalid_event, "swap requires implied_price_after");
            break;
        case EventKind::price_mark:
            if (!e.implied_price_after && !e.external_price)
                fail(Errc::invalid_event, "price_mark requires implied_price_after or external_price");
            break;
    }
    if (e.tick_lower && e.tick_upper && !(*e.tick_lower < *e.tick_upper))
        fail(Errc::invalid_event, "tick_lower must be below tick_upper");
}

// ============================ event log I/O ================================

namespace {

PoolEvent event_from_json(const json& j) {
    if (!j.is_object()) fail(Errc::invalid_event, "event must be a JSON object");
    PoolEvent e;
    try {
        if (!j.contains("timestamp") || !j["timestamp"].is_number())
            fail(Errc::invalid_event, "event needs a numeric timestamp");
        e.timestamp = j["timestamp"].get<double>();
        if (!j.contains("kind") || !j["kind"].is_string()) fail(Errc::invalid_event, "event needs a kind");
        e.kind = event_kind_from_name(j["kind"].get<std::string>());
        if (j.contains("position_id")) e.position_id = j["position_id"].get<std::string>();
        if (j.contains("tick_lower")) e.tick_lower = j["tick_lower"].get<int64_t>();
        if (j.contains("tick_upper")) e.tick_upper = j["tick_upper"].get<int64_t>();
        if (j.contains("liquidity_delta")) e.liquidity_delta = j["liquidity_delta"].get<double>();
        if (j.contains("fee_amount")) e.fee_amount = j["fee_amount"].get<double>();
        if (j.contains("implied_price_after")) e.implied_price_after = j["implied_price_after"].get<double>();
        if (j.contains("external_price")) e.external_price = j["external_price"].get<double>();
    } catch (const json::exception& ex) {
        fail(Errc::invalid_event, std::string("bad event field: ") + ex.what());
    }
    validate_event_shape(e);
    return e;
}

}  // namespace

ParsedEvents read_events_jsonl(std::istream& in) {
    ParsedEvents out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) fail(Errc::invalid_event, "line " + std::to_string(lineno) + ": malformed JSON");
        try {
            out.events.push_back(event_from_json(j));
        } catch (const Error& err) {
            fail(err.kind(), "line " + std::to_string(lineno) + ": " + err.what());
        }
        out.lines.push_back(lineno);
    }
    return out;
}

static const char* kCsvHeader =
    "timestamp,kind,position_id,tick_lower,tick_upper,liquidity_delta,fee_amount,implied_price_after,external_price";

ParsedEvents read_events_csv(std::istream& in) {
    ParsedEvents out;
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) fail(Errc::invalid_event, "empty CSV input");
    ++lineno;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line != kCsvHeader)
        fail(Errc::invalid_event, "line 1: CSV header must be exactly '" + std::string(kCsvHeader) + "'");
    while (std::getline(in, line)) {
        ++lineno;
        while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        while (cells.size() < 9) cells.push_back("");
        if (cells.size() > 9)
            fail(Errc::invalid_event, "line " + std::to_string(lineno) + ": expected 9 columns");
        try {
            const auto num = [&](const std::string& s, const char* what) {
                try {
                    size_t used = 0;
                    double v = std::stod(s, &used);
                    if (used != s.size()) throw std::invalid_argument(what);
                    return v;
                } catch (const std::exception&) {
                    fail(Errc::invalid_event, std::string("bad numeric field ") + what);
                }
            };
            PoolEvent e;
            e.timestamp = num(cells[0], "timestamp");
            e.kind = event_kind_from_name(cells[1]);
            e.position_id = cells[2];
            if (!cells[3].empty()) e.tick_lower = static_cast<int64_t>(num(cells[3], "tick_lower"));
            if (!cells[4].empty()) e.tick_upper = static_cast<int64_t>(num(cells[4], "tick_upper"));
            if (!cells[5].empty()) e.liquidity_delta = num(cells[5], "liquidity_delta");
            if (!cells[6].empty()) e.fee_amount = num(cells[6], "fee_amount");
            if (!cells[7].empty()) e.implied_price_after = num(cells[7], "implied_price_after");
            if (!cells[8].empty()) e.external_price = num(cells[8], "external_price");
            validate_event_shape(e);
            out.events.push_back(e);
        } catch (const Error& err) {
            fail(err.kind(), "line " + std::to_string(lineno) + ": " + err.what());
        }
        out.lines.push_back(lineno);
    }
    return out;
}

void write_events_jsonl(std::ostream& out, const std::vector<PoolEvent>& events) {
    for (const auto& e : events) {
        json j;
        j["timestamp"] = e.timestamp;
        j["kind"] = event_kind_name(e.kind);
        if (!e.position_id.empty()) j["position_id"] = e.position_id;
        if (e.tick_lower) j["tick_lower"] = *e.tick_lower;
        if (e.tick_upper) j["tick_upper"] = *e.tick_upper;
        if (e.liquidity_delta != 0.0) j["liquidity_delta"] = e.liquidity_delta;
        if (e.kind == EventKind::swap) j["fee_amount"] = e.fee_amount;
        if (e.implied_price_after) j["implied_price_after"] = *e.implied_price_after;
        if (e.external_price) j["external_price"] = *e.external_price;
        out << j.dump() << '\n';
    }
}

// =============================== ingest ====================================

PoolTimeline PoolTimeline::ingest(const CurveSpec& curve, const std::vector<PoolEvent>& events,
                                  const std::vector<int>* lines) {
    curve.validate();
    PoolTimeline tl;
    tl.curve_ = curve;
    if (events.empty()) return tl;

    std::map<std::string, LiquidityDistribution> live;
    std::vector<double> lump_at;  // fee paid at each boundary
    double impl = kNaN, ext = kNaN;

    // Resolve a mint/burn range to price space.  Constant-product pools have a
    // single sentinel-wide interval; v3 ranges must align to the tick grid.
    const auto event_range = [&](const PoolEvent& e, size_t idx) -> std::pair<double, double> {
        if (curve.kind == CurveKind::constant_product)
            return {curve.p_min_sentinel, curve.p_max_sentinel};
        if (!e.tick_lower || !e.tick_upper)
            fail(Errc::invalid_event, "v3 mint/burn needs tick bounds" + at_line(lines, idx));
        const int64_t lo = *e.tick_lower, hi = *e.tick_upper;
        if (lo % curve.tick_spacing != 0 || hi % curve.tick_spacing != 0)
            fail(Errc::invalid_event, "tick bounds must align to spacing " +
                                          std::to_string(curve.tick_spacing) + at_line(lines, idx));
        if (!(lo < hi)) fail(Errc::invalid_event, "tick_lower must be below tick_upper" + at_line(lines, idx));
        return {tick_to_price(lo), tick_to_price(hi)};
    };

    size_t i = 0;
    while (i < events.size()) {
        const double t = events[i].timestamp;
        if (!tl.times_.empty() && !(t >= tl.times_.back()))
            fail(Errc::unsorted_log, "timestamp " + std::to_string(t) + " out of order" + at_line(lines, i));
        double lump = 0.0;
        bool saw_swap = false;
        std::vector<const std::string*> changed;
        for (; i < events.size() && events[i].timestamp == t; ++i) {
            const PoolEvent& e = events[i];
            validate_event_shape(e);
            switch (e.kind) {
                case EventKind::mint: {
                    const auto [plo, phi] = event_range(e, i);
                    live[e.position_id].apply_delta(plo, phi, e.liquidity_delta);
                    changed.push_back(&e.position_id);
                    break;
                }
                case EventKind::burn: {
                    auto it = live.find(e.position_id);
                    if (it == live.end())
                        fail(Errc::unknown_position,
                             "burn for unknown position '" + e.position_id + "'" + at_line(lines, i));
                    const auto [plo, phi] = event_range(e, i);
                    try {
                        it->second.apply_delta(plo, phi, e.liquidity_delta);
                    } catch (const Error& err) {
                        if (err.kind() != Errc::negative_liquidity) throw;
                        fail(Errc::negative_liquidity, std::string(err.what()) + at_line(lines, i));
                    }
                    changed.push_back(&e.position_id);
                    break;
                }
                case EventKind::swap:
                    lump += e.fee_amount;
                    saw_swap = true;
                    impl = *e.implied_price_after;
                    ext = e.external_price.value_or(impl);
                    break;
                case EventKind::price_mark:
                    if (e.implied_price_after) impl = *e.implied_price_after;
                    if (e.external_price)
                        ext = *e.external_price;
                    else
                        ext = impl;
                    break;
            }
            if ((e.kind == EventKind::mint || e.kind == EventKind::burn) && e.external_price)
                ext = *e.external_price;
        }
        if (tl.times_.empty() && lump > 0.0)
            fail(Errc::orphan_fee, "fee charged at the very first timestamp has no segment to accrue on");
        tl.times_.push_back(t);
        tl.ext_.push_back(ext);
        tl.impl_.push_back(impl);
        tl.swap_at_.push_back(saw_swap ? 1 : 0);
        lump_at.push_back(lump);
        tl.total_fees_ += lump;
        if (!changed.empty()) {
            for (const auto* id : changed) {
                auto& ledger = tl.positions_[*id];
                if (!ledger.empty() && ledger.back().t_start == t)
                    ledger.back().dist = live[*id];
                else
                    ledger.push_back({t, live[*id]});
            }
            LiquidityDistribution agg;
            for (const auto& [id, dist] : live) agg.accumulate(dist);
            if (!tl.aggregate_.empty() && tl.aggregate_.back().t_start == t)
                tl.aggregate_.back().dist = std::move(agg);
            else
                tl.aggregate_.push_back({t, std::move(agg)});
        }
    }

    // Prices are right-continuous from each observation; the first observation
    // also extends back to the span start so early fee segments are priced.
    const auto backfill = [](std::vector<double>& v) {
        auto it = std::find_if(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
        if (it != v.end()) std::fill(v.begin(), it, *it);
    };
    backfill(tl.impl_);
    backfill(tl.ext_);

    // Fee lumps smear uniformly over the segment ending at the paying swap.
    const size_t K = tl.times_.size() - 1;
    tl.fee_rate_.resize(K, 0.0);
    for (size_t j = 0; j < K; ++j) {
        const double lump = lump_at[j + 1];
        if (lump == 0.0) continue;
        tl.fee_rate_[j] = lump / (tl.times_[j + 1] - tl.times_[j]);
        const double p = tl.impl_[j];
        if (!std::isfinite(p))
            fail(Errc::orphan_fee, "fee accrues on a segment with no observed price (t=" +
                                       std::to_string(tl.times_[j]) + ")");
        if (!(ledger_at(tl.aggregate_, tl.times_[j])(p) > 0.0))
            fail(Errc::orphan_fee, "fee accrues while no liquidity is active at the implied price (t=" +
                                       std::to_string(tl.times_[j]) + ")");
    }
    return tl;
}

// ============================ state lookups ================================

const LiquidityDistribution& ledger_at(const std::vector<DistSegment>& segments, double t) {
    static const LiquidityDistribution zero{};
    auto it = std::upper_bound(segments.begin(), segments.end(), t,
                               [](double v, const DistSegment& s) { return v < s.t_start; });
    if (it == segments.begin()) return zero;
    return std::prev(it)->dist;
}

double PoolTimeline::span_start() const {
    if (times_.empty()) fail(Errc::out_of_range_time, "empty timeline has no span");
    return times_.front();
}

double PoolTimeline::span_end() const {
    if (times_.empty()) fail(Errc::out_of_range_time, "empty timeline has no span");
    return times_.back();
}

std::vector<std::string> PoolTimeline::position_ids() const {
    std::vector<std::string> out;
    out.reserve(positions_.size());
    for (const auto& [id, segs] : positions_) out.push_back(id);
    return out;
}

bool PoolTimeline::has_price(size_t j) const { return std::isfinite(impl_[j]); }

size_t PoolTimeline::segment_index(double t) const {
    if (times_.empty() || t < times_.front() || t > times_.back())
        fail(Errc::out_of_range_time, "t=" + std::to_string(t) + " outside the timeline span");
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<size_t>(it - times_.begin()) - 1;
}

const std::vector<DistSegment>& PoolTimeline::position_segments(const std::string& id) const {
    auto it = positions_.find(id);
    if (it == positions_.end()) fail(Errc::unknown_position, "no position '" + id + "' in this timeline");
    return it->second;
}

const LiquidityDistribution& PoolTimeline::distribution_at(const std::string& id, double t) const {
    segment_index(t);  // span check
    return ledger_at(position_segments(id), t);
}

const LiquidityDistribution& PoolTimeline::aggregate_at(double t) const {
    segment_index(t);
    return ledger_at(aggregate_, t);
}

double PoolTimeline::fee_share_at(const std::string& id, double t) const {
    const size_t j = segment_index(t);
    const double rate = j < fee_rate_.size() ? fee_rate_[j] : 0.0;
    if (!has_price(j)) return 0.0;
    const double p = impl_[j];
    const double total = ledger_at(aggregate_, t)(p);
    if (!(total > 0.0)) {
        if (rate > 0.0)
            fail(Errc::zero_active_liquidity_with_fee,
                 "fee accrues at t=" + std::to_string(t) + " with zero active liquidity");
        return 0.0;
    }
    return ledger_at(position_segments(id), t)(p) / total;
}

// ============================ snapshots ====================================

namespace {

json dist_segment_to_json(const DistSegment& s) {
    json j;
    j["t_start"] = s.t_start;
    j["breakpoints"] = s.dist.breakpoints();
    j["levels"] = s.dist.levels();
    return j;
}

DistSegment dist_segment_from_json(const json& j) {
    DistSegment s;
    s.t_start = j.at("t_start").get<double>();
    s.dist = LiquidityDistribution(j.at("breakpoints").get<std::vector<double>>(),
                                   j.at("levels").get<std::vector<double>>());
    return s;
}

const char* curve_kind_name(CurveKind k) {
    return k == CurveKind::constant_product ? "constant_product" : "concentrated_v3";
}

}  // namespace

void PoolTimeline::snapshot_save(std::ostream& out) const {
    json j;
    j["schema_version"] = 1;
    j["curve"] = {{"kind", curve_kind_name(curve_.kind)},
                  {"fee_rate", curve_.fee_rate},
                  {"tick_spacing", curve_.tick_spacing},
                  {"p_min_sentinel", curve_.p_min_sentinel},
                  {"p_max_sentinel", curve_.p_max_sentinel}};
    json positions = json::array();
    for (const auto& [id, segs] : positions_) {
        json p;
        p["position_id"] = id;
        json arr = json::array();
        for (const auto& s : segs) arr.push_back(dist_segment_to_json(s));
        p["segments"] = std::move(arr);
        positions.push_back(std::move(p));
    }
    j["positions"] = std::move(positions);
    json agg = json::array();
    for (const auto& s : aggregate_) agg.push_back(dist_segment_to_json(s));
    j["aggregate"] = std::move(agg);
    json fees = json::array();
    for (size_t s = 0; s + 1 < times_.size(); ++s) {
        json row;
        row["t_start"] = times_[s];
        row["t_end"] = times_[s + 1];
        row["rate"] = fee_rate_[s];
        fees.push_back(std::move(row));
    }
    j["fee_stream"] = std::move(fees);
    json prices = json::array();
    for (size_t b = 0; b < times_.size(); ++b) {
        json row;
        row["t_start"] = times_[b];
        row["t_end"] = times_[b + 1 < times_.size() ? b + 1 : b];
        if (std::isfinite(ext_[b])) row["external"] = ext_[b];
        if (std::isfinite(impl_[b])) row["implied"] = impl_[b];
        if (swap_at_[b] != 0) row["swap"] = true;
        prices.push_back(std::move(row));
    }
    j["price_path"] = std::move(prices);
    out << j.dump(2) << '\n';
}

PoolTimeline PoolTimeline::snapshot_load(std::istream& in) {
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) fail(Errc::corrupt_snapshot, "snapshot is not valid JSON");
    try {
        if (!j.contains("schema_version") || !j["schema_version"].is_number_integer())
            fail(Errc::corrupt_snapshot, "snapshot lacks schema_version");
        const int64_t version = j["schema_version"].get<int64_t>();
        if (version != 1)
            fail(Errc::version_mismatch, "snapshot schema_version " + std::to_string(version) +
                                             " unsupported (expected 1)");
        PoolTimeline tl;
        const json& c = j.at("curve");
        const std::string kind = c.at("kind").get<std::string>();
        if (kind == "constant_product")
            tl.curve_.kind = CurveKind::constant_product;
        else if (kind == "concentrated_v3")
            tl.curve_.kind = CurveKind::concentrated_v3;
        else
            fail(Errc::corrupt_snapshot, "unknown curve kind '" + kind + "'");
        tl.curve_.fee_rate = c.at("fee_rate").get<double>();
        tl.curve_.tick_spacing = c.at("tick_spacing").get<int64_t>();
        tl.curve_.p_min_sentinel = c.at("p_min_sentinel").get<double>();
        tl.curve_.p_max_sentinel = c.at("p_max_sentinel").get<double>();
        tl.curve_.validate();
        for (const json& p : j.at("positions")) {
            std::vector<DistSegment> segs;
            for (const json& s : p.at("segments")) segs.push_back(dist_segment_from_json(s));
            tl.positions_[p.at("position_id").get<std::string>()] = std::move(segs);
        }
        for (const json& s : j.at("aggregate")) tl.aggregate_.push_back(dist_segment_from_json(s));
        for (const json& row : j.at("price_path")) {
            tl.times_.push_back(row.at("t_start").get<double>());
            tl.ext_.push_back(row.contains("external") ? row["external"].get<double>() : kNaN);
            tl.impl_.push_back(row.contains("implied") ? row["implied"].get<double>() : kNaN);
            tl.swap_at_.push_back(row.value("swap", false) ? 1 : 0);
        }
        if (!std::is_sorted(tl.times_.begin(), tl.times_.end()))
            fail(Errc::corrupt_snapshot, "price path timestamps out of order");
        const json& fees = j.at("fee_stream");
        if (!tl.times_.empty() && fees.size() + 1 != tl.times_.size())
            fail(Errc::corrupt_snapshot, "fee stream does not tile the price path");
        tl.fee_rate_.resize(fees.size(), 0.0);
        for (size_t s = 0; s < fees.size(); ++s) {
            const json& row = fees[s];
            if (row.at("t_start").get<double>() != tl.times_[s] ||
                row.at("t_end").get<double>() != tl.times_[s + 1])
                fail(Errc::corrupt_snapshot, "fee stream segment boundaries disagree with the price path");
            tl.fee_rate_[s] = row.at("rate").get<double>();
            tl.total_fees_ += tl.fee_rate_[s] * (tl.times_[s + 1] - tl.times_[s]);
        }
        return tl;
    } catch (const json::exception& e) {
        fail(Errc::corrupt_snapshot, std::string("snapshot structure: ") + e.what());
    }
}

bool PoolTimeline::operator==(const PoolTimeline& other) const {
    const auto vec_eq = [](const std::vector<double>& a, const std::vector<double>& b) {
        if (a.size() != b.size()) return false;
        for (size_t i = 0; i < a.size(); ++i)
            if (!same_or_both_nan(a[i], b[i])) return false;
        return true;
    };
    return curve_.kind == other.curve_.kind && curve_.fee_rate == other.curve_.fee_rate &&
           curve_.tick_spacing == other.curve_.tick_spacing &&
           curve_.p_min_sentinel == other.curve_.p_min_sentinel &&
           curve_.p_max_sentinel == other.curve_.p_max_sentinel && vec_eq(times_, other.times_) &&
           vec_eq(fee_rate_, other.fee_rate_) && swap_at_ == other.swap_at_ &&
           vec_eq(ext_, other.ext_) && vec_eq(impl_, other.impl_) && positions_ == other.positions_ &&
           aggregate_ == other.aggregate_;
}

}  // namespace flair
