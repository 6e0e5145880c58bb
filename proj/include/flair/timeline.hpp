#pragma once
// Event-sourced pool history.  Ingest folds an ordered event log into an
// immutable timeline: per-position liquidity ledgers, the aggregate
// distribution, a smeared fee stream, and piecewise-constant price paths,
// all right-continuous and aligned on the distinct event timestamps.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flair/curve.hpp"

namespace flair {

enum class EventKind { mint, burn, swap, price_mark };

const char* event_kind_name(EventKind k);
EventKind event_kind_from_name(const std::string& name);

struct PoolEvent {
    double timestamp = 0.0;
    EventKind kind = EventKind::price_mark;
    std::string position_id;                         // mint/burn
    std::optional<int64_t> tick_lower, tick_upper;   // mint/burn; ignored on constant-product curves
    double liquidity_delta = 0.0;                    // mint > 0, burn < 0
    double fee_amount = 0.0;                         // swap
    std::optional<double> implied_price_after;       // swap (required) / price_mark
    std::optional<double> external_price;            // any kind; price-bearing events default it to implied
};

// Structural checks that need no curve context (field presence and signs).
void validate_event_shape(const PoolEvent& e);

struct ParsedEvents {
    std::vector<PoolEvent> events;
    std::vector<int> lines;  // 1-based source line per event
};

ParsedEvents read_events_jsonl(std::istream& in);
ParsedEvents read_events_csv(std::istream& in);
void write_events_jsonl(std::ostream& out, const std::vector<PoolEvent>& events);

// A position's distribution effective from t_start until the next segment.
struct DistSegment {
    double t_start = 0.0;
    LiquidityDistribution dist;

    bool operator==(const DistSegment&) const = default;
};

class PoolTimeline {
public:
    // lines, when given, annotates diagnostics with source line numbers.
    static PoolTimeline ingest(const CurveSpec& curve, const std::vector<PoolEvent>& events,
                               const std::vector<int>* lines = nullptr);

    const CurveSpec& curve() const { return curve_; }
    bool empty() const { return times_.empty(); }
    double span_start() const;
    double span_end() const;
    double total_fees() const { return total_fees_; }
    size_t position_count() const { return positions_.size(); }
    std::vector<std::string> position_ids() const;
    bool has_position(const std::string& id) const { return positions_.count(id) != 0; }

    // Right-continuous state lookups; t must lie within the span.
    const LiquidityDistribution& distribution_at(const std::string& id, double t) const;
    const LiquidityDistribution& aggregate_at(double t) const;
    double fee_share_at(const std::string& id, double t) const;

    // Grid access for integrators: K+1 boundaries, K segments.  State arrays
    // have K+1 entries; entry j describes [time(j), time(j+1)) and entry K the
    // final instant.
    size_t segment_count() const { return times_.empty() ? 0 : times_.size() - 1; }
    double grid_time(size_t j) const { return times_[j]; }
    double fee_rate(size_t seg) const { return fee_rate_[seg]; }
    bool swap_at(size_t j) const { return swap_at_[j] != 0; }
    double external_price(size_t j) const { return ext_[j]; }
    double implied_price(size_t j) const { return impl_[j]; }
    bool has_price(size_t j) const;
    size_t segment_index(double t) const;  // largest j with time(j) <= t

    const std::vector<DistSegment>& position_segments(const std::string& id) const;
    const std::vector<DistSegment>& aggregate_segments() const { return aggregate_; }

    void snapshot_save(std::ostream& out) const;
    static PoolTimeline snapshot_load(std::istream& in);

    bool operator==(const PoolTimeline& other) const;

private:
    PoolTimeline() = default;

    CurveSpec curve_;
    std::vector<double> times_;                         // distinct event timestamps
    std::vector<double> fee_rate_;                      // per segment
    std::vector<uint8_t> swap_at_;                      // per boundary: swap executed here
    std::vector<double> ext_, impl_;                    // per boundary state (NaN = unobserved)
    std::map<std::string, std::vector<DistSegment>> positions_;
    std::vector<DistSegment> aggregate_;
    double total_fees_ = 0.0;
};

// Distribution effective at t within a change-point ledger (right-continuous);
// the zero distribution before the first segment.
const LiquidityDistribution& ledger_at(const std::vector<DistSegment>& segments, double t);

}  // namespace flair
