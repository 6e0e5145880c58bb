#pragma once
// Error taxonomy shared by every module.  Each failure carries a stable kind
// so callers (and the CLI exit-code mapping) can tell validation problems
// apart from internal invariant violations without parsing message text.

#include <stdexcept>
#include <string>

namespace flair {

enum class Errc {
    invalid_price,
    invalid_tick,
    invalid_spec,
    invalid_event,
    invalid_config,
    non_finite_reserves,
    inconsistent_reserves,
    unsorted_log,
    negative_liquidity,
    unknown_position,
    orphan_fee,
    out_of_range_time,
    zero_active_liquidity_with_fee,
    corrupt_snapshot,
    version_mismatch,
    zero_capital_with_fee_share,
    zero_pool_capital_with_fee,
    window_mismatch,
    missing_forward_prices,
    infeasible_capital,
    empty_grid,
    internal,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc kind, const std::string& msg)
        : std::runtime_error(std::string(errc_name(kind)) + ": " + msg), kind_(kind) {}

    Errc kind() const { return kind_; }

private:
    Errc kind_;
};

[[noreturn]] inline void fail(Errc kind, const std::string& msg) { throw Error(kind, msg); }

}  // namespace flair
