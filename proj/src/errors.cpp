#include "flair/errors.hpp"

namespace flair {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::invalid_price: return "InvalidPrice";
        case Errc::invalid_tick: return "InvalidTick";
        case Errc::invalid_spec: return "InvalidSpec";
        case Errc::invalid_event: return "InvalidEvent";
        case Errc::invalid_config: return "InvalidConfig";
        case Errc::non_finite_reserves: return "NonFiniteReserves";
        case Errc::inconsistent_reserves: return "InconsistentReserves";
        case Errc::unsorted_log: return "UnsortedLog";
        case Errc::negative_liquidity: return "NegativeLiquidity";
        case Errc::unknown_position: return "UnknownPosition";
        case Errc::orphan_fee: return "OrphanFee";
        case Errc::out_of_range_time: return "OutOfRangeTime";
        case Errc::zero_active_liquidity_with_fee: return "ZeroActiveLiquidityWithFee";
        case Errc::corrupt_snapshot: return "CorruptSnapshot";
        case Errc::version_mismatch: return "VersionMismatch";
        case Errc::zero_capital_with_fee_share: return "ZeroCapitalWithFeeShare";
        case Errc::zero_pool_capital_with_fee: return "ZeroPoolCapitalWithFee";
        case Errc::window_mismatch: return "WindowMismatch";
        case Errc::missing_forward_prices: return "MissingForwardPrices";
        case Errc::infeasible_capital: return "InfeasibleCapital";
        case Errc::empty_grid: return "EmptyGrid";
        case Errc::internal: return "Internal";
    }
    return "Unknown";
}

}  // namespace flair
