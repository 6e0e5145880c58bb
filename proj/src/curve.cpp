#include "flair/curve.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace flair {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_price(double p, const char* what) {
    if (!(p > 0.0) || !std::isfinite(p)) fail(Errc::invalid_price, std::string(what) + " must be a positive finite price");
}

}  // namespace

// ============================ CurveSpec ====================================

void CurveSpec::validate() const {
    if (!(fee_rate >= 0.0) || !(fee_rate < 1.0)) fail(Errc::invalid_spec, "fee_rate must lie in [0, 1)");
    if (tick_spacing < 1) fail(Errc::invalid_spec, "tick_spacing must be >= 1");
    if (!(p_min_sentinel > 0.0) || !(p_max_sentinel > p_min_sentinel) || !std::isfinite(p_max_sentinel))
        fail(Errc::invalid_spec, "price sentinels must satisfy 0 < p_min < p_max < inf");
}

// ====================== LiquidityDistribution ==============================

LiquidityDistribution::LiquidityDistribution(std::vector<double> breakpoints, std::vector<double> levels)
    : bps_(std::move(breakpoints)), lvl_(std::move(levels)) {
    if (bps_.empty() && lvl_.empty()) return;
    if (bps_.size() != lvl_.size() + 1 || lvl_.empty())
        fail(Errc::invalid_spec, "distribution needs n+1 breakpoints for n >= 1 levels");
    for (size_t i = 0; i < bps_.size(); ++i) {
        if (std::isnan(bps_[i])) fail(Errc::invalid_spec, "breakpoint is NaN");
        if (i > 0 && !(bps_[i] > bps_[i - 1])) fail(Errc::invalid_spec, "breakpoints must increase strictly");
        if (i + 1 < bps_.size() && !std::isfinite(bps_[i]) )
            fail(Errc::invalid_spec, "only the last breakpoint may be infinite");
    }
    if (bps_.front() < 0.0) fail(Errc::invalid_spec, "breakpoints must be >= 0");
    for (double l : lvl_) {
        if (!std::isfinite(l) || l < 0.0) fail(Errc::invalid_spec, "levels must be finite and >= 0");
    }
    prune();
}

LiquidityDistribution LiquidityDistribution::single(double p_lo, double p_hi, double level) {
    return LiquidityDistribution({p_lo, p_hi}, {level});
}

double LiquidityDistribution::operator()(double p) const {
    if (!(p >= 0.0)) fail(Errc::invalid_price, "evaluation price must be >= 0");
    if (lvl_.empty() || p < bps_.front() || p >= bps_.back()) return 0.0;
    // Right continuity: p == bps_[i] selects interval i.
    auto it = std::upper_bound(bps_.begin(), bps_.end(), p);
    return lvl_[static_cast<size_t>(it - bps_.begin()) - 1];
}

void LiquidityDistribution::prune() {
    size_t lo = 0, hi = lvl_.size();
    while (lo < hi && lvl_[lo] == 0.0) ++lo;
    while (hi > lo && lvl_[hi - 1] == 0.0) --hi;
    if (lo == hi) {
        bps_.clear();
        lvl_.clear();
        return;
    }
    std::vector<double> nb, nl;
    nb.reserve(hi - lo + 1);
    nl.reserve(hi - lo);
    nb.push_back(bps_[lo]);
    for (size_t i = lo; i < hi; ++i) {
        if (!nl.empty() && nl.back() == lvl_[i]) {
            nb.back() = bps_[i + 1];  // merge equal neighbours
        } else {
            nl.push_back(lvl_[i]);
            nb.push_back(bps_[i + 1]);
        }
    }
    bps_ = std::move(nb);
    lvl_ = std::move(nl);
}

void LiquidityDistribution::accumulate(const LiquidityDistribution& other) {
    if (other.is_zero()) return;
    if (is_zero()) {
        *this = other;
        return;
    }
    std::vector<double> merged;
    merged.reserve(bps_.size() + other.bps_.size());
    std::merge(bps_.begin(), bps_.end(), other.bps_.begin(), other.bps_.end(), std::back_inserter(merged));
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    std::vector<double> nl(merged.size() - 1);
    for (size_t i = 0; i + 1 < merged.size(); ++i) nl[i] = (*this)(merged[i]) + other(merged[i]);
    bps_ = std::move(merged);
    lvl_ = std::move(nl);
    prune();
}

void LiquidityDistribution::apply_delta(double p_lo, double p_hi, double delta) {
    if (!(p_lo >= 0.0) || !(p_hi > p_lo)) fail(Errc::invalid_spec, "delta range must satisfy 0 <= p_lo < p_hi");
    if (!std::isfinite(delta) || delta == 0.0) fail(Errc::invalid_spec, "liquidity delta must be finite and nonzero");
    if (delta > 0.0) {
        accumulate(single(p_lo, p_hi, delta));
        return;
    }
    // Negative delta: refine to include the range, subtract, floor at zero.
    std::vector<double> merged(bps_);
    for (double p : {p_lo, p_hi}) {
        auto it = std::lower_bound(merged.begin(), merged.end(), p);
        if (it == merged.end() || *it != p) merged.insert(it, p);
    }
    std::vector<double> nl(merged.empty() ? 0 : merged.size() - 1);
    const double tol = 1e-9 * std::max(1.0, -delta);
    for (size_t i = 0; i + 1 < merged.size(); ++i) {
        double level = (*this)(merged[i]);
        if (merged[i] >= p_lo && merged[i] < p_hi) {
            level += delta;
            if (level < -tol)
                fail(Errc::negative_liquidity, "burn exceeds available liquidity on [" +
                                                   std::to_string(p_lo) + ", " + std::to_string(p_hi) + ")");
            if (level < 0.0) level = 0.0;
        }
        nl[i] = level;
    }
    bps_ = std::move(merged);
    lvl_ = std::move(nl);
    prune();
}

LiquidityDistribution LiquidityDistribution::scaled(double factor) const {
    if (!std::isfinite(factor) || factor < 0.0) fail(Errc::invalid_spec, "scale factor must be finite and >= 0");
    if (factor == 0.0 || is_zero()) return {};
    LiquidityDistribution out(*this);
    for (double& l : out.lvl_) l *= factor;
    out.prune();
    return out;
}

// ============================ reserve maps =================================
//
// For an interval (a, b) with level L and implied price p:
//   entirely above p  (p <= a):  all risky,     x += L (1/sqrt(a) - 1/sqrt(b))
//   p inside [a, b):              split at p,    x += L (1/sqrt(p) - 1/sqrt(b))
//                                                y += L (sqrt(p) - sqrt(a))
//   entirely below p (p >= b):   all numeraire, y += L (sqrt(b) - sqrt(a))
// Bounds at the sentinels degenerate to the constant-product limit.

double reserves_x(const CurveSpec& curve, double p, const LiquidityDistribution& dist) {
    check_price(p, "implied price");
    const auto& bps = dist.breakpoints();
    const auto& lvl = dist.levels();
    double total = 0.0;
    for (size_t i = 0; i < lvl.size(); ++i) {
        if (lvl[i] == 0.0) continue;
        const double a = bps[i], b = bps[i + 1];
        if (p >= b) continue;
        const double inv_sb = b >= curve.p_max_sentinel ? 0.0 : 1.0 / std::sqrt(b);
        const double top = p < a ? 1.0 / std::sqrt(a) : 1.0 / std::sqrt(p);
        total += lvl[i] * (top - inv_sb);
    }
    if (!std::isfinite(total)) fail(Errc::non_finite_reserves, "risky reserves diverge for this distribution");
    return total;
}

double reserves_y(const CurveSpec& curve, double p, const LiquidityDistribution& dist) {
    check_price(p, "implied price");
    const auto& bps = dist.breakpoints();
    const auto& lvl = dist.levels();
    double total = 0.0;
    for (size_t i = 0; i < lvl.size(); ++i) {
        if (lvl[i] == 0.0) continue;
        const double a = bps[i], b = bps[i + 1];
        if (p < a) continue;
        const double sq_a = a <= curve.p_min_sentinel ? 0.0 : std::sqrt(a);
        const double top = p >= b ? std::sqrt(b) : std::sqrt(p);
        total += lvl[i] * (top - sq_a);
    }
    if (!std::isfinite(total)) fail(Errc::non_finite_reserves, "numeraire reserves diverge for this distribution");
    return total;
}

double portfolio_value(const CurveSpec& curve, double p_ext, double p_implied,
                       const LiquidityDistribution& dist) {
    check_price(p_ext, "external price");
    double v = p_ext * reserves_x(curve, p_implied, dist) + reserves_y(curve, p_implied, dist);
    if (!std::isfinite(v)) fail(Errc::non_finite_reserves, "portfolio value diverges");
    return v;
}

// ============================ tick arithmetic ==============================

namespace {

constexpr double kTickBase = 1.0001;

// 1.0001^(2^k); 20 entries cover |tick| <= kMaxTick < 2^20.
const std::array<double, 20>& squared_powers() {
    static const std::array<double, 20> table = [] {
        std::array<double, 20> t{};
        t[0] = kTickBase;
        for (size_t k = 1; k < t.size(); ++k) t[k] = t[k - 1] * t[k - 1];
        return t;
    }();
    return table;
}

double positive_tick_power(uint64_t n) {
    const auto& table = squared_powers();
    double r = 1.0;
    for (size_t k = 0; n != 0; ++k, n >>= 1)
        if (n & 1) r *= table[k];
    return r;
}

// Guarded lookup used by the tick search: multiples outside the tick bounds
// behave as +/-inf so the fix-up loops terminate near the ends of the grid.
double tick_price_or_limit(int64_t tick) {
    if (tick > kMaxTick) return kInf;
    if (tick < -kMaxTick) return 0.0;
    return tick_to_price(tick);
}

}  // namespace

double tick_to_price(int64_t tick) {
    if (tick < -kMaxTick || tick > kMaxTick) fail(Errc::invalid_tick, "tick " + std::to_string(tick) + " out of bounds");
    const double r = positive_tick_power(static_cast<uint64_t>(tick < 0 ? -tick : tick));
    return tick < 0 ? 1.0 / r : r;
}

double tick_to_price_q64(int64_t tick) {
    constexpr int64_t kMaxQ64Tick = 400000;
    if (tick < -kMaxQ64Tick || tick > kMaxQ64Tick)
        fail(Errc::invalid_tick, "fixed-point tick check limited to |tick| <= 400000");
    using u128 = unsigned __int128;
    // (a * b) >> 64 assembled from 64-bit limbs; operands stay below 2^124
    // because every partial product of 1.0001 powers is bounded by the final
    // price, which the tick limit keeps under 2^60 in the integer part.
    auto mul = [](u128 a, u128 b) -> u128 {
        const uint64_t a0 = static_cast<uint64_t>(a), a1 = static_cast<uint64_t>(a >> 64);
        const uint64_t b0 = static_cast<uint64_t>(b), b1 = static_cast<uint64_t>(b >> 64);
        u128 r = (u128(a0) * b0) >> 64;
        r += u128(a0) * b1;
        r += u128(a1) * b0;
        r += u128(u128(a1) * b1) << 64;
        return r;
    };
    const u128 one = u128(1) << 64;
    u128 base = one + u128(1844674407370752ull);  // the double constant 1.0001 times 2^64, exact
    u128 acc = one;
    uint64_t n = static_cast<uint64_t>(tick < 0 ? -tick : tick);
    while (n != 0) {
        if (n & 1) acc = mul(acc, base);
        base = mul(base, base);
        n >>= 1;
    }
    const double value =
        static_cast<double>(static_cast<uint64_t>(acc >> 64)) +
        static_cast<double>(static_cast<uint64_t>(acc)) * 0x1.0p-64;
    return tick < 0 ? 1.0 / value : value;
}

namespace {

// Shared search core: returns the largest multiple m*spacing with
// price(m*spacing) <= p.  The libm log is only a seed; the answer is fixed up
// against the deterministic power function.
int64_t floor_multiple(double p, int64_t spacing) {
    const double approx = std::log(p) / std::log(kTickBase);
    const double bound = static_cast<double>(kMaxTick / spacing + 2);
    const double guess = std::clamp(std::floor(approx / static_cast<double>(spacing)), -bound, bound);
    int64_t m = static_cast<int64_t>(guess);
    for (int iter = 0; iter < 128; ++iter) {
        if (tick_price_or_limit((m + 1) * spacing) <= p) {
            ++m;
        } else if (tick_price_or_limit(m * spacing) > p) {
            --m;
        } else {
            return m;
        }
    }
    fail(Errc::internal, "tick search failed to converge");
}

}  // namespace

int64_t tick_lower(double p, int64_t spacing) {
    check_price(p, "price");
    if (spacing < 1) fail(Errc::invalid_spec, "tick spacing must be >= 1");
    const int64_t m = floor_multiple(p, spacing);
    const int64_t tick = m * spacing;
    if (tick < -kMaxTick || tick > kMaxTick) fail(Errc::invalid_tick, "price outside the tick grid");
    return tick;
}

int64_t tick_upper(double p, int64_t spacing) {
    check_price(p, "price");
    if (spacing < 1) fail(Errc::invalid_spec, "tick spacing must be >= 1");
    const int64_t m = floor_multiple(p, spacing);
    // Exact grid hit keeps the same multiple; otherwise step one up.
    const int64_t tick = (tick_price_or_limit(m * spacing) == p ? m : m + 1) * spacing;
    if (tick < -kMaxTick || tick > kMaxTick) fail(Errc::invalid_tick, "price outside the tick grid");
    return tick;
}

// ========================= implied price recovery ==========================

double implied_price_check(const CurveSpec& curve, double x, double y,
                           const LiquidityDistribution& dist) {
    if (dist.is_zero()) fail(Errc::inconsistent_reserves, "zero distribution holds no reserves");
    if (!std::isfinite(x) || !std::isfinite(y) || x < 0.0 || y < 0.0)
        fail(Errc::inconsistent_reserves, "reserves must be finite and >= 0");
    double lo = std::max(dist.breakpoints().front(), curve.p_min_sentinel);
    double hi = std::min(dist.breakpoints().back(), curve.p_max_sentinel);
    // y* is monotone non-decreasing in p; geometric bisection conditions the
    // search across the decades a sentinel interval can span.
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = std::sqrt(lo) * std::sqrt(hi);
        if (!(mid > lo && mid < hi)) break;
        if (reserves_y(curve, mid, dist) < y)
            lo = mid;
        else
            hi = mid;
    }
    const double p = std::sqrt(lo) * std::sqrt(hi);
    const double tol = 1e-9 * std::max({1.0, std::abs(x), std::abs(y)});
    if (std::abs(reserves_x(curve, p, dist) - x) > tol || std::abs(reserves_y(curve, p, dist) - y) > tol)
        fail(Errc::inconsistent_reserves, "reserve pair does not lie on the curve");
    return p;
}

}  // namespace flair
