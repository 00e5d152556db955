#pragma once

#include <variant>
#include <vector>

#include "marketpred/price_series.hpp"

namespace mkt {

/// k-day trend at the beginning of day t: among the k comparisons
/// P_g vs P_{g-1} for g in [t-k, t-1], up-days minus down-days.
/// Flat comparisons count toward neither.  Needs prices for days
/// t-(k+1) .. t-1.
inline int trend(const PriceSeries& history, int k, long t) {
    if (k < 1) throw error("trend: window must be >= 1");
    if (!history.has_day(t - (k + 1)) || !history.has_day(t - 1))
        throw error("trend: insufficient history for day " + std::to_string(t));
    int up = 0, down = 0;
    for (long g = t - k; g <= t - 1; ++g) {
        int s = sgn(history.at_day(g) - history.at_day(g - 1));
        if (s > 0) ++up;
        else if (s < 0) ++down;
    }
    return up - down;
}

enum class TrendKind { Momentum, Contrarian };

/// Fixed per-day action table; action for day d (d >= 1) is actions[d-1],
/// and days beyond the stored table evaluate to hold.
struct Passive {
    std::vector<int> actions;
};

struct Momentum { int k; };
struct Contrarian { int k; };

/// Trades momentum or contrarian with window k, starting in phase
/// `initial` on day `start` and flipping kind every `period` days.
struct Switching {
    TrendKind initial;
    int period; // >= 2
    int k;
    long start;
};

struct Hold {};

using Strategy = std::variant<Passive, Momentum, Contrarian, Switching, Hold>;

namespace detail {

/// Momentum/contrarian act only from day k+2 onwards and only when the
/// full k-window of history exists; otherwise they hold.
inline int trend_action(const PriceSeries& history, int k, long day, TrendKind kind) {
    if (day <= k + 1) return 0;
    if (!history.has_day(day - (k + 1)) || !history.has_day(day - 1)) return 0;
    int tr = trend(history, k, day);
    int momentum = tr >= 0 ? +1 : -1; // ties break toward buying
    return kind == TrendKind::Momentum ? momentum : -momentum;
}

} // namespace detail

inline void validate(const Strategy& s) {
    if (auto* m = std::get_if<Momentum>(&s); m && m->k < 1)
        throw error("Momentum requires k >= 1");
    if (auto* c = std::get_if<Contrarian>(&s); c && c->k < 1)
        throw error("Contrarian requires k >= 1");
    if (auto* w = std::get_if<Switching>(&s)) {
        if (w->k < 1) throw error("Switching requires k >= 1");
        if (w->period < 2) throw error("Switching requires period >= 2");
    }
}

/// Action in {-1, 0, +1} of strategy s at the beginning of day `day`,
/// given prices strictly before that day.  There is no trading on day 0.
inline int eval_strategy(const Strategy& s, const PriceSeries& history, long day) {
    if (day < 1) throw error("no trading on day 0");
    return std::visit(
        [&](const auto& v) -> int {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Passive>) {
                std::size_t idx = (std::size_t)(day - 1);
                return idx < v.actions.size() ? v.actions[idx] : 0;
            } else if constexpr (std::is_same_v<T, Momentum>) {
                return detail::trend_action(history, v.k, day, TrendKind::Momentum);
            } else if constexpr (std::is_same_v<T, Contrarian>) {
                return detail::trend_action(history, v.k, day, TrendKind::Contrarian);
            } else if constexpr (std::is_same_v<T, Switching>) {
                long flips = day < v.start ? 0 : (day - v.start) / v.period;
                TrendKind kind = (flips % 2 == 0)
                    ? v.initial
                    : (v.initial == TrendKind::Momentum ? TrendKind::Contrarian
                                                        : TrendKind::Momentum);
                return detail::trend_action(history, v.k, day, kind);
            } else {
                return 0; // Hold
            }
        },
        s);
}

} // namespace mkt
