#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "marketpred/market.hpp"

namespace mkt {

/// Parameters of the deterministic-switching momentum/contrarian market.
/// Prices for days 1..k+1 are given; trading runs for `days` further days.
struct DsmcParams {
    long m = 20;
    int L = 8;  // maximum switching period, each trader's period is in [2, L]
    int k = 2;  // memory size
    Rat alpha = Rat(1, 4);
    long days = 250;
    std::vector<Rat> initial_prices; // exactly k+1 entries, days 1..k+1
    std::uint64_t seed = 0;

    void validate_params() const {
        if (m < 0) throw error("dsmc: trader count must be >= 0");
        if (L < 2) throw error("dsmc: maximum switching period must be >= 2");
        if (k < 1) throw error("dsmc: memory size must be >= 1");
        if (sgn(alpha) <= 0) throw error("dsmc: alpha must be > 0");
        if (days < 1) throw error("dsmc: need at least one trading day");
        if ((long)initial_prices.size() != (long)k + 1)
            throw error("dsmc: expected exactly k+1 initial prices");
    }
};

/// The random choice each trader makes at the beginning of day 1.
struct TraderState {
    TrendKind initial_kind;
    int period; // in [2, L]
};

struct DsmcResult {
    PriceSeries series;                        // days 1 .. k+1+days
    std::vector<TraderState> traders;          // size m
    long first_trading_day = 0;                // k+2
    std::vector<std::vector<int>> day_actions; // [day - first_trading_day][trader]
};

/// Trader i's strategy kind on day t: the initial kind for days
/// [k+2, k+2+period), flipped once per elapsed period afterwards.
inline TrendKind dsmc_kind_on_day(const TraderState& tr, int k, long t) {
    long start = k + 2;
    long flips = t < start ? 0 : (t - start) / tr.period;
    if (flips % 2 == 0) return tr.initial_kind;
    return tr.initial_kind == TrendKind::Momentum ? TrendKind::Contrarian
                                                  : TrendKind::Momentum;
}

/// Runs the basic model: seed -> trader states, then fully deterministic
/// trend trading with proportional price adjustment.
inline DsmcResult simulate_dsmc(const DsmcParams& params) {
    params.validate_params();
    Rng rng(params.seed);
    DsmcResult result{PriceSeries(params.initial_prices, 1), {}, params.k + 2, {}};
    result.traders.reserve((std::size_t)params.m);
    for (long i = 0; i < params.m; ++i) {
        TrendKind kind = rng.next_bit() ? TrendKind::Contrarian : TrendKind::Momentum;
        int period = 2 + (int)rng.below((std::uint64_t)(params.L - 1));
        result.traders.push_back(TraderState{kind, period});
    }
    for (long t = params.k + 2; t < params.k + 2 + params.days; ++t) {
        int tr = trend(result.series, params.k, t);
        int momentum_action = tr >= 0 ? +1 : -1;
        long net = 0;
        std::vector<int> actions;
        actions.reserve(result.traders.size());
        for (const auto& trader : result.traders) {
            int a = dsmc_kind_on_day(trader, params.k, t) == TrendKind::Momentum
                        ? momentum_action
                        : -momentum_action;
            actions.push_back(a);
            net += a;
        }
        result.day_actions.push_back(std::move(actions));
        result.series.push_back(result.series.back() + params.alpha * net);
    }
    return result;
}

/// The same trader population expressed in the general model: one
/// switching strategy per trader under the proportional increment rule.
/// simulate_as over these reproduces the basic-model series exactly.
inline MarketModel dsmc_as_model(const DsmcParams& params,
                                 const std::vector<TraderState>& traders) {
    MarketModel model;
    model.m = (long)traders.size();
    model.alpha = params.alpha;
    model.rule = IncrementRule::PI;
    model.population = BernoulliSubset{};
    for (const auto& tr : traders)
        model.strategies.push_back(
            Switching{tr.initial_kind, tr.period, params.k, (long)params.k + 2});
    if (model.strategies.empty()) model.strategies.push_back(Hold{});
    return model;
}

struct SummaryStats {
    double mean_change = 0;
    double stddev_change = 0;       // sample standard deviation (n-1)
    double lag1_autocorrelation = 0;
    double max_drawup = 0;
    double max_drawdown = 0;
    long longest_monotone_run = 0;  // in steps
};

/// Standard sample statistics over consecutive differences; needs at
/// least 3 prices.
inline SummaryStats summary_stats(const PriceSeries& series) {
    if (series.size() < 3) throw error("summary_stats: series must have length >= 3");
    const auto& p = series.prices();
    std::size_t n = p.size() - 1;
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = to_double(p[i + 1] - p[i]);

    SummaryStats st;
    double sum = 0;
    for (double v : d) sum += v;
    st.mean_change = sum / (double)n;
    double ss = 0;
    for (double v : d) ss += (v - st.mean_change) * (v - st.mean_change);
    st.stddev_change = std::sqrt(ss / (double)(n - 1));

    // Pearson correlation of (d_t, d_{t+1}) pairs; 0 when degenerate.
    {
        std::size_t np = n - 1;
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < np; ++i) { mx += d[i]; my += d[i + 1]; }
        mx /= (double)np;
        my /= (double)np;
        double sxy = 0, sxx = 0, syy = 0;
        for (std::size_t i = 0; i < np; ++i) {
            sxy += (d[i] - mx) * (d[i + 1] - my);
            sxx += (d[i] - mx) * (d[i] - mx);
            syy += (d[i + 1] - my) * (d[i + 1] - my);
        }
        st.lag1_autocorrelation = (sxx > 0 && syy > 0) ? sxy / std::sqrt(sxx * syy) : 0.0;
    }

    Rat run_min = p[0], run_max = p[0], drawup = 0, drawdown = 0;
    for (const auto& price : p) {
        if (price < run_min) run_min = price;
        if (price > run_max) run_max = price;
        if (price - run_min > drawup) drawup = price - run_min;
        if (run_max - price > drawdown) drawdown = run_max - price;
    }
    st.max_drawup = to_double(drawup);
    st.max_drawdown = to_double(drawdown);

    long best = 0, current = 0;
    int dir = 0;
    for (std::size_t i = 0; i < n; ++i) {
        int s = d[i] > 0 ? 1 : d[i] < 0 ? -1 : 0;
        if (s != 0 && s == dir) ++current;
        else current = s != 0 ? 1 : 0;
        dir = s;
        if (current > best) best = current;
    }
    st.longest_monotone_run = best;
    return st;
}

} // namespace mkt
