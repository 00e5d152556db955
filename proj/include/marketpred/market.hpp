#pragma once

#include <algorithm>
#include <numeric>
#include <variant>
#include <vector>

#include "marketpred/rng.hpp"
#include "marketpred/strategy.hpp"

namespace mkt {

enum class IncrementRule { FI, PI };

/// Each population variable X_i is independently 0 or 1 with equal
/// probability; the trader count is implicitly the strategy count.
struct BernoulliSubset {};

/// m traders each pick strategy i with probability p_i; all p_i > 0 and
/// the p_i sum to 1.
struct MultinomialDist {
    std::vector<Rat> p;
};

using PopulationDistribution = std::variant<BernoulliSubset, MultinomialDist>;

struct MarketModel {
    long m = 0;
    Rat alpha;
    std::vector<Strategy> strategies;
    IncrementRule rule = IncrementRule::FI;
    PopulationDistribution population;

    std::size_t h() const { return strategies.size(); }

    void validate_model() const {
        if (strategies.empty()) throw error("MarketModel requires at least one strategy");
        if (sgn(alpha) <= 0) throw error("MarketModel requires alpha > 0");
        for (const auto& s : strategies) validate(s);
        if (auto* mu = std::get_if<MultinomialDist>(&population)) {
            if (mu->p.size() != strategies.size())
                throw error("multinomial probability vector must have one entry per strategy");
            Rat sum = 0;
            for (const auto& pi : mu->p) {
                if (sgn(pi) <= 0) throw error("multinomial probabilities must be > 0");
                sum += pi;
            }
            if (sum != 1) throw error("multinomial probabilities must sum to 1");
        }
    }
};

/// Realized population (X_1, ..., X_h).
struct PopulationCounts {
    std::vector<long> counts;
};

/// Actions (S^1_day, ..., S^h_day) of every strategy at the given day.
inline std::vector<int> day_actions(const std::vector<Strategy>& strategies,
                                    const PriceSeries& history, long day) {
    std::vector<int> row;
    row.reserve(strategies.size());
    for (const auto& s : strategies) row.push_back(eval_strategy(s, history, day));
    return row;
}

/// Actions at the first unobserved day (the prediction target row).
inline std::vector<int> next_day_actions(const MarketModel& model,
                                         const PriceSeries& history) {
    return day_actions(model.strategies, history, history.last_day() + 1);
}

/// One application of the price adjustment rule.
/// PI: P_day = P_{day-1} + alpha * sum X_i S^i_day.
/// FI: P_day = P_{day-1} + alpha * sgn(sum X_i S^i_day).
inline Rat market_step(const MarketModel& model, const PriceSeries& history,
                       const PopulationCounts& counts, long day) {
    if (counts.counts.size() != model.h())
        throw error("market_step: counts/strategy size mismatch");
    long net = 0;
    for (std::size_t i = 0; i < model.h(); ++i)
        net += counts.counts[i] * eval_strategy(model.strategies[i], history, day);
    const Rat& prev = history.at_day(day - 1);
    if (model.rule == IncrementRule::PI) return prev + model.alpha * net;
    return prev + model.alpha * sgn(net);
}

/// Extends `initial` by `days` prices via market_step; deterministic
/// given the counts.
inline PriceSeries simulate_as(const MarketModel& model, const PopulationCounts& counts,
                               const PriceSeries& initial, long days) {
    PriceSeries series = initial;
    for (long i = 0; i < days; ++i) {
        long day = series.last_day() + 1;
        series.push_back(market_step(model, series, counts, day));
    }
    return series;
}

/// Draws a realized population.  BernoulliSubset: h independent fair
/// bits.  Multinomial: counts of m independent categorical draws.
inline PopulationCounts sample_population(const PopulationDistribution& dist,
                                          std::size_t h, long m, std::uint64_t seed) {
    Rng rng(seed);
    PopulationCounts out;
    out.counts.assign(h, 0);
    if (std::holds_alternative<BernoulliSubset>(dist)) {
        for (std::size_t i = 0; i < h; ++i) out.counts[i] = rng.next_bit() ? 1 : 0;
        return out;
    }
    const auto& mu = std::get<MultinomialDist>(dist);
    if (mu.p.size() != h) throw error("sample_population: h does not match p");
    Rat sum = 0;
    for (const auto& pi : mu.p) {
        if (sgn(pi) <= 0) throw error("sample_population: probabilities must be > 0");
        sum += pi;
    }
    if (sum != 1) throw error("sample_population: probabilities must sum to 1");
    // Integer thresholds over a common denominator, so each draw is one
    // exact uniform integer.
    Int denom = 1;
    for (const auto& pi : mu.p) denom = boost::multiprecision::lcm(denom, rat_den(pi));
    std::vector<Int> cumulative(h);
    Int acc = 0;
    for (std::size_t i = 0; i < h; ++i) {
        acc += rat_num(mu.p[i]) * (denom / rat_den(mu.p[i]));
        cumulative[i] = acc;
    }
    bool small = denom <= Int(UINT64_MAX);
    std::vector<std::uint64_t> cum64;
    if (small)
        for (const auto& c : cumulative) cum64.push_back(c.convert_to<std::uint64_t>());
    for (long t = 0; t < m; ++t) {
        if (small) {
            std::uint64_t v = rng.below(denom.convert_to<std::uint64_t>());
            std::size_t i = (std::size_t)(std::upper_bound(cum64.begin(), cum64.end(), v) -
                                          cum64.begin());
            ++out.counts[i];
        } else {
            Int v = rng.below_big(denom);
            std::size_t i = (std::size_t)(std::upper_bound(cumulative.begin(),
                                                           cumulative.end(), v) -
                                          cumulative.begin());
            ++out.counts[i];
        }
    }
    return out;
}

} // namespace mkt
