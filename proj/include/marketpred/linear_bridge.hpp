#pragma once

#include <utility>

#include "marketpred/linear_system.hpp"
#include "marketpred/market.hpp"

namespace mkt {

/// Defaults for histories constructed out of constraint systems; the
/// model leaves P_0 and alpha free, so both are overridable.
struct BridgeOptions {
    Rat p0 = 100;
    Rat alpha = 1;
};

/// Fixed-increment extraction: one strict inequality per moving day
/// (row oriented so that satisfied means "reproduces the move") and one
/// zero equation per flat day.  c is the next unobserved day's action row.
inline std::pair<LinearSystem, DayProvenance>
fi_market_to_system(const MarketModel& model, const PriceSeries& history) {
    if (model.rule != IncrementRule::FI)
        throw error("fi_market_to_system: model must use the FI rule");
    LinearSystem sys;
    sys.columns = model.h();
    DayProvenance prov;
    for (long day = history.first_day() + 1; day <= history.last_day(); ++day) {
        Rat diff = history.at_day(day) - history.at_day(day - 1);
        std::vector<int> row = day_actions(model.strategies, history, day);
        if (diff == 0) {
            prov.entries.push_back({day, Movement::Flat, sys.B.size()});
            sys.B.push_back(std::move(row));
            sys.b.push_back(0);
        } else if (diff == model.alpha || diff == -model.alpha) {
            int s = sgn(diff);
            if (s < 0)
                for (int& v : row) v = -v;
            prov.entries.push_back(
                {day, s > 0 ? Movement::Up : Movement::Down, sys.A.size()});
            sys.A.push_back(std::move(row));
        } else {
            throw infeasible_history_error(
                day, "FI history: price change on day " + std::to_string(day) +
                         " is not in {-alpha, 0, +alpha}");
        }
    }
    sys.c = next_day_actions(model, history);
    return {std::move(sys), std::move(prov)};
}

/// Inverse direction: each A-row is realized as an up day (canonical
/// orientation) and each B-row as a flat day; the strategies are passive
/// per-day action tables read off the columns, with the day after the
/// history carrying the target row c.
inline std::tuple<MarketModel, PriceSeries, DayProvenance>
system_to_fi_market(const LinearSystem& sys, const BridgeOptions& opts = {}) {
    sys.validate_system();
    for (long v : sys.b)
        if (v != 0) throw error("system_to_fi_market: b must be all zero");
    std::size_t h = sys.columns;
    std::size_t beta = sys.beta();
    std::vector<Passive> tables(h);
    for (auto& t : tables) t.actions.assign(beta + (sys.c.empty() ? 0 : 1), 0);

    DayProvenance prov;
    std::vector<Rat> prices{opts.p0};
    long day = 0;
    for (std::size_t r = 0; r < sys.A.size(); ++r) {
        ++day;
        for (std::size_t i = 0; i < h; ++i) tables[i].actions[day - 1] = sys.A[r][i];
        prices.push_back(prices.back() + opts.alpha);
        prov.entries.push_back({day, Movement::Up, r});
    }
    for (std::size_t r = 0; r < sys.B.size(); ++r) {
        ++day;
        for (std::size_t i = 0; i < h; ++i) tables[i].actions[day - 1] = sys.B[r][i];
        prices.push_back(prices.back());
        prov.entries.push_back({day, Movement::Flat, r});
    }
    if (!sys.c.empty())
        for (std::size_t i = 0; i < h; ++i) tables[i].actions[beta] = sys.c[i];

    MarketModel model;
    model.m = (long)h;
    model.alpha = opts.alpha;
    model.rule = IncrementRule::FI;
    model.population = BernoulliSubset{};
    for (auto& t : tables) model.strategies.push_back(std::move(t));
    return {std::move(model), PriceSeries(std::move(prices), 0), std::move(prov)};
}

/// Proportional-increment extraction: pure equations, with right-hand
/// sides normalized by alpha (integrality is a feasibility requirement).
inline std::pair<LinearSystem, DayProvenance>
pi_market_to_system(const MarketModel& model, const PriceSeries& history) {
    if (model.rule != IncrementRule::PI)
        throw error("pi_market_to_system: model must use the PI rule");
    LinearSystem sys;
    sys.columns = model.h();
    DayProvenance prov;
    for (long day = history.first_day() + 1; day <= history.last_day(); ++day) {
        Rat ratio = (history.at_day(day) - history.at_day(day - 1)) / model.alpha;
        if (rat_den(ratio) != 1)
            throw infeasible_history_error(
                day, "PI history: price change on day " + std::to_string(day) +
                         " is not an integer multiple of alpha");
        int s = sgn(ratio);
        prov.entries.push_back(
            {day, s > 0 ? Movement::Up : s < 0 ? Movement::Down : Movement::Flat,
             sys.B.size()});
        sys.B.push_back(day_actions(model.strategies, history, day));
        sys.b.push_back(rat_num(ratio).convert_to<long>());
    }
    sys.c = next_day_actions(model, history);
    return {std::move(sys), std::move(prov)};
}

/// Inverse of the PI extraction: day j moves by alpha * b_j.
inline std::tuple<MarketModel, PriceSeries, DayProvenance>
system_to_pi_market(const std::vector<std::vector<int>>& B, const std::vector<long>& b,
                    const std::vector<int>& c = {}, const BridgeOptions& opts = {}) {
    if (B.size() != b.size())
        throw error("system_to_pi_market: B and b dimension mismatch");
    std::size_t h = B.empty() ? c.size() : B.front().size();
    LinearSystem sys;
    sys.columns = h;
    sys.B = B;
    sys.b = b;
    sys.c = c;
    sys.validate_system();

    std::size_t beta = B.size();
    std::vector<Passive> tables(h);
    for (auto& t : tables) t.actions.assign(beta + (c.empty() ? 0 : 1), 0);
    DayProvenance prov;
    std::vector<Rat> prices{opts.p0};
    for (std::size_t r = 0; r < beta; ++r) {
        long day = (long)r + 1;
        for (std::size_t i = 0; i < h; ++i) tables[i].actions[r] = B[r][i];
        prices.push_back(prices.back() + opts.alpha * b[r]);
        prov.entries.push_back(
            {day, b[r] > 0 ? Movement::Up : b[r] < 0 ? Movement::Down : Movement::Flat,
             r});
    }
    if (!c.empty())
        for (std::size_t i = 0; i < h; ++i) tables[i].actions[beta] = c[i];

    MarketModel model;
    model.m = (long)h;
    model.alpha = opts.alpha;
    model.rule = IncrementRule::PI;
    model.population = BernoulliSubset{};
    for (auto& t : tables) model.strategies.push_back(std::move(t));
    return {std::move(model), PriceSeries(std::move(prices), 0), std::move(prov)};
}

/// Grows a fixed-trader-count PI market to any m >= m0 without changing
/// the conditional population distribution: every strategy gets an
/// all-buy day (forcing net flow m0, so the added traders must hold),
/// its old next-day decision shifts one day later, and a hold strategy
/// absorbing probability 1/2 is appended.
inline std::pair<MarketModel, PriceSeries>
embed_pi_fixed_m(const MarketModel& model, const PriceSeries& history, long m_new) {
    if (model.rule != IncrementRule::PI)
        throw error("embed_pi_fixed_m: model must use the PI rule");
    const auto* mu = std::get_if<MultinomialDist>(&model.population);
    if (!mu) throw error("embed_pi_fixed_m: model must use a multinomial population");
    if (m_new < model.m) throw error("embed_pi_fixed_m: m must be >= m0");

    long t = history.last_day() + 1; // the appended all-buy day
    MarketModel out;
    out.m = m_new;
    out.alpha = model.alpha;
    out.rule = IncrementRule::PI;
    MultinomialDist dist;
    for (std::size_t i = 0; i < model.h(); ++i) {
        Passive table;
        table.actions.assign((std::size_t)t + 1, 0);
        for (long day = history.first_day() + 1; day <= t - 1; ++day)
            table.actions[(std::size_t)day - 1] =
                eval_strategy(model.strategies[i], history, day);
        table.actions[(std::size_t)t - 1] = +1; // all buy
        table.actions[(std::size_t)t] = eval_strategy(model.strategies[i], history, t);
        out.strategies.push_back(std::move(table));
        dist.p.push_back(mu->p[i] / 2);
    }
    out.strategies.push_back(Hold{});
    dist.p.push_back(Rat(1, 2));
    out.population = std::move(dist);

    PriceSeries extended = history;
    extended.push_back(history.back() + model.alpha * model.m);
    return {std::move(out), std::move(extended)};
}

} // namespace mkt
