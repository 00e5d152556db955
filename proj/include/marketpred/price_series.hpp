#pragma once

#include <vector>

#include "marketpred/rational.hpp"

namespace mkt {

/// Day-indexed exact-rational price history.  The first stored price
/// belongs to day `first_day` (0 for general markets, 1 in the basic
/// momentum/contrarian model, where the given prices start at day 1).
/// Always non-empty.
class PriceSeries {
public:
    explicit PriceSeries(std::vector<Rat> prices, long first_day = 0)
        : prices_(std::move(prices)), first_day_(first_day) {
        if (prices_.empty()) throw error("PriceSeries must contain at least one price");
    }

    long first_day() const { return first_day_; }
    long last_day() const { return first_day_ + (long)prices_.size() - 1; }
    std::size_t size() const { return prices_.size(); }

    bool has_day(long day) const { return day >= first_day_ && day <= last_day(); }

    const Rat& at_day(long day) const {
        if (!has_day(day)) throw error("PriceSeries: no price for day " + std::to_string(day));
        return prices_[(std::size_t)(day - first_day_)];
    }

    const Rat& back() const { return prices_.back(); }
    const std::vector<Rat>& prices() const { return prices_; }

    void push_back(Rat p) { prices_.push_back(std::move(p)); }

    bool operator==(const PriceSeries& o) const {
        return first_day_ == o.first_day_ && prices_ == o.prices_;
    }

private:
    std::vector<Rat> prices_;
    long first_day_;
};

} // namespace mkt
