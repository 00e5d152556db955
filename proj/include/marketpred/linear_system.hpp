#pragma once

#include <cstddef>
#include <vector>

#include "marketpred/errors.hpp"

namespace mkt {

enum class Movement { Up, Down, Flat };

/// Strict-inequality rows Ax > 0, equation rows Bx = b, and a target row
/// c, all with coefficients in {-1, 0, +1} over `columns` population
/// variables.
struct LinearSystem {
    std::size_t columns = 0;
    std::vector<std::vector<int>> A;
    std::vector<std::vector<int>> B;
    std::vector<long> b; // right-hand sides for B (all zero in the FI case)
    std::vector<int> c;

    std::size_t beta() const { return A.size() + B.size(); }

    void validate_system() const {
        auto check_row = [&](const std::vector<int>& row) {
            if (row.size() != columns) throw error("LinearSystem: row width mismatch");
            for (int v : row)
                if (v < -1 || v > 1)
                    throw error("LinearSystem: coefficient outside {-1,0,+1}");
        };
        for (const auto& row : A) check_row(row);
        for (const auto& row : B) check_row(row);
        if (!c.empty()) check_row(c);
        if (b.size() != B.size()) throw error("LinearSystem: |b| must equal |rows(B)|");
    }
};

/// Maps each constraint row back to the price-history day it came from.
struct DayProvenance {
    struct Entry {
        long day;
        Movement move;
        std::size_t row; // index within A (Up/Down) or B (Flat)
    };
    std::vector<Entry> entries; // one per post-initial day, in day order
};

} // namespace mkt
