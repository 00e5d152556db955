#pragma once

#include <stdexcept>
#include <string>

namespace mkt {

/// Base class for all library errors.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A price history that cannot have been produced by the stated model
/// (FI step outside {-alpha, 0, +alpha}, or a PI change that is not an
/// integer multiple of alpha).  Carries the offending day.
struct infeasible_history_error : error {
    long day;
    infeasible_history_error(long d, const std::string& what)
        : error(what), day(d) {}
};

/// The conditioning event has probability zero under the model.
struct probability_zero_error : error {
    using error::error;
};

/// An enumeration budget (subset count, composition count, or search
/// nodes) was exhausted.
struct cap_exceeded_error : error {
    using error::error;
};

/// Netlist or file-format parse failure; line is 1-based, 0 if unknown.
struct parse_error : error {
    long line;
    parse_error(long l, const std::string& what) : error(what), line(l) {}
};

/// The limit predictor's hypothesis fails: the history has probability
/// zero in the many-traders limit.
struct limit_infeasible_error : error {
    using error::error;
};

/// The conditioning cone captured too few Monte Carlo samples to report
/// a ratio with the requested guarantee.
struct cone_measure_error : error {
    using error::error;
};

} // namespace mkt
