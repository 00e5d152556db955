#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "marketpred/linear_bridge.hpp"
#include "marketpred/rng.hpp"

namespace mkt {

// ---------------------------------------------------------------------------
// Exact conditional prediction by weighted enumeration
// ---------------------------------------------------------------------------

/// Conditional next-day movement distribution, exact rationals summing to 1.
struct Prediction {
    Rat p_up, p_down, p_same;
};

struct EnumerationCaps {
    /// Search nodes for the 0-1 backtracking enumerator.  Replaces a raw
    /// 2^h cap: with constraint propagation, structured systems far wider
    /// than 25 columns stay cheap, so the budget is on explored nodes.
    std::uint64_t node_budget = 1ull << 26;
    /// Maximum number of count-compositions of m into h parts.
    std::uint64_t composition_cap = 10'000'000;
};

namespace detail {

/// Backtracking enumerator for 0-1 solutions of {Ax > 0, Bx = b} with
/// coefficients in {-1,0,+1}, with interval propagation per row.
class ZeroOneEnumerator {
public:
    ZeroOneEnumerator(const LinearSystem& sys, std::uint64_t node_budget)
        : n_(sys.columns), budget_(node_budget) {
        sys.validate_system();
        var_rows_.resize(n_);
        auto add_row = [&](const std::vector<int>& coeffs, bool is_eq, long rhs) {
            Row row;
            row.is_eq = is_eq;
            row.rhs = rhs;
            for (std::size_t j = 0; j < coeffs.size(); ++j)
                if (coeffs[j] != 0) row.terms.push_back({j, coeffs[j]});
            std::size_t idx = rows_.size();
            for (auto& t : row.terms) var_rows_[t.var].push_back({idx, t.coeff});
            rows_.push_back(std::move(row));
        };
        for (const auto& r : sys.A) add_row(r, false, 1); // strict > 0 over ints
        for (std::size_t i = 0; i < sys.B.size(); ++i) add_row(sys.B[i], true, sys.b[i]);
        cvec_.assign(n_, 0);
        for (std::size_t j = 0; j < sys.c.size(); ++j) cvec_[j] = sys.c[j];
    }

    struct Tally {
        unsigned long long up = 0, down = 0, same = 0;
        unsigned long long total() const { return up + down + same; }
    };

    Tally count() {
        val_.assign(n_, -1);
        sum_.assign(rows_.size(), 0);
        pos_un_.assign(rows_.size(), 0);
        neg_un_.assign(rows_.size(), 0);
        queued_.assign(rows_.size(), false);
        for (std::size_t r = 0; r < rows_.size(); ++r)
            for (auto& t : rows_[r].terms)
                (t.coeff > 0 ? pos_un_[r] : neg_un_[r])++;
        trail_.clear();
        cdot_ = 0;
        tally_ = Tally{};
        // Initial propagation catches rows that are unsatisfiable outright.
        queue_.clear();
        for (std::size_t r = 0; r < rows_.size(); ++r) enqueue(r);
        if (propagate()) dfs(0);
        return tally_;
    }

private:
    struct Term {
        std::size_t var;
        int coeff;
    };
    struct Row {
        std::vector<Term> terms;
        bool is_eq;
        long rhs;
    };

    void enqueue(std::size_t r) {
        if (!queued_[r]) {
            queued_[r] = true;
            queue_.push_back(r);
        }
    }

    // Returns false on contradiction.
    bool assign(std::size_t var, int v) {
        val_[var] = v;
        trail_.push_back(var);
        cdot_ += v * cvec_[var];
        for (auto& [r, coeff] : var_rows_[var]) {
            if (v == 1) sum_[r] += coeff;
            (coeff > 0 ? pos_un_[r] : neg_un_[r])--;
            enqueue(r);
        }
        return true;
    }

    bool propagate() {
        while (!queue_.empty()) {
            std::size_t r = queue_.back();
            queue_.pop_back();
            queued_[r] = false;
            const Row& row = rows_[r];
            long lo = sum_[r] - neg_un_[r];
            long hi = sum_[r] + pos_un_[r];
            if (row.is_eq) {
                if (row.rhs < lo || row.rhs > hi) return false;
                if (lo == hi) continue;
                if (row.rhs == hi) {
                    for (auto& t : row.terms)
                        if (val_[t.var] < 0 && !assign(t.var, t.coeff > 0 ? 1 : 0))
                            return false;
                } else if (row.rhs == lo) {
                    for (auto& t : row.terms)
                        if (val_[t.var] < 0 && !assign(t.var, t.coeff > 0 ? 0 : 1))
                            return false;
                }
            } else {
                if (hi < row.rhs) return false;
                if (lo >= row.rhs || lo == hi) continue;
                if (hi == row.rhs) {
                    for (auto& t : row.terms)
                        if (val_[t.var] < 0 && !assign(t.var, t.coeff > 0 ? 1 : 0))
                            return false;
                }
            }
        }
        return true;
    }

    void undo(std::size_t mark) {
        while (trail_.size() > mark) {
            std::size_t var = trail_.back();
            trail_.pop_back();
            int v = val_[var];
            val_[var] = -1;
            cdot_ -= v * cvec_[var];
            for (auto& [r, coeff] : var_rows_[var]) {
                if (v == 1) sum_[r] -= coeff;
                (coeff > 0 ? pos_un_[r] : neg_un_[r])++;
            }
        }
        for (std::size_t r : queue_) queued_[r] = false;
        queue_.clear();
    }

    void dfs(std::size_t hint) {
        if (budget_ == 0)
            throw cap_exceeded_error("exact enumeration: node budget exhausted");
        --budget_;
        std::size_t var = hint;
        while (var < n_ && val_[var] >= 0) ++var;
        if (var == n_) {
            if (cdot_ > 0) ++tally_.up;
            else if (cdot_ < 0) ++tally_.down;
            else ++tally_.same;
            return;
        }
        for (int v = 0; v <= 1; ++v) {
            std::size_t mark = trail_.size();
            if (assign(var, v) && propagate()) dfs(var + 1);
            undo(mark);
        }
    }

    std::size_t n_;
    std::uint64_t budget_;
    std::vector<Row> rows_;
    std::vector<std::vector<std::pair<std::size_t, int>>> var_rows_;
    std::vector<int> cvec_;

    std::vector<signed char> val_;
    std::vector<long> sum_;
    std::vector<int> pos_un_, neg_un_;
    std::vector<bool> queued_;
    std::vector<std::size_t> queue_;
    std::vector<std::size_t> trail_;
    long cdot_ = 0;
    Tally tally_;
};

inline Int binomial_int(long n, long k) {
    if (k < 0 || k > n) return 0;
    Int r = 1;
    for (long i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;
    }
    return r;
}

} // namespace detail

/// Enumerates every population assignment with its probability weight,
/// keeps those consistent with the history (via the linear-constraint
/// extraction for the model's rule), and returns the conditional
/// distribution of the sign of the target-day net order flow.
inline Prediction predict_exact(const MarketModel& model, const PriceSeries& history,
                                const std::vector<int>& target_actions,
                                const EnumerationCaps& caps = {}) {
    model.validate_model();
    if (target_actions.size() != model.h())
        throw error("predict_exact: target row width mismatch");
    auto [sys, prov] = model.rule == IncrementRule::FI
                           ? fi_market_to_system(model, history)
                           : pi_market_to_system(model, history);
    sys.c = target_actions;

    if (std::holds_alternative<BernoulliSubset>(model.population)) {
        detail::ZeroOneEnumerator en(sys, caps.node_budget);
        auto tally = en.count();
        if (tally.total() == 0)
            throw probability_zero_error("history infeasible: no population reproduces it");
        Rat total(tally.total());
        return Prediction{Rat(tally.up) / total, Rat(tally.down) / total,
                          Rat(tally.same) / total};
    }

    const auto& mu = std::get<MultinomialDist>(model.population);
    std::size_t h = model.h();
    long m = model.m;
    Int comps = detail::binomial_int(m + (long)h - 1, (long)h - 1);
    if (comps > Int(caps.composition_cap))
        throw cap_exceeded_error("predict_exact: composition count exceeds cap");

    Int m_fact = 1;
    for (long i = 2; i <= m; ++i) m_fact *= i;
    std::vector<long> x(h, 0);
    Rat w_up = 0, w_down = 0, w_same = 0, w_total = 0;

    auto satisfied = [&]() {
        for (const auto& row : sys.A) {
            long s = 0;
            for (std::size_t j = 0; j < h; ++j) s += row[j] * x[j];
            if (s <= 0) return false;
        }
        for (std::size_t r = 0; r < sys.B.size(); ++r) {
            long s = 0;
            for (std::size_t j = 0; j < h; ++j) s += sys.B[r][j] * x[j];
            if (s != sys.b[r]) return false;
        }
        return true;
    };

    // weight = m! * prod p_i^{x_i} / x_i!
    auto recurse = [&](auto&& self, std::size_t i, long rem, Rat w) -> void {
        if (i + 1 == h) {
            x[i] = rem;
            Rat leaf = w;
            for (long v = 0; v < rem; ++v) leaf *= mu.p[i] / (v + 1);
            if (!satisfied()) return;
            w_total += leaf;
            long net = 0;
            for (std::size_t j = 0; j < h; ++j) net += target_actions[j] * x[j];
            if (net > 0) w_up += leaf;
            else if (net < 0) w_down += leaf;
            else w_same += leaf;
            return;
        }
        Rat wi = w;
        for (long v = 0; v <= rem; ++v) {
            x[i] = v;
            self(self, i + 1, rem - v, wi);
            wi *= mu.p[i] / (v + 1);
        }
        x[i] = 0;
    };
    recurse(recurse, 0, m, Rat(m_fact));

    if (w_total == 0)
        throw probability_zero_error("history infeasible: conditioning event has probability zero");
    return Prediction{w_up / w_total, w_down / w_total, w_same / w_total};
}

// ---------------------------------------------------------------------------
// Decision problems
// ---------------------------------------------------------------------------

enum class BoundedVerdict { UpLikely, DownNotUp, Indeterminate };

/// Promise decision problem: rise probability > 2/3 or < 1/3.  Real
/// inputs may violate the promise; that is surfaced, not guessed away.
inline BoundedVerdict decide_bounded(const MarketModel& model, const PriceSeries& history,
                                     const EnumerationCaps& caps = {}) {
    Prediction p = predict_exact(model, history, next_day_actions(model, history), caps);
    if (p.p_up > Rat(2, 3)) return BoundedVerdict::UpLikely;
    if (p.p_up < Rat(1, 3)) return BoundedVerdict::DownNotUp;
    return BoundedVerdict::Indeterminate;
}

/// Strict comparison against 1/2, exact rational arithmetic, no tolerance.
inline bool decide_unbounded(const MarketModel& model, const PriceSeries& history,
                             const EnumerationCaps& caps = {}) {
    Prediction p = predict_exact(model, history, next_day_actions(model, history), caps);
    return p.p_up > Rat(1, 2);
}

// ---------------------------------------------------------------------------
// Many-traders limit predictor
// ---------------------------------------------------------------------------

/// Covariance of a single trader's (indicator) strategy choice,
/// restricted to the first h-1 coordinates: C_ii = p_i - p_i^2,
/// C_ij = -p_i p_j.  Positive definite whenever all p_i > 0.
inline std::vector<std::vector<Rat>> gaussian_covariance(const std::vector<Rat>& p) {
    if (p.size() < 2) throw error("gaussian_covariance: need h >= 2");
    Rat sum = 0;
    for (const auto& pi : p) {
        if (sgn(pi) <= 0) throw error("gaussian_covariance: p_i must be > 0");
        sum += pi;
    }
    if (sum != 1) throw error("gaussian_covariance: p must sum to 1");
    std::size_t d = p.size() - 1;
    std::vector<std::vector<Rat>> C(d, std::vector<Rat>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            C[i][j] = i == j ? Rat(p[i] - p[i] * p[i]) : Rat(-p[i] * p[j]);
    return C;
}

/// Exact positive-definiteness via rational Cholesky-style elimination.
inline bool is_positive_definite(std::vector<std::vector<Rat>> M) {
    std::size_t d = M.size();
    for (std::size_t k = 0; k < d; ++k) {
        if (sgn(M[k][k]) <= 0) return false;
        for (std::size_t i = k + 1; i < d; ++i)
            for (std::size_t j = k + 1; j < d; ++j)
                M[i][j] -= M[i][k] * M[k][j] / M[k][k];
    }
    return true;
}

struct LimitClassification {
    enum class Verdict { HistoryLimitInfeasible, AlwaysUp, AlwaysDown, Ratio };
    Verdict verdict;
    // Populated only for Ratio:
    std::vector<std::vector<int>> D; // reduced retained constraints
    std::vector<int> c_prime;
    std::vector<std::vector<Rat>> covariance;
};

/// Limit constraint triage, all sign tests in exact rationals:
/// nonzero equations or A_i p < 0 kill the history in the limit,
/// A_i p > 0 rows are vacuous, A_i p = 0 rows survive (reduced to h-1
/// coordinates), and c p decides between the degenerate verdicts and the
/// cone-measure ratio.
inline LimitClassification classify_limit_constraints(const LinearSystem& sys,
                                                      const std::vector<Rat>& p) {
    sys.validate_system();
    if (p.size() != sys.columns)
        throw error("classify_limit_constraints: p width mismatch");
    std::size_t h = sys.columns;

    for (const auto& row : sys.B)
        for (int v : row)
            if (v != 0)
                return {LimitClassification::Verdict::HistoryLimitInfeasible, {}, {}, {}};

    auto reduce = [&](const std::vector<int>& row) {
        std::vector<int> out(h - 1);
        for (std::size_t j = 0; j + 1 < h; ++j) out[j] = row[j] - row[h - 1];
        return out;
    };

    std::vector<std::vector<int>> D;
    for (const auto& row : sys.A) {
        Rat dot = 0;
        for (std::size_t j = 0; j < h; ++j) dot += row[j] * p[j];
        int s = sgn(dot);
        if (s < 0)
            return {LimitClassification::Verdict::HistoryLimitInfeasible, {}, {}, {}};
        if (s == 0 && h >= 2) D.push_back(reduce(row));
        if (s == 0 && h == 1) D.push_back({}); // zero-width row: empty cone
    }

    Rat cdot = 0;
    for (std::size_t j = 0; j < h; ++j) cdot += sys.c[j] * p[j];
    int cs = sgn(cdot);
    if (cs > 0) return {LimitClassification::Verdict::AlwaysUp, {}, {}, {}};
    if (cs < 0) return {LimitClassification::Verdict::AlwaysDown, {}, {}, {}};

    LimitClassification out;
    out.verdict = LimitClassification::Verdict::Ratio;
    out.D = std::move(D);
    out.c_prime = h >= 2 ? reduce(sys.c) : std::vector<int>{};
    if (h >= 2) out.covariance = gaussian_covariance(p);
    return out;
}

struct ConeRatioOptions {
    double denom_floor = 1e-3;          // minimum acceptable denominator estimate
    std::uint64_t pilot_samples = 1 << 16;
    std::uint64_t max_samples = 1ull << 27;
};

struct ConeRatioEstimate {
    double value = 0;
    double half_width = 0;
    double denom_estimate = 0;
    std::uint64_t samples = 0;
};

/// Monte Carlo estimate of Pr[DY > 0 and c'Y > 0] / Pr[DY > 0] for
/// zero-mean Gaussian Y with covariance C.  The limiting density is
/// exactly Gaussian, so factorized sampling (Cholesky transform of iid
/// normals) is unbiased; the sample count comes from a Hoeffding bound
/// calibrated on a pilot run so the relative error is <= epsilon with
/// probability >= 1 - eta whenever the denominator clears the floor.
inline ConeRatioEstimate
estimate_cone_ratio(const std::vector<std::vector<int>>& D, const std::vector<int>& c_prime,
                    const std::vector<std::vector<Rat>>& covariance, double epsilon,
                    double eta, std::uint64_t seed, const ConeRatioOptions& opts = {}) {
    if (!(epsilon > 0 && epsilon < 1 && eta > 0 && eta < 1))
        throw error("estimate_cone_ratio: epsilon and eta must be in (0,1)");
    std::size_t d = covariance.size();
    for (const auto& row : D)
        if (row.size() != d) throw error("estimate_cone_ratio: D width mismatch");
    if (c_prime.size() != d) throw error("estimate_cone_ratio: c' width mismatch");

    if (d == 0) {
        if (!D.empty())
            throw cone_measure_error("conditioning cone has vanishing measure");
        return {0.0, 0.0, 1.0, 0}; // empty c' never exceeds 0
    }

    // Cholesky factor of the covariance.
    std::vector<std::vector<double>> L(d, std::vector<double>(d, 0.0));
    {
        std::vector<std::vector<double>> C(d, std::vector<double>(d));
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = 0; j < d; ++j) C[i][j] = to_double(covariance[i][j]);
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                double s = C[i][j];
                for (std::size_t k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
                if (i == j) {
                    if (s <= 0) throw error("estimate_cone_ratio: covariance not positive definite");
                    L[i][i] = std::sqrt(s);
                } else {
                    L[i][j] = s / L[j][j];
                }
            }
        }
    }

    Rng rng(seed);
    std::vector<double> z(d), y(d);
    std::uint64_t in_cone = 0, in_both = 0, drawn = 0;
    auto draw = [&]() {
        for (std::size_t i = 0; i < d; ++i) z[i] = rng.next_gaussian();
        for (std::size_t i = 0; i < d; ++i) {
            double s = 0;
            for (std::size_t k = 0; k <= i; ++k) s += L[i][k] * z[k];
            y[i] = s;
        }
        for (const auto& row : D) {
            double s = 0;
            for (std::size_t j = 0; j < d; ++j) s += row[j] * y[j];
            if (!(s > 0)) { ++drawn; return; }
        }
        ++in_cone;
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += c_prime[j] * y[j];
        if (s > 0) ++in_both;
        ++drawn;
    };

    std::uint64_t pilot = std::min(opts.pilot_samples, opts.max_samples);
    while (drawn < pilot) draw();
    double pd0 = (double)in_cone / (double)drawn;
    if (pd0 < opts.denom_floor)
        throw cone_measure_error("conditioning cone has vanishing measure "
                                 "(denominator estimate below floor)");
    double r0 = in_cone ? (double)in_both / (double)in_cone : 0.0;
    double delta = epsilon * std::max(r0, 0.05) * pd0 / (2.0 * (1.0 + r0));
    double need = std::log(4.0 / eta) / (2.0 * delta * delta);
    std::uint64_t total = drawn;
    if (need > (double)total)
        total = need > (double)opts.max_samples ? opts.max_samples : (std::uint64_t)need;
    while (drawn < total) draw();

    double pd = (double)in_cone / (double)drawn;
    if (pd < opts.denom_floor)
        throw cone_measure_error("conditioning cone has vanishing measure "
                                 "(denominator estimate below floor)");
    ConeRatioEstimate est;
    est.value = (double)in_both / (double)in_cone;
    double delta_achieved = std::sqrt(std::log(4.0 / eta) / (2.0 * (double)drawn));
    est.half_width = delta_achieved * (1.0 + est.value) / pd;
    est.denom_estimate = pd;
    est.samples = drawn;
    return est;
}

struct LimitPrediction {
    enum class Kind { AlwaysUp, AlwaysDown, Estimated };
    Kind kind;
    double p_up = 0;
    double half_width = 0;
};

/// lim_{m -> infinity} Pr_m[next day up | history] for an FI market with
/// a fixed multinomial strategy distribution: extraction, constraint
/// triage, then either a degenerate 0/1 verdict or the cone-measure ratio.
inline LimitPrediction predict_limit(const MarketModel& model, const PriceSeries& history,
                                     double epsilon, double eta, std::uint64_t seed,
                                     const ConeRatioOptions& opts = {}) {
    model.validate_model();
    const auto* mu = std::get_if<MultinomialDist>(&model.population);
    if (!mu) throw error("predict_limit: model must use a multinomial population");
    auto [sys, prov] = fi_market_to_system(model, history);
    LimitClassification cls = classify_limit_constraints(sys, mu->p);
    using V = LimitClassification::Verdict;
    switch (cls.verdict) {
        case V::HistoryLimitInfeasible:
            throw limit_infeasible_error(
                "history has probability zero in the many-traders limit");
        case V::AlwaysUp:
            return {LimitPrediction::Kind::AlwaysUp, 1.0, 0.0};
        case V::AlwaysDown:
            return {LimitPrediction::Kind::AlwaysDown, 0.0, 0.0};
        case V::Ratio: {
            ConeRatioEstimate est = estimate_cone_ratio(cls.D, cls.c_prime,
                                                        cls.covariance, epsilon, eta,
                                                        seed, opts);
            return {LimitPrediction::Kind::Estimated, est.value, est.half_width};
        }
    }
    throw error("unreachable");
}

} // namespace mkt
