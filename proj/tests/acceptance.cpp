// Acceptance gate: one pass/fail line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include "marketpred/circuit.hpp"
#include "marketpred/dsmc.hpp"
#include "marketpred/io.hpp"
#include "marketpred/predictors.hpp"
#include "support/enumerate.hpp"

using namespace mkt;

namespace {

int failures = 0;

void report(int idx, const std::string& name, bool ok, const std::string& detail = "") {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << "criterion " << idx << ": " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!ok) ++failures;
}

template <class F>
void criterion(int idx, const std::string& name, F&& f) {
    try {
        auto [ok, detail] = f();
        report(idx, name, ok, detail);
    } catch (const std::exception& e) {
        report(idx, name, false, std::string("exception: ") + e.what());
    }
}

using Result = std::pair<bool, std::string>;

// 1. Inequality-encoding structural counts over random circuits.
Result structural_counts() {
    std::mt19937_64 g(101);
    for (int iter = 0; iter < 200; ++iter) {
        int n = 1 + (int)(g() % 10), m = 1 + (int)(g() % 20);
        NorCircuit c = oracle::random_circuit(g, n, m);
        CircuitInequalities enc = circuit_to_inequalities(c);
        if (enc.A.size() != (std::size_t)(3 * m + 2))
            return {false, "row count mismatch"};
        for (const auto& row : enc.A)
            if (row.size() != (std::size_t)(n + m + 2))
                return {false, "column count mismatch"};
        if (enc.c.size() != (std::size_t)(n + m + 2))
            return {false, "target width mismatch"};
    }
    return {true, "200 circuits, 3m+2 rows, n+m+2 columns"};
}

// 2. Inequality-encoding semantics by exhaustive 0-1 enumeration.
Result encoding_semantics() {
    std::mt19937_64 g(202);
    for (int iter = 0; iter < 50; ++iter) {
        int n = 1 + (int)(g() % 6), m = 1 + (int)(g() % 12);
        NorCircuit c = oracle::random_circuit(g, n, m);
        CircuitInequalities enc = circuit_to_inequalities(c);
        std::size_t cols = (std::size_t)(n + m + 2);
        LinearSystem sys;
        sys.columns = cols;
        sys.A = enc.A;
        sys.c = enc.c;
        auto sols = oracle::collect_01_solutions(cols, oracle::rows_of(sys));
        if (sols.size() != (1ull << n)) return {false, "extension count mismatch"};
        std::vector<int> seen(1u << n, 0);
        for (const auto& x : sols) {
            long v = 0;
            for (int i = 0; i < n; ++i) v |= (long)x[(std::size_t)i] << i;
            ++seen[(std::size_t)v];
            std::vector<int> bits(x.begin(), x.begin() + n);
            long cx = 0;
            for (std::size_t j = 0; j < cols; ++j) cx += enc.c[j] * x[j];
            if ((cx > 0) != (eval_circuit(c, bits) == 1))
                return {false, "target sign disagrees with circuit output"};
        }
        for (int s : seen)
            if (s != 1) return {false, "extension not unique"};
    }
    return {true, "50 circuits, unique extensions, cx>0 iff output 1"};
}

// 3. Slack transformation: counts, solution counts, x-projections.
Result slack_transformation() {
    std::mt19937_64 g(303);
    for (int iter = 0; iter < 50; ++iter) {
        std::size_t m = 1 + g() % 3, n = 3 + g() % 3;
        auto A = oracle::random_ineq_matrix(g, m, n);
        SlackEquations eq = inequalities_to_equations(A);
        std::size_t rows = m * n - m + 1, vars = 2 * m * n - 3 * m + n + 1;
        if (eq.B.size() != rows || eq.B.front().size() != vars)
            return {false, "shape mismatch"};

        // inequality side
        LinearSystem ineq;
        ineq.columns = n;
        ineq.A = A;
        auto xs = oracle::collect_01_solutions(n, oracle::rows_of(ineq));

        std::uint64_t eq_total = 0;
        std::vector<std::vector<int>> eq_xs;
        if (vars <= 22) {
            // full double enumeration
            LinearSystem eqsys;
            eqsys.columns = vars;
            eqsys.B = eq.B;
            eqsys.b.assign(rows, 1);
            auto ys = oracle::collect_01_solutions(vars, oracle::rows_of(eqsys));
            eq_total = ys.size();
            for (const auto& y : ys)
                eq_xs.emplace_back(y.begin(), y.begin() + (long)n);
        } else {
            // per-row slack blocks are disjoint given (x, u=1); count each
            // block exhaustively and multiply
            for (std::uint64_t v = 0; v < (1ull << n); ++v) {
                std::vector<int> x(n);
                for (std::size_t j = 0; j < n; ++j) x[j] = (int)((v >> j) & 1);
                std::uint64_t product = 1;
                for (std::size_t i = 0; i < m && product; ++i) {
                    long ax = 0;
                    for (std::size_t j = 0; j < n; ++j) ax += A[i][j] * x[j];
                    std::uint64_t cnt = 0;
                    for (std::uint64_t sv = 0; sv < (1ull << (n - 1)); ++sv) {
                        for (std::uint64_t tv = 0; tv < (1ull << (n - 2)); ++tv) {
                            long ssum = 0;
                            bool ok = true;
                            for (std::size_t j = 0; j + 1 < n; ++j)
                                ssum += (long)((sv >> j) & 1);
                            if (ax - ssum != 1) continue;
                            for (std::size_t j = 0; j + 2 < n && ok; ++j) {
                                long s0 = (long)((sv >> j) & 1);
                                long s1 = (long)((sv >> (j + 1)) & 1);
                                long t0 = (long)((tv >> j) & 1);
                                if (s0 - s1 - t0 + 1 != 1) ok = false;
                            }
                            if (ok) ++cnt;
                        }
                    }
                    product *= cnt;
                }
                if (product > 1) return {false, "completion not unique"};
                eq_total += product;
                if (product) eq_xs.push_back(x);
            }
        }
        if (eq_total != xs.size()) return {false, "solution count mismatch"};
        std::sort(xs.begin(), xs.end());
        std::sort(eq_xs.begin(), eq_xs.end());
        if (xs != eq_xs) return {false, "x-projection mismatch"};
    }
    return {true, "50 systems, counts and projections agree"};
}

// 4. Compiled-market conditional probability equals circuit statistics.
Result reduction_identity() {
    std::mt19937_64 g(404);
    for (int iter = 0; iter < 30; ++iter) {
        int n = 2 + (int)(g() % 7); // up to 8 inputs
        NorCircuit c_out = oracle::random_circuit(g, n, 1 + (int)(g() % 5));
        NorCircuit c_cond = oracle::random_circuit(g, n, 1 + (int)(g() % 5));
        long accepted = 0, both = 0;
        for (long v = 0; v < (1L << n); ++v) {
            std::vector<int> bits(n);
            for (int i = 0; i < n; ++i) bits[(std::size_t)i] = (int)((v >> i) & 1);
            if (eval_circuit(c_cond, bits) != 1) continue;
            ++accepted;
            if (eval_circuit(c_out, bits) == 1) ++both;
        }
        if (accepted == 0) {
            --iter; // unsatisfiable condition: not a test of the identity
            continue;
        }
        Rat expected(both, accepted);
        CompiledMarket fi = compile_market(c_out, c_cond, IncrementRule::FI);
        Prediction pf = predict_exact(fi.market, fi.history,
                                      next_day_actions(fi.market, fi.history));
        CompiledMarket pi = compile_market(c_out, c_cond, IncrementRule::PI);
        Prediction pp = predict_exact(pi.market, pi.history,
                                      next_day_actions(pi.market, pi.history));
        if (pf.p_up != expected) return {false, "FI probability mismatch"};
        if (pp.p_up != expected) return {false, "PI probability mismatch"};
        if (pf.p_down != 0 || pp.p_down != 0) return {false, "unexpected down mass"};
        if (pf.p_same != pp.p_same) return {false, "FI/PI disagreement"};
    }
    return {true, "30 circuit pairs, FI and PI match exact circuit ratios"};
}

// 5. Limit predictor vs finite-m empirical truth.
Result limit_vs_finite() {
    MarketModel m;
    m.m = 10000;
    m.alpha = 1;
    m.rule = IncrementRule::FI;
    m.strategies = {Passive{{1, -1, 1}}, Passive{{-1, 1, -1}}, Passive{{-1, 1, -1}}};
    MultinomialDist mu{{Rat(1, 2), Rat(1, 3), Rat(1, 6)}};
    m.population = mu;
    PriceSeries history({100, 101, 100});
    // both day rows are (1,-1,-1) after orientation; A_i p = 1/2-1/3-1/6 = 0

    LimitPrediction lp = predict_limit(m, history, 0.01, 0.01, 555);
    if (lp.kind != LimitPrediction::Kind::Estimated)
        return {false, "expected an estimated ratio"};

    std::uint64_t accepted = 0, up = 0;
    const std::uint64_t trials = 100000;
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
        PopulationCounts c = sample_population(m.population, 3, m.m, seed);
        long day1 = c.counts[0] - c.counts[1] - c.counts[2];
        long day2 = -day1;
        if (!(day1 > 0 && day2 < 0)) continue;
        ++accepted;
        long day3 = c.counts[0] - c.counts[1] - c.counts[2];
        if (day3 > 0) ++up;
    }
    if (accepted == 0) return {false, "no samples matched the history"};
    double empirical = (double)up / (double)accepted;
    double diff = std::abs(empirical - lp.p_up);
    std::ostringstream detail;
    detail << "limit " << lp.p_up << ", empirical " << empirical << " over " << accepted
           << " conditioned samples, diff " << diff;
    return {diff <= 0.02, detail.str()};
}

// 6. Cone-ratio estimate against the bivariate orthant formula.
Result cone_ratio_analytic() {
    auto C = gaussian_covariance({Rat(1, 3), Rat(1, 3), Rat(1, 3)});
    ConeRatioEstimate est =
        estimate_cone_ratio({{1, 0}}, {0, 1}, C, 0.005, 0.01, 666);
    // corr(u, v) = -1/2; Pr[u>0, v>0] = 1/4 + asin(corr)/(2 pi)
    double corr = -0.5;
    double expected = (0.25 + std::asin(corr) / (2 * M_PI)) / 0.5;
    double diff = std::abs(est.value - expected);
    std::ostringstream detail;
    detail << "estimate " << est.value << " vs " << expected << ", diff " << diff
           << ", " << est.samples << " samples";
    return {diff <= 0.005, detail.str()};
}

// 7. Basic-model reproduction and re-expression in the general model.
Result dsmc_reproduction() {
    DsmcParams p;
    p.m = 20;
    p.k = 2;
    p.L = 8;
    p.alpha = Rat(1, 4);
    p.days = 250;
    p.initial_prices = {80, Rat(323, 4), 81};
    p.seed = 1;

    auto t0 = std::chrono::steady_clock::now();
    DsmcResult a = simulate_dsmc(p);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
    DsmcResult b = simulate_dsmc(p);
    if (!(a.series == b.series)) return {false, "not deterministic"};
    if (elapsed >= 1000) return {false, "too slow"};
    for (long day = a.first_trading_day; day <= a.series.last_day(); ++day) {
        Rat ratio = (a.series.at_day(day) - a.series.at_day(day - 1)) / p.alpha;
        if (rat_den(ratio) != 1 || ratio > 20 || ratio < -20)
            return {false, "price step outside alpha grid"};
    }
    MarketModel model = dsmc_as_model(p, a.traders);
    PopulationCounts ones{std::vector<long>(a.traders.size(), 1)};
    PriceSeries replay =
        simulate_as(model, ones, PriceSeries(p.initial_prices, 1), p.days);
    if (!(replay == a.series)) return {false, "general-model replay differs"};

    SummaryStats st = summary_stats(a.series);
    std::ostringstream detail;
    detail << elapsed << " ms; mean " << st.mean_change << ", sd " << st.stddev_change
           << ", lag1 " << st.lag1_autocorrelation << ", drawup " << st.max_drawup
           << ", drawdown " << st.max_drawdown << ", run " << st.longest_monotone_run;
    return {true, detail.str()};
}

// 8. Bridge round trips preserve 0-1 solution sets.
Result bridge_round_trips() {
    std::mt19937_64 g(808);
    for (int iter = 0; iter < 100; ++iter) {
        std::size_t h = 2 + g() % 11; // up to 12 columns
        bool fi = iter % 2 == 0;
        std::size_t beta = 1 + g() % 10;
        std::size_t rows_a = fi ? beta / 2 : 0;
        std::size_t rows_b = beta - rows_a;
        LinearSystem sys = oracle::random_system(g, h, rows_a, rows_b, fi);
        auto original = oracle::collect_01_solutions(h, oracle::rows_of(sys));
        LinearSystem back;
        if (fi) {
            auto [model, history, prov] = system_to_fi_market(sys);
            back = fi_market_to_system(model, history).first;
        } else {
            auto [model, history, prov] = system_to_pi_market(sys.B, sys.b, sys.c);
            back = pi_market_to_system(model, history).first;
        }
        auto rebuilt = oracle::collect_01_solutions(h, oracle::rows_of(back));
        if (original != rebuilt) return {false, "solution set changed"};
    }
    return {true, "100 systems under both rules"};
}

// 9. Trader-count embedding preserves exact conditional predictions.
Result embedding_identity() {
    std::mt19937_64 g(909);
    for (int iter = 0; iter < 10; ++iter) {
        std::size_t h = 2 + g() % 3;   // up to 4 strategies
        long m0 = 2 + (long)(g() % 5); // up to 6 traders
        MarketModel model;
        model.m = m0;
        model.alpha = 1;
        model.rule = IncrementRule::PI;
        MultinomialDist mu;
        Rat total = 0;
        std::vector<long> weights(h);
        for (auto& w : weights) w = 1 + (long)(g() % 5);
        for (long w : weights) total += w;
        for (long w : weights) mu.p.push_back(Rat(w) / total);
        std::uniform_int_distribution<int> act(-1, 1);
        for (std::size_t i = 0; i < h; ++i) {
            Passive t;
            for (int d = 0; d < 4; ++d) t.actions.push_back(act(g));
            model.strategies.push_back(std::move(t));
        }
        model.population = mu;

        // a history generated by a sampled population is always feasible
        PopulationCounts counts = sample_population(model.population, h, m0, g());
        PriceSeries history = simulate_as(model, counts, PriceSeries({100}), 3);

        Prediction orig =
            predict_exact(model, history, next_day_actions(model, history));
        long m_new = m0 + (long)(g() % 4);
        auto [em, eh] = embed_pi_fixed_m(model, history, m_new);
        Prediction emb = predict_exact(em, eh, next_day_actions(em, eh));
        if (orig.p_up != emb.p_up || orig.p_down != emb.p_down ||
            orig.p_same != emb.p_same)
            return {false, "prediction changed under embedding"};
    }
    return {true, "10 markets, m0 through m0+3"};
}

} // namespace

int main() {
    criterion(1, "inequality encoding structural counts", structural_counts);
    criterion(2, "inequality encoding semantics", encoding_semantics);
    criterion(3, "slack transformation bijection", slack_transformation);
    criterion(4, "end-to-end reduction identity", reduction_identity);
    criterion(5, "limit predictor vs finite-m truth", limit_vs_finite);
    criterion(6, "cone-ratio analytic check", cone_ratio_analytic);
    criterion(7, "basic-model reproduction", dsmc_reproduction);
    criterion(8, "bridge round trips", bridge_round_trips);
    criterion(9, "embedding preserves predictions", embedding_identity);
    return failures == 0 ? 0 : 1;
}
