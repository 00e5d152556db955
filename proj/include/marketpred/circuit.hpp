#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "marketpred/predictors.hpp"

namespace mkt {

/// An n-input netlist of 2-input NOR gates.  Operand references use the
/// shared variable numbering: 1..n are inputs, n+k is gate k; gates may
/// only reference inputs and earlier gates, so the netlist is acyclic by
/// construction.  The last gate is the output.
struct NorCircuit {
    int n = 0;
    struct Gate {
        int a, b; // operand variable indices
    };
    std::vector<Gate> gates;

    int gate_count() const { return (int)gates.size(); }

    void validate_circuit() const {
        if (n < 1) throw error("circuit: need at least one input");
        if (gates.empty()) throw error("circuit: need at least one gate");
        for (std::size_t k = 0; k < gates.size(); ++k) {
            int limit = n + (int)k; // inputs plus earlier gates
            for (int ref : {gates[k].a, gates[k].b})
                if (ref < 1 || ref > limit)
                    throw error("circuit: gate " + std::to_string(k + 1) +
                                " references an unavailable operand");
        }
    }
};

/// Netlist text format: first line `inputs <n>`, then one line per gate,
/// `g<k> = NOR(<ref>, <ref>)` with refs `x<i>` or `g<j>` (j < k), `#`
/// starting a comment.  The final gate is the output.
inline NorCircuit parse_netlist(const std::string& text) {
    NorCircuit circuit;
    std::istringstream in(text);
    std::string raw;
    long lineno = 0;
    bool have_inputs = false;
    auto strip = [](std::string s) {
        if (auto pos = s.find('#'); pos != std::string::npos) s.erase(pos);
        while (!s.empty() && std::isspace((unsigned char)s.front())) s.erase(s.begin());
        while (!s.empty() && std::isspace((unsigned char)s.back())) s.pop_back();
        return s;
    };
    auto fail = [&](const std::string& msg) -> void {
        throw parse_error(lineno, "netlist line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip(raw);
        if (line.empty()) continue;
        if (!have_inputs) {
            std::istringstream ls(line);
            std::string kw;
            long n = -1;
            ls >> kw >> n;
            if (kw != "inputs" || n < 1 || !(ls >> std::ws).eof())
                fail("expected 'inputs <n>'");
            circuit.n = (int)n;
            have_inputs = true;
            continue;
        }
        // g<k> = NOR(<ref>, <ref>)
        std::istringstream ls(line);
        std::string name, eq, rest;
        ls >> name >> eq;
        std::getline(ls, rest);
        rest = strip(rest);
        long k = circuit.gate_count() + 1;
        if (name != "g" + std::to_string(k))
            fail("expected gate 'g" + std::to_string(k) + "', got '" + name + "'");
        if (eq != "=") fail("expected '='");
        if (rest.size() < 6 || rest.compare(0, 4, "NOR(") != 0 || rest.back() != ')')
            fail("expected 'NOR(<ref>, <ref>)'");
        std::string args = rest.substr(4, rest.size() - 5);
        auto comma = args.find(',');
        if (comma == std::string::npos) fail("expected two operands");
        auto parse_ref = [&](std::string ref) -> int {
            ref = strip(ref);
            if (ref.size() < 2) fail("malformed operand '" + ref + "'");
            char kind = ref[0];
            long idx;
            try {
                std::size_t used;
                idx = std::stol(ref.substr(1), &used);
                if (used + 1 != ref.size()) throw std::invalid_argument("");
            } catch (...) {
                fail("malformed operand '" + ref + "'");
                return 0;
            }
            if (kind == 'x') {
                if (idx < 1 || idx > circuit.n)
                    fail("unknown input '" + ref + "'");
                return (int)idx;
            }
            if (kind == 'g') {
                if (idx < 1 || idx >= k)
                    fail("reference to '" + ref + "' before its definition");
                return circuit.n + (int)idx;
            }
            fail("malformed operand '" + ref + "'");
            return 0;
        };
        circuit.gates.push_back(
            {parse_ref(args.substr(0, comma)), parse_ref(args.substr(comma + 1))});
    }
    lineno = 0;
    if (!have_inputs) throw parse_error(0, "netlist: missing 'inputs <n>' header");
    if (circuit.gates.empty()) throw parse_error(0, "netlist: contains zero gates");
    circuit.validate_circuit();
    return circuit;
}

/// Evaluates the circuit; returns the output gate's bit.
inline int eval_circuit(const NorCircuit& circuit, const std::vector<int>& bits) {
    if ((int)bits.size() != circuit.n)
        throw error("eval_circuit: input length mismatch");
    std::vector<int> value(bits);
    value.reserve(circuit.n + circuit.gates.size());
    for (const auto& g : circuit.gates) {
        int a = value[(std::size_t)g.a - 1], b = value[(std::size_t)g.b - 1];
        value.push_back((a | b) ? 0 : 1);
    }
    return value.back();
}

/// Output of the circuit-to-inequalities encoding: Ax > 0 with 3m+2 rows
/// over n+m+2 columns (inputs, gate outputs, two dummies), and c picking
/// the output gate.
struct CircuitInequalities {
    std::vector<std::vector<int>> A;
    std::vector<int> c;
    std::vector<std::string> variable_map;
};

/// Per gate k with operands i, j the three rows
///   -x_i - x_{n+k} + d1 + d2 > 0
///   -x_j - x_{n+k} + d1 + d2 > 0
///    x_i + x_j + x_{n+k}     > 0
/// preceded by the two dummy-forcing rows d1 > 0, d2 > 0; any 0-1 input
/// assignment then has a unique 0-1 extension satisfying the system, and
/// c x = x_{output gate} is positive exactly when the circuit outputs 1.
inline CircuitInequalities circuit_to_inequalities(const NorCircuit& circuit) {
    circuit.validate_circuit();
    int n = circuit.n, m = circuit.gate_count();
    std::size_t cols = (std::size_t)n + m + 2;
    std::size_t d1 = cols - 2, d2 = cols - 1; // 0-based dummy columns
    CircuitInequalities out;
    out.A.reserve(3 * (std::size_t)m + 2);

    std::vector<int> row(cols, 0);
    row[d1] = 1;
    out.A.push_back(row);
    row[d1] = 0;
    row[d2] = 1;
    out.A.push_back(row);

    for (int k = 1; k <= m; ++k) {
        const auto& g = circuit.gates[(std::size_t)k - 1];
        std::size_t xi = (std::size_t)g.a - 1, xj = (std::size_t)g.b - 1;
        std::size_t xo = (std::size_t)n + k - 1;
        std::vector<int> r1(cols, 0), r2(cols, 0), r3(cols, 0);
        r1[xi] = -1; r1[xo] = -1; r1[d1] = 1; r1[d2] = 1;
        r2[xj] = -1; r2[xo] = -1; r2[d1] = 1; r2[d2] = 1;
        r3[xi] = 1; r3[xj] = 1; r3[xo] = 1;
        out.A.push_back(std::move(r1));
        out.A.push_back(std::move(r2));
        out.A.push_back(std::move(r3));
    }

    out.c.assign(cols, 0);
    out.c[(std::size_t)n + m - 1] = 1;

    for (int i = 1; i <= n; ++i) out.variable_map.push_back("x" + std::to_string(i));
    for (int k = 1; k <= m; ++k) out.variable_map.push_back("g" + std::to_string(k));
    out.variable_map.push_back("dummy1");
    out.variable_map.push_back("dummy2");
    return out;
}

/// Output of the slack transformation By = 1.
struct SlackEquations {
    std::vector<std::vector<int>> B; // mn-m+1 rows, all right-hand sides 1
    std::vector<std::string> variable_map;
    std::size_t original_columns = 0;
};

/// Converts Ax > 0 (M rows, N >= 3 columns, coefficients in {-1,0,+1})
/// into equations over x, a forced constant u, per-row slacks s_ij kept
/// monotone by t_ij:
///   U:    u = 1
///   B_i:  sum_j A_ij x_j - sum_j s_ij = 1
///   S_ij: s_ij - s_{i,j+1} - t_ij + u = 1
/// The 0-1 solutions are in bijection with those of Ax > 0, preserving x.
inline SlackEquations inequalities_to_equations(
    const std::vector<std::vector<int>>& A,
    const std::vector<std::string>& x_names = {}) {
    std::size_t M = A.size();
    if (M < 1) throw error("inequalities_to_equations: need at least one row");
    std::size_t N = A.front().size();
    if (N < 3)
        throw error("inequalities_to_equations: need n >= 3 (pad with an unconstrained column)");
    for (const auto& row : A)
        if (row.size() != N) throw error("inequalities_to_equations: ragged matrix");

    std::size_t cols = 2 * M * N - 3 * M + N + 1;
    std::size_t u_col = N;
    auto s_col = [&](std::size_t i, std::size_t j) { return N + 1 + i * (N - 1) + j; };
    auto t_col = [&](std::size_t i, std::size_t j) {
        return N + 1 + M * (N - 1) + i * (N - 2) + j;
    };

    SlackEquations out;
    out.original_columns = N;
    out.B.reserve(M * N - M + 1);

    std::vector<int> row(cols, 0);
    row[u_col] = 1;
    out.B.push_back(row); // U: u = 1

    for (std::size_t i = 0; i < M; ++i) {
        std::vector<int> bi(cols, 0);
        for (std::size_t j = 0; j < N; ++j) bi[j] = A[i][j];
        for (std::size_t j = 0; j + 1 < N; ++j) bi[s_col(i, j)] = -1;
        out.B.push_back(std::move(bi));
    }
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j + 2 < N; ++j) {
            std::vector<int> sij(cols, 0);
            sij[s_col(i, j)] = 1;
            sij[s_col(i, j + 1)] = -1;
            sij[t_col(i, j)] = -1;
            sij[u_col] = 1;
            out.B.push_back(std::move(sij));
        }
    }

    for (std::size_t j = 0; j < N; ++j)
        out.variable_map.push_back(j < x_names.size() ? x_names[j]
                                                      : "x" + std::to_string(j + 1));
    out.variable_map.push_back("u");
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j + 1 < N; ++j)
            out.variable_map.push_back("s_" + std::to_string(i + 1) + "_" +
                                       std::to_string(j + 1));
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j + 2 < N; ++j)
            out.variable_map.push_back("t_" + std::to_string(i + 1) + "_" +
                                       std::to_string(j + 1));
    return out;
}

/// A market whose next-day movement encodes a circuit output, optionally
/// conditioned on a second circuit accepting.
struct CompiledMarket {
    MarketModel market;
    PriceSeries history{std::vector<Rat>{100}, 0};
    long target_day = 1;
    std::vector<std::string> variable_map;
    std::size_t input_count = 0; // leading columns that are circuit inputs
};

/// Builds the combined inequality system for (c_out, optional c_cond)
/// with shared input and dummy columns, then realizes it as an FI market
/// directly or as a PI market via the slack transformation.  The history
/// enforces all gate constraints (and cond's acceptance, if given); the
/// target day's action row is c_out's output selector.
inline CompiledMarket compile_market(const NorCircuit& c_out,
                                     const std::optional<NorCircuit>& c_cond,
                                     IncrementRule rule) {
    c_out.validate_circuit();
    if (c_cond) {
        c_cond->validate_circuit();
        if (c_cond->n != c_out.n)
            throw error("compile_market: circuits must have the same input count");
    }
    int n = c_out.n;
    int m_cond = c_cond ? c_cond->gate_count() : 0;
    int m_out = c_out.gate_count();
    int m_total = m_cond + m_out;
    std::size_t cols = (std::size_t)n + m_total + 2;
    std::size_t d1 = cols - 2, d2 = cols - 1;

    std::vector<std::string> names;
    for (int i = 1; i <= n; ++i) names.push_back("x" + std::to_string(i));
    for (int k = 1; k <= m_cond; ++k) names.push_back("cond.g" + std::to_string(k));
    for (int k = 1; k <= m_out; ++k) names.push_back("out.g" + std::to_string(k));
    names.push_back("dummy1");
    names.push_back("dummy2");

    // Gate rows over the shared column space; `base` is the 0-based column
    // of the circuit's first gate output.
    auto gate_rows = [&](const NorCircuit& c, std::size_t base,
                         std::vector<std::vector<int>>& rows) {
        for (int k = 1; k <= c.gate_count(); ++k) {
            const auto& g = c.gates[(std::size_t)k - 1];
            auto col_of = [&](int ref) {
                return ref <= n ? (std::size_t)ref - 1 : base + (std::size_t)(ref - n) - 1;
            };
            std::size_t xi = col_of(g.a), xj = col_of(g.b);
            std::size_t xo = base + (std::size_t)k - 1;
            std::vector<int> r1(cols, 0), r2(cols, 0), r3(cols, 0);
            r1[xi] = -1; r1[xo] = -1; r1[d1] = 1; r1[d2] = 1;
            r2[xj] = -1; r2[xo] = -1; r2[d1] = 1; r2[d2] = 1;
            r3[xi] = 1; r3[xj] = 1; r3[xo] = 1;
            rows.push_back(std::move(r1));
            rows.push_back(std::move(r2));
            rows.push_back(std::move(r3));
        }
    };

    std::vector<std::vector<int>> enforced;
    {
        std::vector<int> row(cols, 0);
        row[d1] = 1;
        enforced.push_back(row);
        row[d1] = 0;
        row[d2] = 1;
        enforced.push_back(row);
    }
    std::size_t cond_base = (std::size_t)n;
    std::size_t out_base = (std::size_t)n + m_cond;
    if (c_cond) gate_rows(*c_cond, cond_base, enforced);
    gate_rows(c_out, out_base, enforced);
    if (c_cond) {
        std::vector<int> accept(cols, 0);
        accept[cond_base + (std::size_t)m_cond - 1] = 1; // cond output > 0
        enforced.push_back(std::move(accept));
    }
    std::vector<int> target(cols, 0);
    target[out_base + (std::size_t)m_out - 1] = 1;

    CompiledMarket cm;
    cm.input_count = (std::size_t)n;
    if (rule == IncrementRule::FI) {
        LinearSystem sys;
        sys.columns = cols;
        sys.A = std::move(enforced);
        sys.c = target;
        auto [model, history, prov] = system_to_fi_market(sys);
        cm.market = std::move(model);
        cm.history = std::move(history);
        cm.variable_map = std::move(names);
    } else {
        SlackEquations eq = inequalities_to_equations(enforced, names);
        std::vector<long> rhs(eq.B.size(), 1);
        std::vector<int> target_ext(eq.B.front().size(), 0);
        for (std::size_t j = 0; j < cols; ++j) target_ext[j] = target[j];
        auto [model, history, prov] = system_to_pi_market(eq.B, rhs, target_ext);
        cm.market = std::move(model);
        cm.history = std::move(history);
        cm.variable_map = std::move(eq.variable_map);
    }
    cm.market.population = BernoulliSubset{};
    cm.target_day = cm.history.last_day() + 1;
    return cm;
}

/// Report of the exhaustive compilation audit.
struct VerificationReport {
    bool probability_zero = false;      // cond is unsatisfiable
    bool extension_ok = true;           // check (i): unique consistent assignment
    bool movement_ok = true;            // check (ii): movement tracks the circuit
    bool probability_ok = true;         // check (iii): exact predictor agrees
    bool uniqueness_exhaustive = false; // full 2^columns audit performed
    Rat expected_p_up, predicted_p_up;
    long failing_day = -1;              // first history day violated, if any
    std::string detail;

    bool all_ok() const {
        return !probability_zero && extension_ok && movement_ok && probability_ok;
    }
};

namespace detail {

/// The deterministic 0-1 extension of an input assignment across the
/// compiled columns: gate values by evaluation, dummies (and u) 1, and
/// for PI the unique monotone slack completion per B_i row.
inline std::vector<int> compiled_extension(const CompiledMarket& cm,
                                           const NorCircuit& c_out,
                                           const std::optional<NorCircuit>& c_cond,
                                           const std::vector<int>& bits) {
    int n = c_out.n;
    std::vector<int> circuit_vals(bits);
    auto eval_all = [&](const NorCircuit& c) {
        std::vector<int> v(bits);
        std::vector<int> outs;
        for (const auto& g : c.gates) {
            int a = v[(std::size_t)g.a - 1], b = v[(std::size_t)g.b - 1];
            int o = (a | b) ? 0 : 1;
            v.push_back(o);
            outs.push_back(o);
        }
        return outs;
    };
    std::vector<int> base(bits);
    if (c_cond)
        for (int v : eval_all(*c_cond)) base.push_back(v);
    for (int v : eval_all(c_out)) base.push_back(v);
    base.push_back(1); // dummy1
    base.push_back(1); // dummy2
    (void)n;

    std::size_t total = cm.market.h();
    if (base.size() == total) return base;

    // PI columns: locate u/s/t via the variable map and complete slacks.
    std::vector<int> full(total, 0);
    for (std::size_t j = 0; j < base.size(); ++j) full[j] = base[j];
    std::size_t N = base.size();
    full[N] = 1; // u
    // Row i's slack budget is (A_i . base) - 1, laid out monotonically.
    // Recover A rows from the extraction of the compiled market itself.
    auto [sys, prov] = pi_market_to_system(cm.market, cm.history);
    std::size_t M = (total - N - 1) / (2 * N - 3);
    auto s_col = [&](std::size_t i, std::size_t j) { return N + 1 + i * (N - 1) + j; };
    auto t_col = [&](std::size_t i, std::size_t j) {
        return N + 1 + M * (N - 1) + i * (N - 2) + j;
    };
    // Equation rows 1..M of the slack construction are the B_i rows whose
    // leading N coefficients are A_i.
    for (std::size_t i = 0; i < M; ++i) {
        const auto& bi = sys.B[1 + i];
        long chi = 0;
        for (std::size_t j = 0; j < N; ++j) chi += bi[j] * base[j];
        long sigma = chi - 1; // must be in [0, N-1] for a feasible row
        for (std::size_t j = 0; j + 1 < N; ++j)
            full[s_col(i, j)] = (long)j < sigma ? 1 : 0;
        for (std::size_t j = 0; j + 2 < N; ++j)
            full[t_col(i, j)] = full[s_col(i, j)] - full[s_col(i, j + 1)];
    }
    return full;
}

} // namespace detail

/// Exhaustive verification oracle: (i) every conditioned input assignment
/// has exactly one consistent column assignment, (ii) its target-day
/// movement is up iff c_out accepts, (iii) the exact predictor's p_up
/// equals the brute-force circuit ratio.  Uniqueness is audited over all
/// 2^columns assignments when columns <= 20, otherwise via the
/// deterministic-extension formula plus a solution-count cross-check.
inline VerificationReport verify_compilation(const CompiledMarket& cm,
                                             const NorCircuit& c_out,
                                             const std::optional<NorCircuit>& c_cond,
                                             const EnumerationCaps& caps = {}) {
    VerificationReport report;
    int n = c_out.n;
    auto [sys, prov] =
        cm.market.rule == IncrementRule::FI
            ? fi_market_to_system(cm.market, cm.history)
            : pi_market_to_system(cm.market, cm.history);

    auto satisfies = [&](const std::vector<int>& x) -> long {
        // Returns -1 if satisfied, else the first violated history day.
        for (std::size_t r = 0; r < sys.A.size(); ++r) {
            long s = 0;
            for (std::size_t j = 0; j < x.size(); ++j) s += sys.A[r][j] * x[j];
            if (s <= 0)
                for (const auto& e : prov.entries)
                    if (e.move != Movement::Flat && e.row == r) return e.day;
        }
        for (std::size_t r = 0; r < sys.B.size(); ++r) {
            long s = 0;
            for (std::size_t j = 0; j < x.size(); ++j) s += sys.B[r][j] * x[j];
            if (s != sys.b[r]) {
                if (cm.market.rule == IncrementRule::PI) return prov.entries[r].day;
                for (const auto& e : prov.entries)
                    if (e.move == Movement::Flat && e.row == r) return e.day;
            }
        }
        return -1;
    };

    long accepted = 0, accepted_and_up = 0;
    for (long bitsv = 0; bitsv < (1L << n); ++bitsv) {
        std::vector<int> bits(n);
        for (int i = 0; i < n; ++i) bits[(std::size_t)i] = (bitsv >> i) & 1;
        bool cond_ok = !c_cond || eval_circuit(*c_cond, bits) == 1;
        if (!cond_ok) continue;
        ++accepted;
        int out = eval_circuit(c_out, bits);
        if (out == 1) ++accepted_and_up;

        std::vector<int> ext = detail::compiled_extension(cm, c_out, c_cond, bits);
        long bad_day = satisfies(ext);
        if (bad_day >= 0) {
            report.extension_ok = false;
            report.failing_day = bad_day;
            report.detail = "extension of a conditioned input violates history day " +
                            std::to_string(bad_day);
        }
        long net = 0;
        for (std::size_t j = 0; j < ext.size(); ++j) net += sys.c[j] * ext[j];
        if ((net > 0) != (out == 1)) {
            report.movement_ok = false;
            report.detail = "target-day movement disagrees with circuit output";
        }
    }
    if (accepted == 0) {
        report.probability_zero = true;
        report.detail = "history has probability zero (condition unsatisfiable)";
        return report;
    }
    report.expected_p_up = Rat(accepted_and_up, accepted);

    std::size_t cols = cm.market.h();
    unsigned long long solutions = 0;
    if (cols <= 20) {
        report.uniqueness_exhaustive = true;
        // Plain sweep; grouped counts must be exactly one per conditioned input.
        std::vector<long> per_input(1u << n, 0);
        for (unsigned long long v = 0; v < (1ull << cols); ++v) {
            std::vector<int> x(cols);
            for (std::size_t j = 0; j < cols; ++j) x[j] = (int)((v >> j) & 1);
            if (satisfies(x) < 0) {
                ++solutions;
                long prefix = (long)(v & ((1ull << n) - 1));
                ++per_input[(std::size_t)prefix];
            }
        }
        for (long bitsv = 0; bitsv < (1L << n); ++bitsv) {
            std::vector<int> bits(n);
            for (int i = 0; i < n; ++i) bits[(std::size_t)i] = (bitsv >> i) & 1;
            bool cond_ok = !c_cond || eval_circuit(*c_cond, bits) == 1;
            if (per_input[(std::size_t)bitsv] != (cond_ok ? 1 : 0)) {
                report.extension_ok = false;
                report.detail = "input assignment " + std::to_string(bitsv) +
                                " has " + std::to_string(per_input[(std::size_t)bitsv]) +
                                " consistent extensions";
            }
        }
    } else {
        // Cross-check the total solution count through the independent
        // backtracking enumerator.
        LinearSystem counting = sys;
        detail::ZeroOneEnumerator en(counting, caps.node_budget);
        solutions = en.count().total();
        if ((long)solutions != accepted) {
            report.extension_ok = false;
            report.detail = "solution count " + std::to_string(solutions) +
                            " != conditioned input count " + std::to_string(accepted);
        }
    }

    try {
        Prediction p = predict_exact(cm.market, cm.history,
                                     next_day_actions(cm.market, cm.history), caps);
        report.predicted_p_up = p.p_up;
    } catch (const probability_zero_error&) {
        report.probability_ok = false;
        report.detail = "exact predictor found the history infeasible";
        return report;
    }
    if (report.predicted_p_up != report.expected_p_up) {
        report.probability_ok = false;
        if (report.detail.empty())
            report.detail = "exact predictor disagrees with circuit statistics";
    }
    return report;
}

} // namespace mkt
