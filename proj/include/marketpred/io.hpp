#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "marketpred/circuit.hpp"
#include "marketpred/dsmc.hpp"

namespace mkt {

using nlohmann::json;

// ---------------------------------------------------------------------------
// market.json
// ---------------------------------------------------------------------------

inline json strategy_to_json(const Strategy& s) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Passive>) {
                json acts = json::array();
                for (int a : v.actions) acts.push_back(a);
                return {{"type", "passive"}, {"actions", acts}};
            } else if constexpr (std::is_same_v<T, Momentum>) {
                return {{"type", "momentum"}, {"k", v.k}};
            } else if constexpr (std::is_same_v<T, Contrarian>) {
                return {{"type", "contrarian"}, {"k", v.k}};
            } else if constexpr (std::is_same_v<T, Switching>) {
                return {{"type", "switching"},
                        {"initial", v.initial == TrendKind::Momentum ? "momentum"
                                                                    : "contrarian"},
                        {"period", v.period},
                        {"k", v.k},
                        {"start", v.start}};
            } else {
                return {{"type", "hold"}};
            }
        },
        s);
}

inline Strategy strategy_from_json(const json& j) {
    std::string type = j.at("type").get<std::string>();
    if (type == "passive") {
        Passive p;
        for (const auto& a : j.at("actions")) p.actions.push_back(a.get<int>());
        return p;
    }
    if (type == "momentum") return Momentum{j.at("k").get<int>()};
    if (type == "contrarian") return Contrarian{j.at("k").get<int>()};
    if (type == "switching") {
        std::string initial = j.at("initial").get<std::string>();
        if (initial != "momentum" && initial != "contrarian")
            throw parse_error(0, "market.json: unknown switching initial '" + initial + "'");
        return Switching{initial == "momentum" ? TrendKind::Momentum
                                               : TrendKind::Contrarian,
                         j.at("period").get<int>(), j.at("k").get<int>(),
                         j.at("start").get<long>()};
    }
    if (type == "hold") return Hold{};
    throw parse_error(0, "market.json: unknown strategy type '" + type + "'");
}

inline json market_to_json(const MarketModel& model) {
    json j;
    j["alpha"] = format_rational(model.alpha);
    j["rule"] = model.rule == IncrementRule::FI ? "FI" : "PI";
    if (std::holds_alternative<BernoulliSubset>(model.population)) {
        j["population"] = {{"mode", "bernoulli-subset"}};
    } else {
        const auto& mu = std::get<MultinomialDist>(model.population);
        json p = json::array();
        for (const auto& pi : mu.p) p.push_back(format_rational(pi));
        j["population"] = {{"mode", "multinomial"}, {"m", model.m}, {"p", p}};
    }
    json strategies = json::array();
    for (const auto& s : model.strategies) strategies.push_back(strategy_to_json(s));
    j["strategies"] = strategies;
    return j;
}

inline MarketModel market_from_json(const json& j) {
    MarketModel model;
    model.alpha = parse_rational(j.at("alpha").get<std::string>());
    std::string rule = j.at("rule").get<std::string>();
    if (rule == "FI") model.rule = IncrementRule::FI;
    else if (rule == "PI") model.rule = IncrementRule::PI;
    else throw parse_error(0, "market.json: unknown rule '" + rule + "'");
    for (const auto& s : j.at("strategies"))
        model.strategies.push_back(strategy_from_json(s));
    const json& pop = j.at("population");
    std::string mode = pop.at("mode").get<std::string>();
    if (mode == "bernoulli-subset") {
        model.population = BernoulliSubset{};
        model.m = (long)model.h();
    } else if (mode == "multinomial") {
        MultinomialDist mu;
        for (const auto& p : pop.at("p"))
            mu.p.push_back(parse_rational(p.get<std::string>()));
        model.m = pop.at("m").get<long>();
        model.population = std::move(mu);
    } else {
        throw parse_error(0, "market.json: unknown population mode '" + mode + "'");
    }
    model.validate_model();
    return model;
}

// ---------------------------------------------------------------------------
// prices.csv
// ---------------------------------------------------------------------------

inline std::string prices_to_csv(const PriceSeries& series) {
    std::ostringstream out;
    out << "day,price\n";
    for (long day = series.first_day(); day <= series.last_day(); ++day)
        out << day << "," << format_rational(series.at_day(day)) << "\n";
    return out.str();
}

inline PriceSeries prices_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw parse_error(1, "prices.csv: empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "day,price")
        throw parse_error(1, "prices.csv: expected header 'day,price'");
    std::vector<Rat> prices;
    long first_day = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw parse_error(lineno, "prices.csv line " + std::to_string(lineno) +
                                          ": expected 'day,price'");
        long day;
        try {
            std::size_t used;
            day = std::stol(line.substr(0, comma), &used);
            if (used != comma) throw std::invalid_argument("");
        } catch (...) {
            throw parse_error(lineno, "prices.csv line " + std::to_string(lineno) +
                                          ": bad day number");
        }
        if (prices.empty()) first_day = day;
        else if (day != first_day + (long)prices.size())
            throw parse_error(lineno, "prices.csv line " + std::to_string(lineno) +
                                          ": days must be consecutive");
        try {
            prices.push_back(parse_rational(line.substr(comma + 1)));
        } catch (const error&) {
            throw parse_error(lineno, "prices.csv line " + std::to_string(lineno) +
                                          ": bad price");
        }
    }
    if (prices.empty()) throw parse_error(lineno, "prices.csv: no data rows");
    return PriceSeries(std::move(prices), first_day);
}

// ---------------------------------------------------------------------------
// system.json
// ---------------------------------------------------------------------------

inline json system_to_json(const LinearSystem& sys, const DayProvenance& prov) {
    json j;
    j["columns"] = sys.columns;
    j["A"] = sys.A;
    j["B"] = sys.B;
    j["b"] = sys.b;
    j["c"] = sys.c;
    json entries = json::array();
    for (const auto& e : prov.entries)
        entries.push_back({{"day", e.day},
                           {"move", e.move == Movement::Up     ? "up"
                                    : e.move == Movement::Down ? "down"
                                                               : "flat"},
                           {"row", e.row}});
    j["provenance"] = entries;
    return j;
}

inline std::pair<LinearSystem, DayProvenance> system_from_json(const json& j) {
    LinearSystem sys;
    sys.columns = j.at("columns").get<std::size_t>();
    sys.A = j.at("A").get<std::vector<std::vector<int>>>();
    sys.B = j.at("B").get<std::vector<std::vector<int>>>();
    sys.b = j.at("b").get<std::vector<long>>();
    sys.c = j.at("c").get<std::vector<int>>();
    sys.validate_system();
    DayProvenance prov;
    for (const auto& e : j.at("provenance")) {
        std::string move = e.at("move").get<std::string>();
        if (move != "up" && move != "down" && move != "flat")
            throw parse_error(0, "system.json: unknown movement '" + move + "'");
        prov.entries.push_back({e.at("day").get<long>(),
                                move == "up"     ? Movement::Up
                                : move == "down" ? Movement::Down
                                                 : Movement::Flat,
                                e.at("row").get<std::size_t>()});
    }
    return {std::move(sys), std::move(prov)};
}

// ---------------------------------------------------------------------------
// varmap.json
// ---------------------------------------------------------------------------

inline json varmap_to_json(const CompiledMarket& cm) {
    json j;
    j["variables"] = cm.variable_map;
    j["target_day"] = cm.target_day;
    j["input_count"] = cm.input_count;
    return j;
}

// ---------------------------------------------------------------------------
// SVG line chart
// ---------------------------------------------------------------------------

/// Fixed 1000x500 viewBox, autoscaled axes, one polyline vertex per day.
inline std::string series_to_svg(const PriceSeries& series) {
    const double W = 1000, H = 500, margin = 50;
    const auto& p = series.prices();
    double lo = to_double(p.front()), hi = lo;
    for (const auto& v : p) {
        double d = to_double(v);
        if (d < lo) lo = d;
        if (d > hi) hi = d;
    }
    if (hi == lo) hi = lo + 1;
    double n = (double)(p.size() - 1);
    if (n == 0) n = 1;

    std::ostringstream out;
    out.precision(3);
    out << std::fixed;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1000 500\">\n";
    out << "  <rect width=\"1000\" height=\"500\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << H - margin << "\" x2=\""
        << W - margin << "\" y2=\"" << H - margin << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin
        << "\" y2=\"" << H - margin << "\" stroke=\"black\"/>\n";
    out << "  <text x=\"" << margin - 10 << "\" y=\"" << margin
        << "\" text-anchor=\"end\" font-size=\"14\">" << hi << "</text>\n";
    out << "  <text x=\"" << margin - 10 << "\" y=\"" << H - margin
        << "\" text-anchor=\"end\" font-size=\"14\">" << lo << "</text>\n";
    out << "  <text x=\"" << margin << "\" y=\"" << H - margin + 25
        << "\" text-anchor=\"middle\" font-size=\"14\">" << series.first_day()
        << "</text>\n";
    out << "  <text x=\"" << W - margin << "\" y=\"" << H - margin + 25
        << "\" text-anchor=\"middle\" font-size=\"14\">" << series.last_day()
        << "</text>\n";
    out << "  <polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < p.size(); ++i) {
        double x = margin + (W - 2 * margin) * (double)i / n;
        double y = H - margin - (H - 2 * margin) * (to_double(p[i]) - lo) / (hi - lo);
        if (i) out << " ";
        out << x << "," << y;
    }
    out << "\"/>\n</svg>\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw error("write to '" + path + "' failed");
}

} // namespace mkt
