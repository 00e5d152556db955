#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "marketpred/io.hpp"

using namespace mkt;
namespace fs = std::filesystem;

TEST_CASE("market json round trip") {
    MarketModel m;
    m.m = 4;
    m.alpha = Rat(1, 3);
    m.rule = IncrementRule::PI;
    m.strategies = {Passive{{1, -1, 0}}, Momentum{2}, Contrarian{3},
                    Switching{TrendKind::Contrarian, 2, 2, 4}, Hold{}};
    m.population = MultinomialDist{
        {Rat(1, 2), Rat(1, 6), Rat(1, 6), Rat(1, 12), Rat(1, 12)}};

    MarketModel back = market_from_json(market_to_json(m));
    CHECK(back.m == m.m);
    CHECK(back.alpha == m.alpha);
    CHECK(back.rule == m.rule);
    REQUIRE(back.h() == m.h());
    CHECK(std::get<Passive>(back.strategies[0]).actions ==
          std::get<Passive>(m.strategies[0]).actions);
    CHECK(std::get<Momentum>(back.strategies[1]).k == 2);
    CHECK(std::get<Contrarian>(back.strategies[2]).k == 3);
    auto sw = std::get<Switching>(back.strategies[3]);
    CHECK(sw.initial == TrendKind::Contrarian);
    CHECK(sw.period == 2);
    CHECK(sw.start == 4);
    CHECK(std::get<MultinomialDist>(back.population).p ==
          std::get<MultinomialDist>(m.population).p);

    m.population = BernoulliSubset{};
    m.m = 5;
    MarketModel bern = market_from_json(market_to_json(m));
    CHECK(std::holds_alternative<BernoulliSubset>(bern.population));
    CHECK(bern.m == (long)bern.h());
}

TEST_CASE("prices csv round trip keeps exact rationals") {
    PriceSeries s({100, Rat(401, 4), Rat(301, 3)}, 1);
    std::string text = prices_to_csv(s);
    CHECK(text == "day,price\n1,100\n2,100.25\n3,301/3\n");
    PriceSeries back = prices_from_csv(text);
    CHECK(back == s);

    CHECK_THROWS_AS(prices_from_csv("day,price\n"), parse_error);
    CHECK_THROWS_AS(prices_from_csv("price\n0,1\n"), parse_error);
    CHECK_THROWS_AS(prices_from_csv("day,price\n0,1\n2,2\n"), parse_error);
}

TEST_CASE("system json round trip") {
    LinearSystem sys;
    sys.columns = 3;
    sys.A = {{1, -1, 0}};
    sys.B = {{0, 1, 1}};
    sys.b = {2};
    sys.c = {1, 0, -1};
    DayProvenance prov;
    prov.entries = {{1, Movement::Up, 0}, {2, Movement::Flat, 0}};
    auto [back, bprov] = system_from_json(system_to_json(sys, prov));
    CHECK(back.A == sys.A);
    CHECK(back.B == sys.B);
    CHECK(back.b == sys.b);
    CHECK(back.c == sys.c);
    REQUIRE(bprov.entries.size() == 2);
    CHECK(bprov.entries[0].move == Movement::Up);
    CHECK(bprov.entries[1].day == 2);
}

TEST_CASE("svg has one polyline vertex per day") {
    PriceSeries s({100, 101, 100, 102, 103}, 1);
    std::string svg = series_to_svg(s);
    CHECK(svg.find("viewBox=\"0 0 1000 500\"") != std::string::npos);
    auto start = svg.find("points=\"");
    REQUIRE(start != std::string::npos);
    auto end = svg.find('"', start + 8);
    std::string points = svg.substr(start + 8, end - start - 8);
    std::size_t vertices = 1;
    for (char ch : points)
        if (ch == ' ') ++vertices;
    CHECK(vertices == s.size());
}

// ---------------------------------------------------------------------------
// CLI end-to-end
// ---------------------------------------------------------------------------

namespace {

struct CliResult {
    int status;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path tmp = fs::temp_directory_path() /
                   ("mkt_cli_out_" + std::to_string(counter++) + ".txt");
    std::string cmd = std::string(CLI_BIN_PATH) + " " + args + " > " + tmp.string() +
                      " 2>&1";
    int raw = std::system(cmd.c_str());
    CliResult r;
    r.status = raw < 0 ? raw : WEXITSTATUS(raw);
    std::ifstream in(tmp);
    std::ostringstream buf;
    buf << in.rdbuf();
    r.out = buf.str();
    fs::remove(tmp);
    return r;
}

fs::path work_dir() {
    fs::path d = fs::temp_directory_path() / "mkt_cli_work";
    fs::create_directories(d);
    return d;
}

} // namespace

TEST_CASE("cli simulate-dsmc is reproducible") {
    fs::path d = work_dir();
    write_file((d / "init.csv").string(), "day,price\n1,80\n2,80.25\n3,81\n");
    std::string base = "simulate-dsmc --traders 20 --memory 2 --max-period 8 "
                       "--alpha 1/4 --days 250 --seed 1 --init-prices " +
                       (d / "init.csv").string();
    CliResult a = run_cli(base + " --out " + (d / "a.csv").string() + " --plot " +
                          (d / "a.svg").string());
    REQUIRE(a.status == 0);
    CliResult b = run_cli(base + " --out " + (d / "b.csv").string());
    REQUIRE(b.status == 0);
    CHECK(read_file((d / "a.csv").string()) == read_file((d / "b.csv").string()));

    PriceSeries series = prices_from_csv(read_file((d / "a.csv").string()));
    CHECK(series.size() == 253);
    CHECK(a.out.find("mean_change") != std::string::npos);

    // every series day appears as one polyline vertex
    std::string svg = read_file((d / "a.svg").string());
    auto start = svg.find("points=\"");
    REQUIRE(start != std::string::npos);
    auto end = svg.find('"', start + 8);
    std::size_t vertices = 1;
    for (std::size_t i = start + 8; i < end; ++i)
        if (svg[i] == ' ') ++vertices;
    CHECK(vertices == 253);

    CliResult bad = run_cli(base + " --out " + (d / "c.csv").string() +
                            " --days-bogus");
    CHECK(bad.status != 0);
    CliResult zero = run_cli(
        "simulate-dsmc --traders 20 --memory 2 --max-period 8 --alpha 1/4 "
        "--days 0 --seed 1 --init-prices " +
        (d / "init.csv").string() + " --out " + (d / "z.csv").string());
    CHECK(zero.status == 1);
}

TEST_CASE("cli extract and predict") {
    fs::path d = work_dir();
    json market = {
        {"alpha", "1"},
        {"rule", "FI"},
        {"population", {{"mode", "bernoulli-subset"}}},
        {"strategies",
         json::array({{{"type", "passive"}, {"actions", {1, 1}}},
                      {{"type", "passive"}, {"actions", {-1, 1}}}})}};
    write_file((d / "market.json").string(), market.dump());

    SECTION("extract the one-row example") {
        write_file((d / "up.csv").string(), "day,price\n0,100\n1,101\n");
        CliResult r = run_cli((d / "market.json").string() + " " +
                              (d / "up.csv").string() + " --out " +
                              (d / "system.json").string());
        // missing subcommand
        CHECK(r.status == 1);
        r = run_cli("extract " + (d / "market.json").string() + " " +
                    (d / "up.csv").string() + " --out " + (d / "system.json").string());
        REQUIRE(r.status == 0);
        auto [sys, prov] = system_from_json(json::parse(read_file((d / "system.json").string())));
        CHECK(sys.A == std::vector<std::vector<int>>{{1, -1}});
        CHECK(sys.B.empty());
    }
    SECTION("flat-only history has empty A") {
        write_file((d / "flat.csv").string(), "day,price\n0,100\n1,100\n");
        CliResult r = run_cli("extract " + (d / "market.json").string() + " " +
                              (d / "flat.csv").string() + " --out " +
                              (d / "flat_system.json").string());
        REQUIRE(r.status == 0);
        auto [sys, prov] =
            system_from_json(json::parse(read_file((d / "flat_system.json").string())));
        CHECK(sys.A.empty());
        CHECK(sys.B.size() == 1);
    }
    SECTION("pi integrality failure names the day") {
        json pim = market;
        pim["rule"] = "PI";
        pim["alpha"] = "1/3";
        write_file((d / "pim.json").string(), pim.dump());
        write_file((d / "half.csv").string(), "day,price\n0,100\n1,100.5\n");
        CliResult r = run_cli("extract " + (d / "pim.json").string() + " " +
                              (d / "half.csv").string() + " --out " +
                              (d / "nope.json").string());
        CHECK(r.status == 2);
        CHECK(r.out.find("day 1") != std::string::npos);
    }
    SECTION("exact prediction output") {
        write_file((d / "p0.csv").string(), "day,price\n0,100\n");
        json m2 = market;
        m2["strategies"] = json::array({{{"type", "passive"}, {"actions", {1}}},
                                        {{"type", "passive"}, {"actions", {-1}}}});
        write_file((d / "m2.json").string(), m2.dump());
        CliResult r = run_cli("predict " + (d / "m2.json").string() + " " +
                              (d / "p0.csv").string() + " --mode exact");
        REQUIRE(r.status == 0);
        CHECK(r.out == "p_up 1/4\np_down 1/4\np_same 1/2\n");
    }
    SECTION("limit prediction verdicts") {
        json lm = {
            {"alpha", "1"},
            {"rule", "FI"},
            {"population",
             {{"mode", "multinomial"}, {"m", 2}, {"p", {"1/2", "1/2"}}}},
            {"strategies", json::array({{{"type", "passive"}, {"actions", {1, 1}}},
                                        {{"type", "hold"}}})}};
        write_file((d / "lm.json").string(), lm.dump());
        write_file((d / "p0.csv").string(), "day,price\n0,100\n");
        CliResult r = run_cli("predict " + (d / "lm.json").string() + " " +
                              (d / "p0.csv").string() + " --mode limit --seed 9");
        REQUIRE(r.status == 0);
        CHECK(r.out.find("verdict always-up") != std::string::npos);
        CHECK(r.out.find("p_up 1") != std::string::npos);

        // a flat day forces a nonzero B row: limit-infeasible, exit 2
        write_file((d / "pflat.csv").string(), "day,price\n0,100\n1,100\n");
        CliResult inf = run_cli("predict " + (d / "lm.json").string() + " " +
                                (d / "pflat.csv").string() + " --mode limit --seed 9");
        CHECK(inf.status == 2);

        CliResult noseed = run_cli("predict " + (d / "lm.json").string() + " " +
                                   (d / "p0.csv").string() + " --mode limit");
        CHECK(noseed.status == 1);
    }
}

TEST_CASE("cli circuit compile and verify") {
    fs::path d = work_dir();
    write_file((d / "or.nor").string(),
               "inputs 2\ng1 = NOR(x1, x2)\ng2 = NOR(g1, g1)\n");
    for (std::string rule : {"fi", "pi"}) {
        fs::path out = d / ("circ_" + rule);
        CliResult c = run_cli("circuit compile " + (d / "or.nor").string() +
                              " --rule " + rule + " --out-dir " + out.string());
        REQUIRE(c.status == 0);
        CliResult v = run_cli("circuit verify " + out.string());
        REQUIRE(v.status == 0);
        CHECK(v.out.find("check_extension ok") != std::string::npos);
        CHECK(v.out.find("check_movement ok") != std::string::npos);
        CHECK(v.out.find("check_probability ok") != std::string::npos);
        CHECK(v.out.find("p_up 3/4") != std::string::npos);
    }

    SECTION("contradictory condition") {
        write_file((d / "never.nor").string(),
                   "inputs 1\n"
                   "g1 = NOR(x1, x1)\n"
                   "g2 = NOR(x1, g1)\n"
                   "g3 = NOR(g2, g2)\n"
                   "g4 = NOR(g3, g3)\n");
        write_file((d / "id.nor").string(),
                   "inputs 1\ng1 = NOR(x1, x1)\ng2 = NOR(g1, g1)\n");
        fs::path out = d / "circ_never";
        CliResult c = run_cli("circuit compile " + (d / "id.nor").string() +
                              " --cond " + (d / "never.nor").string() +
                              " --rule fi --out-dir " + out.string());
        REQUIRE(c.status == 0);
        CliResult v = run_cli("circuit verify " + out.string());
        CHECK(v.status == 2);
        CHECK(v.out.find("probability") != std::string::npos);
    }
    SECTION("netlist parse error reports the line") {
        write_file((d / "bad.nor").string(), "inputs 2\ng1 = NOR(g3, x1)\n");
        CliResult c = run_cli("circuit compile " + (d / "bad.nor").string() +
                              " --rule fi --out-dir " + (d / "circ_bad").string());
        CHECK(c.status == 1);
        CHECK(c.out.find("line 2") != std::string::npos);
    }
}
