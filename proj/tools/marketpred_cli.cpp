#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "marketpred/io.hpp"

namespace fs = std::filesystem;
using namespace mkt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitVerifyFail = 3;

std::string format_probability(const Rat& r) {
    if (rat_den(r) == 1) return rat_num(r).str();
    return rat_num(r).str() + "/" + rat_den(r).str();
}

int run_simulate_dsmc(long traders, int memory, int max_period, const std::string& alpha,
                      long days, std::uint64_t seed, const std::string& init_prices,
                      const std::string& out, const std::string& plot) {
    DsmcParams params;
    params.m = traders;
    params.k = memory;
    params.L = max_period;
    params.alpha = parse_rational(alpha);
    params.days = days;
    params.seed = seed;
    PriceSeries init = prices_from_csv(read_file(init_prices));
    if (init.first_day() != 1)
        throw error("initial prices must start at day 1");
    params.initial_prices = init.prices();
    DsmcResult result = simulate_dsmc(params);
    write_file(out, prices_to_csv(result.series));
    if (!plot.empty()) write_file(plot, series_to_svg(result.series));

    SummaryStats st = summary_stats(result.series);
    std::cout << "days " << result.series.size() << "\n"
              << "first_trading_day " << result.first_trading_day << "\n"
              << "final_price " << format_rational(result.series.back()) << "\n"
              << "mean_change " << st.mean_change << "\n"
              << "stddev_change " << st.stddev_change << "\n"
              << "lag1_autocorrelation " << st.lag1_autocorrelation << "\n"
              << "max_drawup " << st.max_drawup << "\n"
              << "max_drawdown " << st.max_drawdown << "\n"
              << "longest_monotone_run " << st.longest_monotone_run << "\n";
    return kExitOk;
}

int run_extract(const std::string& market_path, const std::string& prices_path,
                const std::string& out) {
    MarketModel model = market_from_json(json::parse(read_file(market_path)));
    PriceSeries history = prices_from_csv(read_file(prices_path));
    auto [sys, prov] = model.rule == IncrementRule::FI
                           ? fi_market_to_system(model, history)
                           : pi_market_to_system(model, history);
    write_file(out, system_to_json(sys, prov).dump(2) + "\n");
    std::cout << "rows_A " << sys.A.size() << "\n"
              << "rows_B " << sys.B.size() << "\n"
              << "columns " << sys.columns << "\n";
    return kExitOk;
}

int run_predict(const std::string& market_path, const std::string& prices_path,
                const std::string& mode, double epsilon, double eta,
                std::optional<std::uint64_t> seed) {
    MarketModel model = market_from_json(json::parse(read_file(market_path)));
    PriceSeries history = prices_from_csv(read_file(prices_path));
    if (mode == "exact") {
        Prediction p = predict_exact(model, history, next_day_actions(model, history));
        std::cout << "p_up " << format_probability(p.p_up) << "\n"
                  << "p_down " << format_probability(p.p_down) << "\n"
                  << "p_same " << format_probability(p.p_same) << "\n";
        return kExitOk;
    }
    if (!seed) throw CLI::ValidationError("--seed is required in limit mode");
    LimitPrediction lp = predict_limit(model, history, epsilon, eta, *seed);
    switch (lp.kind) {
        case LimitPrediction::Kind::AlwaysUp:
            std::cout << "verdict always-up\np_up 1\n";
            break;
        case LimitPrediction::Kind::AlwaysDown:
            std::cout << "verdict always-down\np_up 0\n";
            break;
        case LimitPrediction::Kind::Estimated:
            std::cout << "verdict estimated\np_up " << lp.p_up << "\nhalf_width "
                      << lp.half_width << "\n";
            break;
    }
    return kExitOk;
}

int run_circuit_compile(const std::string& netlist_path, const std::string& cond_path,
                        const std::string& rule_name, const std::string& out_dir) {
    NorCircuit c_out = parse_netlist(read_file(netlist_path));
    std::optional<NorCircuit> c_cond;
    if (!cond_path.empty()) c_cond = parse_netlist(read_file(cond_path));
    IncrementRule rule = rule_name == "fi" ? IncrementRule::FI : IncrementRule::PI;
    CompiledMarket cm = compile_market(c_out, c_cond, rule);

    fs::create_directories(out_dir);
    fs::path dir(out_dir);
    write_file((dir / "market.json").string(), market_to_json(cm.market).dump(2) + "\n");
    write_file((dir / "prices.csv").string(), prices_to_csv(cm.history));
    write_file((dir / "varmap.json").string(), varmap_to_json(cm).dump(2) + "\n");
    write_file((dir / "out.nor").string(), read_file(netlist_path));
    if (c_cond) write_file((dir / "cond.nor").string(), read_file(cond_path));
    std::cout << "columns " << cm.market.h() << "\n"
              << "history_days " << cm.history.size() << "\n"
              << "target_day " << cm.target_day << "\n";
    return kExitOk;
}

int run_circuit_verify(const std::string& out_dir) {
    fs::path dir(out_dir);
    NorCircuit c_out = parse_netlist(read_file((dir / "out.nor").string()));
    std::optional<NorCircuit> c_cond;
    if (fs::exists(dir / "cond.nor"))
        c_cond = parse_netlist(read_file((dir / "cond.nor").string()));

    CompiledMarket cm;
    cm.market = market_from_json(json::parse(read_file((dir / "market.json").string())));
    cm.history = prices_from_csv(read_file((dir / "prices.csv").string()));
    json vm = json::parse(read_file((dir / "varmap.json").string()));
    cm.variable_map = vm.at("variables").get<std::vector<std::string>>();
    cm.target_day = vm.at("target_day").get<long>();
    cm.input_count = vm.at("input_count").get<std::size_t>();

    VerificationReport report = verify_compilation(cm, c_out, c_cond);
    if (report.probability_zero) {
        std::cout << "probability-zero conditioning: " << report.detail << "\n";
        return kExitInfeasible;
    }
    auto line = [](const char* name, bool ok) {
        std::cout << name << " " << (ok ? "ok" : "FAIL") << "\n";
    };
    line("check_extension", report.extension_ok);
    line("check_movement", report.movement_ok);
    line("check_probability", report.probability_ok);
    std::cout << "uniqueness_audit "
              << (report.uniqueness_exhaustive ? "exhaustive" : "counted") << "\n";
    std::cout << "p_up " << format_probability(report.expected_p_up) << "\n";
    if (!report.all_ok()) {
        std::cout << "detail " << report.detail << "\n";
        if (report.failing_day >= 0)
            std::cout << "failing_day " << report.failing_day << "\n";
        return kExitVerifyFail;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Market predictability laboratory"};
    app.require_subcommand(1);

    long traders = 20, days = 250;
    int memory = 2, max_period = 8;
    std::string alpha = "1/4", init_prices, out_path, plot_path;
    std::uint64_t seed = 0;
    auto* sim = app.add_subcommand("simulate-dsmc",
                                   "Run the deterministic-switching trend market");
    sim->add_option("--traders", traders, "trader count")->required();
    sim->add_option("--memory", memory, "trend memory k")->required();
    sim->add_option("--max-period", max_period, "maximum switching period L")->required();
    sim->add_option("--alpha", alpha, "price unit (rational)")->required();
    sim->add_option("--days", days, "trading days")->required();
    sim->add_option("--seed", seed, "RNG seed")->required();
    sim->add_option("--init-prices", init_prices, "CSV of the k+1 initial prices")
        ->required();
    sim->add_option("--out", out_path, "output prices.csv")->required();
    sim->add_option("--plot", plot_path, "optional output SVG");

    std::string market_path, prices_path, system_out;
    auto* extract = app.add_subcommand("extract",
                                       "Extract the linear constraint system of a history");
    extract->add_option("market", market_path, "market.json")->required();
    extract->add_option("prices", prices_path, "prices.csv")->required();
    extract->add_option("--out", system_out, "output system.json")->required();

    std::string mode;
    double epsilon = 0.01, eta = 0.01;
    std::optional<std::uint64_t> predict_seed;
    auto* predict = app.add_subcommand("predict", "Conditional next-day prediction");
    predict->add_option("market", market_path, "market.json")->required();
    predict->add_option("prices", prices_path, "prices.csv")->required();
    predict->add_option("--mode", mode, "exact or limit")
        ->required()
        ->check(CLI::IsMember({"exact", "limit"}));
    predict->add_option("--epsilon", epsilon, "relative error (limit mode)");
    predict->add_option("--eta", eta, "failure probability (limit mode)");
    predict->add_option("--seed", predict_seed, "RNG seed (limit mode)");

    auto* circuit = app.add_subcommand("circuit", "Compile circuits into markets");
    circuit->require_subcommand(1);
    std::string netlist_path, cond_path, rule_name, circuit_dir;
    auto* compile = circuit->add_subcommand("compile", "Compile a NOR netlist");
    compile->add_option("netlist", netlist_path, "output-circuit netlist")->required();
    compile->add_option("--cond", cond_path, "conditioning-circuit netlist");
    compile->add_option("--rule", rule_name, "fi or pi")
        ->required()
        ->check(CLI::IsMember({"fi", "pi"}));
    compile->add_option("--out-dir", circuit_dir, "output directory")->required();
    auto* verify = circuit->add_subcommand("verify", "Verify a compiled directory");
    verify->add_option("dir", circuit_dir, "directory written by compile")->required();

    try {
        app.parse(argc, argv);
        if (sim->parsed())
            return run_simulate_dsmc(traders, memory, max_period, alpha, days, seed,
                                     init_prices, out_path, plot_path);
        if (extract->parsed()) return run_extract(market_path, prices_path, system_out);
        if (predict->parsed())
            return run_predict(market_path, prices_path, mode, epsilon, eta, predict_seed);
        if (compile->parsed())
            return run_circuit_compile(netlist_path, cond_path, rule_name, circuit_dir);
        if (verify->parsed()) return run_circuit_verify(circuit_dir);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    } catch (const infeasible_history_error& e) {
        std::cerr << "infeasible history (day " << e.day << "): " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const probability_zero_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const limit_infeasible_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const parse_error& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
