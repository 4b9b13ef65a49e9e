#include "qax/config.hpp"
#include "qax/demo.hpp"
#include "qax/error.hpp"
#include "qax/exchange.hpp"
#include "qax/http_server.hpp"
#include "qax/incentive_sim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

qax::HttpServer* g_server = nullptr;

void on_signal(int)
{
    if (g_server != nullptr)
        g_server->stop();
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw qax::Error(qax::ErrorCode::InvalidConfig, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> parse_grid(const std::string& csv)
{
    std::vector<double> grid;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (qax::trim(item.substr(used)).size() != 0)
                throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw qax::Error(qax::ErrorCode::InvalidConfig, "bad grid value '" + item + "'");
        }
    }
    return grid;
}

int serve(const std::string& config_path)
{
    auto config = qax::load_config(config_path);
    auto log_path = config.data_dir / "events.log";
    auto exchange = qax::Exchange::open(qax::ExchangeOptions::from_config(config), log_path);
    qax::HttpServer server(*exchange);
    int port = server.bind(config.listen_host, config.listen_port);
    std::cerr << "qax: " << exchange->event_count() << " events replayed from " << log_path.string() << "\n"
              << "qax: listening on " << config.listen_host << ":" << port << " (clock "
              << qax::to_string(config.clock) << ")\n";
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.run();
    g_server = nullptr;
    return 0;
}

int replay(const std::string& log_path, const std::string& out_path)
{
    auto loaded = qax::load_event_log(log_path);
    if (loaded.torn_tail_bytes > 0)
        std::cerr << "qax: ignoring " << loaded.torn_tail_bytes << " bytes of torn trailing write\n";
    std::string state = qax::replay_state(qax::ExchangeOptions{}, std::move(loaded.events));
    if (out_path.empty()) {
        std::cout << state << "\n";
    } else {
        std::ofstream out(out_path);
        out << state << "\n";
    }
    return 0;
}

int simulate(const std::string& terms_path, const std::string& grid, std::uint64_t trials, std::uint64_t seed,
             std::int64_t evidence_cost, unsigned threads, const std::string& out_path)
{
    qax::sim::SimConfig config;
    config.terms = qax::terms_from_json(nlohmann::json::parse(read_text(terms_path)));
    config.grid = parse_grid(grid);
    config.trials = trials;
    config.seed = seed;
    config.buyer.evidence_cost = qax::Money{evidence_cost};
    config.threads = threads;
    auto report = qax::sim::run_simulation(config);
    std::string text = qax::sim::report_to_json(report).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(out_path);
        out << text;
    }
    for (const auto& p : report.points)
        std::cerr << "p=" << p.accuracy << "  mean payoff " << p.mean_seller_payoff << " +/- "
                  << p.seller_payoff_stderr << "  (closed form " << p.closed_form_payoff << ")\n";
    std::cerr << "break-even: closed form " << report.break_even_closed_form << ", estimated "
              << (report.break_even_estimate ? std::to_string(*report.break_even_estimate) : "n/a") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Brokered question/answer exchange with escrowed stakes"};
    app.require_subcommand(1);

    std::string config_path;
    auto* serve_cmd = app.add_subcommand("serve", "Run the exchange HTTP service");
    serve_cmd->add_option("--config", config_path, "key=value config file")->required()->check(CLI::ExistingFile);

    std::string log_path;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "Rebuild state from an event log and print it");
    replay_cmd->add_option("--log", log_path, "event log")->required()->check(CLI::ExistingFile);
    replay_cmd->add_option("--out", replay_out, "write state here instead of stdout");

    std::string terms_path;
    std::string grid = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    std::int64_t evidence_cost = 0;
    unsigned threads = 0;
    std::string sim_out;
    auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo seller/buyer payoffs through the settlement code");
    sim_cmd->add_option("--terms", terms_path, "terms JSON file")->required()->check(CLI::ExistingFile);
    sim_cmd->add_option("--grid", grid, "comma-separated seller accuracies");
    sim_cmd->add_option("--trials", trials, "trials per grid point");
    sim_cmd->add_option("--seed", seed, "64-bit seed");
    sim_cmd->add_option("--evidence-cost", evidence_cost, "buyer's cost to produce evidence, in cents");
    sim_cmd->add_option("--threads", threads, "worker threads (0 = all cores)");
    sim_cmd->add_option("--out", sim_out, "report JSON path (default stdout)");

    std::string demo_log;
    auto* demo_cmd = app.add_subcommand("demo", "Run the ten-day, five-question scenario end to end");
    demo_cmd->add_option("--log", demo_log, "also write the event log here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (serve_cmd->parsed())
            return serve(config_path);
        if (replay_cmd->parsed())
            return replay(log_path, replay_out);
        if (sim_cmd->parsed())
            return simulate(terms_path, grid, trials, seed, evidence_cost, threads, sim_out);
        if (demo_cmd->parsed()) {
            auto summary = qax::run_demo(std::cout, demo_log.empty() ? std::nullopt
                                                                     : std::optional<std::filesystem::path>(demo_log));
            return summary.reconciled() ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "qax: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
