// casa: headless experiments, log replay, intent learning and the live
// teleoperation server.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "casa/metrics.hpp"
#include "casa/serialization.hpp"
#include "casa/server.hpp"

namespace fs = std::filesystem;
using namespace casa;

namespace {

constexpr int exit_failure = 1;
constexpr int exit_scenario_error = 2;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, sep))
        if (!item.empty()) out.push_back(item);
    return out;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::invalid_input, "cannot write " + path.string());
    out << text;
}

int cmd_run(const std::string& scenario_arg, const std::vector<std::string>& method_args,
            const std::string& seeds_arg, const std::string& out_dir) {
    Scenario scenario;
    std::vector<Method> methods;
    std::vector<std::uint64_t> seeds;
    try {
        scenario = load_scenario(scenario_arg);
        for (const auto& arg : method_args)
            for (const auto& m : split(arg, ',')) methods.push_back(method_from_string(m));
        if (methods.empty()) methods.push_back(scenario.method);
        for (const auto& s : split(seeds_arg, ',')) seeds.push_back(std::stoull(s));
        if (seeds.empty()) seeds.push_back(scenario.seed);
    } catch (const std::exception& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return exit_scenario_error;
    }

    const auto runs = run_experiment(scenario, methods, seeds);
    Json reports = Json::array();
    if (!out_dir.empty()) fs::create_directories(out_dir);
    for (const auto& run : runs) {
        const auto& r = run.report;
        reports.push_back(to_json(r));
        std::cout << r.scenario << ' ' << to_string(r.method) << " seed=" << r.seed << " error=" << r.error
                  << " efficiency_cost=" << r.efficiency_cost << " effort=" << r.effort;
        if (r.relative_effort) std::cout << " relative_effort=" << *r.relative_effort;
        std::cout << '\n';
        if (out_dir.empty()) continue;

        const std::string stem = (scenario.name.empty() ? "scenario" : scenario.name) + "_" +
                                 std::string(to_string(r.method)) + "_" + std::to_string(r.seed);
        std::ofstream csv(fs::path(out_dir) / (stem + ".csv"));
        write_time_series_csv(csv, run.episode);
        Scenario cell = scenario;
        cell.seed = r.seed;
        std::ofstream log(fs::path(out_dir) / (stem + ".jsonl"));
        write_episode_log(log, cell, run.episode);
    }
    if (!out_dir.empty()) write_file(fs::path(out_dir) / "report.json", reports.dump(2) + "\n");
    return 0;
}

int cmd_replay(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << '\n';
        return exit_failure;
    }
    ReplayReport report;
    try {
        report = replay_episode_log(in, path);
    } catch (const Error& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return exit_scenario_error;
    }
    std::cout << "ticks=" << report.ticks << " inference=" << report.inference_messages
              << " mismatches=" << report.mismatches << '\n';
    if (report.mismatches > 0) {
        std::cout << report.first_mismatch << '\n';
        return exit_failure;
    }
    std::cout << "replay identical\n";
    return 0;
}

int cmd_learn(const std::string& demos_path, const std::string& out_path, const std::string& id,
              const std::string& config_path, int max_iters) {
    DemoSet demos;
    IrlConfig cfg;
    WorldConfig world;
    try {
        const Json j = read_json_file(demos_path);
        demos = demo_set_from_json(j);
        if (j.contains("world")) world = world_from_json(j["world"]);
        if (!config_path.empty()) cfg = irl_config_from_json(read_json_file(config_path));
        if (max_iters > 0) cfg.max_iters = max_iters;
    } catch (const Error& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return exit_scenario_error;
    }
    LearnOptions opts;
    opts.id = id;
    const LearnResult result = learn_intent(demos, cfg, world, opts);
    std::cout << "intent=" << result.intent.id << " iterations=" << result.iterations
              << " gradient_norm=" << result.gradient_norm << (result.converged ? " converged" : " not converged")
              << '\n';
    const std::string text = to_json(result.intent).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
    return 0;
}

int cmd_demos(const std::string& scenario_arg, int count, const std::string& out_path) {
    Scenario scenario;
    try {
        scenario = load_scenario(scenario_arg);
    } catch (const Error& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return exit_scenario_error;
    }
    Json j = to_json(scenarios::demonstrations(scenario, count));
    j["world"] = to_json(scenario.world);
    write_file(out_path, j.dump() + "\n");
    std::cout << "wrote " << count << " demonstrations to " << out_path << '\n';
    return 0;
}

int cmd_export(const std::string& name, const std::string& out_path) {
    Scenario scenario;
    try {
        scenario = scenarios::by_name(name);
    } catch (const Error& e) {
        std::cerr << "scenario error: " << e.what() << '\n';
        return exit_scenario_error;
    }
    const std::string text = to_json(scenario).dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_file(out_path, text);
    }
    return 0;
}

WebSocketServer* g_server = nullptr;

int cmd_serve(const std::string& address, unsigned short port) {
    ServerOptions opts;
    opts.address = address;
    opts.port = port;
    opts.session.scenario_loader = [](const std::string& name) { return load_scenario(name); };
    WebSocketServer server(opts);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::signal(SIGTERM, [](int) {
        if (g_server) g_server->stop();
    });
    std::cout << "listening on ws://" << address << ":" << server.port() << std::endl;
    server.run();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence-aware shared autonomy: experiments, replay, learning and live sessions"};
    app.require_subcommand(1);

    std::string scenario_arg, seeds_arg, out_dir;
    std::vector<std::string> methods;
    auto* run = app.add_subcommand("run", "Run a scenario headlessly and write metrics, CSV series and logs");
    run->add_option("scenario", scenario_arg, "Scenario JSON file or built-in name")->required();
    run->add_option("--method", methods, "casa|pba|belief|none, repeatable or comma separated");
    run->add_option("--seeds", seeds_arg, "Comma-separated operator seeds");
    run->add_option("--out", out_dir, "Output directory");

    std::string log_path;
    auto* replay = app.add_subcommand("replay", "Re-run an episode log and check it reproduces exactly");
    replay->add_option("log", log_path, "Episode log (JSON lines)")->required();

    std::string demos_path, intent_out, intent_id, irl_config;
    int max_iters = 0;
    auto* learn = app.add_subcommand("learn", "Learn a feature-cost intent from demonstrations");
    learn->add_option("demos", demos_path, "Demonstrations JSON")->required();
    learn->add_option("--out", intent_out, "Where to write the intent JSON (stdout if omitted)");
    learn->add_option("--id", intent_id, "Id of the learned intent");
    learn->add_option("--config", irl_config, "IRL configuration JSON");
    learn->add_option("--iters", max_iters, "Override max_iters");

    std::string demo_scenario, demo_out;
    int demo_count = 5;
    auto* demos = app.add_subcommand("demos", "Record scripted demonstrations of a scenario's hidden intent");
    demos->add_option("scenario", demo_scenario, "Scenario JSON file or built-in name")->required();
    demos->add_option("--count", demo_count, "Number of demonstrations")->check(CLI::Range(1, 8));
    demos->add_option("--out", demo_out, "Output file")->required();

    std::string export_name, export_out;
    auto* exp = app.add_subcommand("export", "Write a built-in scenario as JSON");
    exp->add_option("name", export_name, "known_goal|unknown_goal|unknown_skill")->required();
    exp->add_option("--out", export_out, "Output file (stdout if omitted)");

    std::string address = "127.0.0.1";
    unsigned short port = 8765;
    auto* serve = app.add_subcommand("serve", "Serve live sessions over WebSocket");
    serve->add_option("--address", address, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(scenario_arg, methods, seeds_arg, out_dir);
        if (*replay) return cmd_replay(log_path);
        if (*learn) return cmd_learn(demos_path, intent_out, intent_id, irl_config, max_iters);
        if (*demos) return cmd_demos(demo_scenario, demo_count, demo_out);
        if (*exp) return cmd_export(export_name, export_out);
        if (*serve) return cmd_serve(address, port);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_failure;
    }
    return 0;
}
