// Command-line front end: run | verify | list-scenarios.
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pinv/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"pinv: semilinear parabolic inverse-problem laboratory"};
    app.require_subcommand(1);

    std::string config, output;
    std::uint64_t seed = 0;
    int threads = 1;
    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("--config", config, "scenario JSON")->required();
    auto* out_opt = run->add_option("--output", output, "output directory (overrides the config / PINV_OUTPUT_ROOT)");
    auto* seed_opt = run->add_option("--seed", seed, "override the scenario seed");
    auto* threads_opt = run->add_option("--threads", threads, "worker threads");

    std::string golden, produced;
    auto* verify = app.add_subcommand("verify", "compare an output directory with a golden one");
    verify->add_option("golden", golden)->required();
    verify->add_option("output", produced)->required();

    std::string dir = "scenarios";
    if (const char* env = std::getenv("PINV_SCENARIO_DIR")) dir = env;
    auto* list = app.add_subcommand("list-scenarios", "list scenario files");
    list->add_option("dir", dir, "scenario directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            pinv::RunOverrides o;
            if (*out_opt) o.output = output;
            if (*seed_opt) o.seed = seed;
            if (*threads_opt) o.threads = threads;
            return pinv::run_scenario(config, o, std::cout, std::cerr);
        }
        if (*verify) {
            const auto rep = pinv::verify_dirs(golden, produced);
            for (const auto& e : rep.entries) {
                std::cout << fmt::format("{:8} {}{}\n", e.status, e.file, e.detail.empty() ? "" : "  " + e.detail);
            }
            std::cout << (rep.passed() ? "PASS\n" : "FAIL\n");
            return rep.passed() ? 0 : 1;
        }
        for (const auto& s : pinv::list_scenarios(dir)) {
            std::cout << fmt::format("{:28} {:12} {}  ({})\n", s.name, s.experiment, s.description, s.path.string());
        }
        return 0;
    } catch (const pinv::ConfigError& e) {
        std::cerr << nlohmann::json{{"status", "error"}, {"kind", "config"}, {"message", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"status", "error"}, {"kind", "error"}, {"message", e.what()}}.dump() << '\n';
        return 1;
    }
}
