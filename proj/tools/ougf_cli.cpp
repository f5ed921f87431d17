#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ougf/harness.hpp"

namespace {

// config < environment < command line
void apply_overrides(ougf::harness::ExperimentConfig& cfg, bool seed_set,
                     std::uint64_t seed, bool threads_set, int threads) {
    if (const char* env = std::getenv("OUGF_SEED"); env && *env)
        cfg.seed = std::strtoull(env, nullptr, 10);
    if (const char* env = std::getenv("OUGF_THREADS"); env && *env)
        cfg.threads = static_cast<int>(std::strtol(env, nullptr, 10));
    if (seed_set) cfg.seed = seed;
    if (threads_set) cfg.threads = threads;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification toolkit for OU type "
                 "growth-fragmentation processes"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string format = "csv";
    std::uint64_t seed = 0;
    int threads = 0;

    auto* run = app.add_subcommand("run", "Run the experiment described by a config");
    run->add_option("--config", config_path, "JSON experiment config")->required();
    auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_path, "Write the report to this path (default stdout)");
    run->add_option("--format", format, "Report format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    auto* threads_opt =
        run->add_option("--threads", threads, "Replication worker threads (0 = all)");

    auto* check = app.add_subcommand(
        "check-conditions", "Print the launch-gate condition report for a config");
    check->add_option("--config", config_path, "JSON experiment config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            ougf::harness::ExperimentConfig cfg =
                ougf::harness::parse_config_file(config_path);
            apply_overrides(cfg, seed_opt->count() > 0, seed,
                            threads_opt->count() > 0, threads);
            const ougf::harness::ExperimentReport report =
                ougf::harness::run_experiment(cfg);
            if (out_path.empty()) {
                ougf::harness::emit_report(report, format, std::cout);
            } else {
                ougf::harness::emit_report_file(report, format, out_path);
            }
            return report.all_pass() ? 0 : 1;
        }
        if (check->parsed()) {
            ougf::harness::ExperimentConfig cfg =
                ougf::harness::parse_config_file(config_path);
            apply_overrides(cfg, false, 0, false, 0);
            const ougf::harness::ConditionReport report =
                ougf::harness::check_conditions(cfg);
            std::cout << report.text();
            return report.all_ok() ? 0 : 1;
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 0;
}
