#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "meritluck/config.hpp"
#include "meritluck/errors.hpp"
#include "meritluck/pipeline.hpp"

namespace {

// Shared flag set; flags given on the command line win over config file values.
struct CommandArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string arm;
    bool informed = false;
    bool strict_merit = false;
    CLI::Option* o_config = nullptr;
    CLI::Option* o_seed = nullptr;
    CLI::Option* o_out = nullptr;
    CLI::Option* o_arm = nullptr;

    void attach(CLI::App* cmd) {
        o_config = cmd->add_option("--config", config_path, "JSON config file")
                       ->check(CLI::ExistingFile);
        o_seed = cmd->add_option("--seed", seed, "Seed override");
        o_out = cmd->add_option("--out", out_dir, "Output directory override");
        o_arm = cmd->add_option("--arm", arm, "Restrict to one study arm");
        cmd->add_flag("--informed", informed, "Disclose the merit probability to every spectator");
        cmd->add_flag("--strict-merit", strict_merit,
                      "Count only strictly higher effort as merit in enumerations");
    }

    meritluck::RunConfig resolve() const {
        meritluck::RunConfig config;
        if (o_config->count() > 0) config = meritluck::load_config(config_path);
        if (o_seed->count() > 0) config.seed = seed;
        if (o_out->count() > 0) config.out_dir = out_dir;
        if (o_arm->count() > 0) config.arm = arm;
        if (informed) config.informed = true;
        if (strict_merit) config.strict_merit = true;
        return config;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator and inference toolkit for winner-takes-all tournaments with luck"};
    app.require_subcommand(1);

    struct Command {
        const char* name;
        const char* description;
        void (*run)(const meritluck::RunConfig&);
        CommandArgs args;
    };
    Command commands[] = {
        {"pi-curve", "Enumerate the merit probability curve and its curvature report",
         meritluck::cmd_pi_curve, {}},
        {"design", "Generate one 12-round session design", meritluck::cmd_design, {}},
        {"run-study", "Simulate spectator decisions for the configured arms",
         meritluck::cmd_run_study, {}},
        {"analyze", "Estimate bin means, elasticities, gaps and margins from decision files",
         meritluck::cmd_analyze, {}},
        {"reproduce", "Run every stage end to end and write a hash manifest",
         meritluck::cmd_reproduce, {}},
        {"validate", "Run the property suites and exit nonzero on any failure",
         meritluck::cmd_validate, {}},
    };
    for (auto& command : commands) {
        CLI::App* sub = app.add_subcommand(command.name, command.description);
        command.args.attach(sub);
        sub->callback([&command] { command.run(command.args.resolve()); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const meritluck::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
