#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lobc/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"lobc-lab: radial Pucci/Hamilton-Jacobi experiments"};
    app.require_subcommand(1);

    std::string config;
    lobc::cli::CliOptions opts;
    std::string out;

    auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", config, "config file")->required();
        sub->add_option("--jobs,-j", opts.jobs, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--out,-o", out, "output directory (overrides outputs.directory)");
        return sub;
    };
    CLI::App* simulate = add("simulate", "evolve one initial datum and record events");
    CLI::App* eigen = add("eigen", "principal eigenpairs over an eps list");
    CLI::App* sweep = add("sweep", "bisect the amplitude for the LOBC threshold");
    CLI::App* check = add("check", "run the property suites");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return lobc::cli::config_error;
    }
    if (!out.empty()) opts.out = out;

    if (simulate->parsed()) return lobc::cli::cmd_simulate(config, opts);
    if (eigen->parsed()) return lobc::cli::cmd_eigen(config, opts);
    if (sweep->parsed()) return lobc::cli::cmd_sweep(config, opts);
    if (check->parsed()) return lobc::cli::cmd_check(config, opts);
    return lobc::cli::config_error;
}
