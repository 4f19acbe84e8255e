// bsshift command-line driver.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bsshift/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Multiphoton level splittings of a two-level system coupled to an oscillator"};
    app.set_version_flag("--version", bsshift::tool_version());
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    int threads = 1;
    bool dump = false;
    app.add_option("--config", config_path, "key=value configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_flag("--dump-wavefunctions", dump, "write (y,u) CSVs of the grid eigenfunctions");

    struct Command {
        const char* name;
        const char* help;
        int (*run)(const bsshift::CommandContext&);
    };
    const Command commands[] = {
        {"sweep", "spectrum of H on the configured g grid", bsshift::cmd_spectrum_sweep},
        {"fig1", "exact splitting vs weak-coupling formula per resonance", bsshift::cmd_fig1},
        {"fig2", "exact splitting vs rotated-frame perturbation theory", bsshift::cmd_fig2},
        {"resonance", "all splitting estimates per resonance", bsshift::cmd_resonance},
        {"verify", "run the invariant suites and print a report", bsshift::cmd_verify},
        {"converge", "basis and grid refinement study", bsshift::cmd_converge},
    };
    for (const auto& c : commands) app.add_subcommand(c.name, c.help)->fallthrough();
    app.get_subcommand("verify")->alias("verify-rotation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : bsshift::exit_config_error;
    }

    bsshift::CommandContext ctx;
    try {
        if (!config_path.empty()) ctx.config = bsshift::load_config(config_path);
        if (!out_dir.empty()) ctx.config.output_dir = out_dir;
        ctx.config.validate();
    } catch (const bsshift::Error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return bsshift::exit_config_error;
    }
    ctx.threads = threads;
    ctx.dump_wavefunctions = dump;

    for (const auto& c : commands)
        if (app.got_subcommand(c.name)) return c.run(ctx);
    return bsshift::exit_config_error;
}
