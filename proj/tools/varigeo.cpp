#include "varigeo/cli.hpp"

#include <iostream>

#include "CLI11.hpp"

int main(int argc, char** argv) {
    CLI::App app{"symbolic-numeric workbench for variational dynamics"};
    app.require_subcommand(1);

    std::string file;
    varigeo::cli::Options opts;
    std::string command;
    for (const char* name : {"derive", "classify", "integrate", "verify"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("file", file, "problem file")->required();
        sub->add_option("--out", opts.out, "write the JSON report here");
        sub->add_option("--seed", opts.seed, "zero-test RNG seed");
        sub->add_option("--trials", opts.trials, "zero-test trial count");
        sub->callback([&command, name] { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    return varigeo::cli::run(command, file, opts, std::cout, std::cerr);
}
