#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ccn/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Continuation and verification runs for concave-convex Neumann problems"};
    std::string config;
    app.add_option("config", config, "Run configuration (key = value lines)")->required();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : ccn::kExitConfig;
    }
    return ccn::run_config_file(config, std::cout, std::cerr);
}
