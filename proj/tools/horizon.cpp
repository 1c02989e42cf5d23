// horizon: command-line front end. Every config key is also a --<key> flag;
// flags override values read from --config.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "horizon/registry.hpp"
#include "horizon/runner.hpp"

int main(int argc, char** argv) {
    using namespace horizon;

    CLI::App app{"Numerical analysis of planar vector fields on the exterior of a disk"};
    app.require_subcommand(0, 1);

    std::string config_path;
    bool list_fields = false;
    app.add_option("--config", config_path, "key = value config file");
    app.add_flag("--list-fields", list_fields, "print the registry and exit");

    std::map<std::string, std::string> flags;
    for (const auto& key : config_keys()) {
        if (key.name == "subcommand") continue;
        app.add_option("--" + key.name, flags[key.name], key.help);
    }
    for (const auto& name : subcommands()) app.add_subcommand(name, "run the " + name + " stage")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (list_fields) {
        for (const auto& e : registry()) std::cout << e.name << "  sigma=" << e.sigma << "  " << e.formula << "\n";
        return kExitOk;
    }

    RunConfig cfg;
    try {
        if (!config_path.empty()) apply_config_file(cfg, config_path);
        for (const auto& key : config_keys()) {
            if (key.name == "subcommand") continue;
            if (app.count("--" + key.name) > 0) set_config_value(cfg, key.name, flags[key.name]);
        }
        for (const auto* sub : app.get_subcommands()) set_config_value(cfg, "subcommand", sub->get_name());
    } catch (const ConfigError& e) {
        std::cerr << "horizon: config error: " << e.what() << "\n";
        return kExitConfig;
    }
    return run(cfg, std::cerr);
}
