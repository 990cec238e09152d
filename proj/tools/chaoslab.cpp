#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "chaoslab/config.hpp"

namespace {

constexpr const char* kSubcommands[] = {"oracle-rates", "hierarchy-certify", "chaos-mc", "flows-check",
                                        "quantization-demo"};

int run(const std::string& subcommand, const std::string& config_path)
{
    using namespace chaoslab;
    ExperimentConfig cfg = load_config(config_path);
    if (cfg.experiment != subcommand)
        throw ConfigError("configuration is for '" + cfg.experiment + "', not '" + subcommand + "'");

    const char* env = std::getenv(kOutputDirEnv);
    const std::string dir = env ? env : "";

    ExperimentOutput out = run_experiment(cfg);

    for (const auto& table : out.tables) {
        const auto path = table_path(cfg, table.suffix, dir);
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        std::ofstream os(path, std::ios::binary);
        os << table.csv;
        if (!os) throw std::runtime_error("failed to write " + path.string());
        std::cout << "wrote " << path.string() << "\n";
    }

    bool ok = true;
    for (const auto& v : out.verdicts) {
        const char* tag = v.informational ? "INFO" : (v.pass ? "PASS" : "FAIL");
        std::cout << tag << " " << v.name << ": " << v.message << "\n";
        if (!v.pass && !v.informational) {
            std::cerr << "FAIL " << v.name << ": " << v.message << "\n";
            ok = false;
        }
    }
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mean-field particle system experiments"};
    app.require_subcommand(1, 1);
    std::string config_path;
    for (const char* name : kSubcommands) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("config", config_path, "JSON configuration file")->required()->check(CLI::ExistingFile);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        return run(app.get_subcommands().front()->get_name(), config_path);
    } catch (const chaoslab::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
