#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cylmart/errors.hpp"
#include "cylmart/experiment.hpp"
#include "cylmart/version.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cylmart::ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cylmart: seeded verification campaigns for cylindrical "
                 "martingale numerics"};
    app.set_version_flag("--version", cylmart::kLibraryVersion);

    std::string kind;
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;

    app.add_option("kind", kind,
                   "simulate | reconstruct | timechange | counterexample | "
                   "calculus-selftest")
        ->required();
    app.add_option("--config", config_path, "experiment config JSON")
        ->required();
    auto* seed_opt =
        app.add_option("--seed", seed, "override the config seed");
    app.add_option("--out", out_dir, "override the output directory");

    CLI11_PARSE(app, argc, argv);
    seed_set = seed_opt->count() > 0;

    try {
        const nlohmann::json j = nlohmann::json::parse(read_file(config_path));
        cylmart::ExperimentConfig cfg = cylmart::ExperimentConfig::from_json(j);
        if (cfg.kind != kind)
            throw cylmart::ConfigError("config kind '" + cfg.kind +
                                       "' does not match requested '" + kind +
                                       "'");
        if (seed_set) cfg.seed = seed;
        if (!out_dir.empty()) cfg.out_dir = out_dir;

        const cylmart::RunReport report = cylmart::run(cfg);
        std::cout << cylmart::report_render(report);
        return report.all_pass ? 0 : 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config parse error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
