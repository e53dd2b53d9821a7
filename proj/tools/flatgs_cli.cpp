// Command-line front end: one subcommand per experiment kind.
//
//   flatgs <kind> --config run.json [--out DIR] [--seed S] [--parallel K]
//
// Exit codes: 0 success, 2 configuration error, 3 solver failure.
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "flatgs/error.hpp"
#include "flatgs/harness.hpp"
#include "json.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw flatgs::ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flat ground states of -Δu + u^α = λu^β: experiments and sweeps"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> parallel;
    bool quiet = false;

    const char* kinds[] = {"classify",   "shoot",      "nehari",   "jmin",  "evolve", "stability",
                           "global-instability", "extinction", "spectrum", "sweep"};
    for (const char* k : kinds) {
        CLI::App* sub = app.add_subcommand(k, std::string("run a ") + k + " experiment");
        sub->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides the config)");
        sub->add_option("--seed", seed, "seed for randomized ingredients (overrides the config)");
        sub->add_option("--parallel", parallel, "concurrent sweep points")->check(CLI::PositiveNumber);
        sub->add_flag("--quiet", quiet, "do not print the report");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }
    const std::string kind = app.get_subcommands().front()->get_name();

    try {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(read_file(config_path));
        } catch (const nlohmann::json::parse_error& e) {
            throw flatgs::ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) throw flatgs::ConfigError("config: expected a JSON object");
        if (!doc.contains("experiment")) doc["experiment"] = kind;
        if (doc["experiment"] != kind)
            throw flatgs::ConfigError("experiment: config says " + doc["experiment"].dump() + " but the " +
                                      kind + " subcommand was used");

        flatgs::ExperimentConfig cfg = flatgs::parse_config(doc.dump());
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed) cfg.seed = *seed;
        if (parallel) cfg.parallel = *parallel;

        const flatgs::RunReport rep = flatgs::run(cfg);
        if (!quiet) std::cout << rep.json << "\n";
        return 0;
    } catch (const flatgs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const flatgs::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        if (!e.diagnostics().empty()) {
            std::cerr << "diagnostics:";
            for (double d : e.diagnostics()) std::cerr << " " << d;
            std::cerr << "\n";
        }
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return kExitSolver;
    }
}
