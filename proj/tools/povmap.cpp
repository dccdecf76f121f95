// povmap: small-area poverty estimation from household survey data.
//
//   povmap simulate --config run.txt --out data/
//   povmap validate --config data/config.txt
//   povmap fit      --config data/config.txt
//   povmap qmatrix  --config data/config.txt
//   povmap report   --config data/config.txt
//   povmap diagnose --config data/config.txt

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "povmap/pipeline.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Bayesian small-area poverty estimation"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "Run configuration (key = value lines)");
    app.add_option("--seed", seed, "Override the master seed");
    app.add_option("--out", out_dir, "Override the output directory");
    app.add_option("--set", overrides, "Override any config key, as key=value")->take_all();

    struct Stage {
        const char* name;
        const char* help;
        int (*run)(const povmap::RunConfig&, std::ostream&);
    };
    const std::vector<Stage> stages = {
        {"validate", "Check input files and report every problem", povmap::cmd_validate},
        {"fit", "Run the MCMC chains and write draws.csv and psrf.csv", povmap::cmd_fit},
        {"qmatrix", "Build the Q-matrix for each alpha from draws.csv", povmap::cmd_qmatrix},
        {"report", "Write point, flag and extreme-comuna tables", povmap::cmd_report},
        {"simulate", "Generate a synthetic population and survey sample", povmap::cmd_simulate},
        {"diagnose", "Recompute split R-hat from draws.csv", povmap::cmd_diagnose},
    };
    std::vector<CLI::App*> commands;
    for (const auto& stage : stages) {
        commands.push_back(app.add_subcommand(stage.name, stage.help));
    }

    CLI11_PARSE(app, argc, argv);

    povmap::RunConfig config;
    try {
        if (!config_path.empty()) config = povmap::load_run_config(config_path);
        for (const auto& item : overrides) {
            const auto eq = item.find('=');
            if (eq == std::string::npos) {
                throw povmap::Error(povmap::ErrorCode::InvalidConfig, "--set expects key=value, got '" + item + "'");
            }
            config.set(item.substr(0, eq), item.substr(eq + 1));
        }
        if (seed) config.set("seed", std::to_string(*seed));
        if (!out_dir.empty()) config.out_dir = out_dir;
    } catch (const povmap::Error& e) {
        std::cerr << "error," << povmap::to_string(e.code()) << ",," << e.what() << '\n';
        return povmap::kExitValidation;
    }

    for (std::size_t i = 0; i < stages.size(); ++i) {
        if (commands[i]->parsed()) return stages[i].run(config, std::cout);
    }
    return povmap::kExitRuntime;
}
