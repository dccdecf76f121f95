#pragma once

// Flat `key = value` run configuration. '#' starts a comment. Relative paths
// are resolved against the directory holding the config file.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "povmap/data.hpp"
#include "povmap/decide.hpp"
#include "povmap/fgt.hpp"
#include "povmap/sampler.hpp"
#include "povmap/synth.hpp"

namespace povmap {

struct RunConfig {
    std::string households_path = "households.csv";
    std::string covariates_path = "covariates.csv";
    std::map<std::string, CovariateTransform> transforms;
    PovertyLines lines{80.0, 60.0};
    std::vector<double> alphas = {0.0, 1.0};

    PriorConfig priors;
    McmcConfig mcmc;
    std::uint64_t seed = 1;
    Monitor monitor = Monitor::HyperAndMu;
    double rhat_threshold = 1.1;

    std::vector<double> multipliers = kDefaultMultipliers;
    double cutoff = kDefaultCutoff;
    unsigned qmatrix_threads = 1;
    std::string out_dir = "out";

    SyntheticConfig simulation;
    SampleDesign design{4, 8};

    // Sets one key; throws InvalidConfig for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    void validate() const;
};

RunConfig parse_run_config(std::istream& in, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// Serialises every key, so a run can be replayed from the written file.
void write_run_config(std::ostream& out, const RunConfig& config);

}  // namespace povmap
