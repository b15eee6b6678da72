#pragma once

#include "config.hpp"
#include "csv.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace kmx::tools {

struct Check {
    std::string name;
    bool passed;
    std::string detail;
    bool gating = true;  // informational checks are reported but never fail a run
};

Check within(std::string name, double got, double want, double tol, bool gating = true);
Check holds(std::string name, bool ok, std::string detail, bool gating = true);

struct RunOptions {
    std::uint64_t seed = 20240611;
    int threads = 0;
    Config settings;  // per-experiment overrides, e.g. tau=0.5 or paths=50000
};

struct ExperimentResult {
    Table table;
    std::vector<Check> checks;
    std::vector<std::pair<std::string, std::string>> params;  // echoed into the CSV header

    bool passed() const;
};

struct Experiment {
    std::string id;
    std::string description;
    std::function<ExperimentResult(const RunOptions&)> run;
};

const std::vector<Experiment>& registry();
const Experiment& find_experiment(const std::string& id);  // throws std::out_of_range

}  // namespace kmx::tools
