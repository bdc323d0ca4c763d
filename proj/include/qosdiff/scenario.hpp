#pragma once

#include "qosdiff/model.hpp"
#include "qosdiff/optimizer.hpp"
#include "qosdiff/queueing.hpp"
#include "qosdiff/simulator.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qosdiff::scenario {

// Type population: either the uniform grid or an explicit list.
struct PopulationSpec {
    std::size_t n = 50;
    double delta = 0.02;
    double epsilon = 1e-6;
    std::vector<double> alphas;  // explicit types when non-empty
    std::vector<double> probs;
};

struct SimulationSpec {
    simulator::SimConfig config;
    // Explicit arrangement to simulate; unset means "the optimizer's best
    // configuration for this scenario".
    std::optional<optimizer::Layout> layout;
    std::vector<double> rates;
    std::string trace_path;
    double tolerance = 0.03;
};

struct Scenario {
    std::string name;
    std::string preset;
    model::WtpModel wtp;
    PopulationSpec population;
    queueing::ServiceDist dist;
    optimizer::ArchKind arch = optimizer::ArchKind::Sms;
    std::size_t slas = 2;
    std::size_t servers = 100;
    std::vector<double> loads;  // empty: architecture default grid, plus the on-demand load for L = 1
    optimizer::SearchOptions search;
    SimulationSpec simulation;
    std::string output_dir = "out";
    std::string source;  // text the scenario was parsed from

    // Population scaled to per-server load `load`.
    model::TypePopulation make_population(double load) const;
    optimizer::Problem problem(double load) const;
    // Explicit grid, or the default for the architecture.
    std::vector<double> load_grid() const;

    // Every violated invariant; empty when the scenario is usable.
    std::vector<std::string> problems() const;
    // Throws ScenarioError(Validation) listing problems().
    void validate() const;
};

std::vector<std::string> preset_names();

// Defaults plus the named preset ("grid-low": delta 0.02, "grid-high":
// delta 0.04). Throws ScenarioError for an unknown name.
Scenario from_preset(std::string_view name);

// Parses the key tree documented in the README. Unknown keys, wrong value
// types and invariant violations are all reported with their line numbers.
Scenario parse_scenario(std::string_view text, std::string_view origin = "<scenario>");
Scenario load_scenario(const std::string& path);

} // namespace qosdiff::scenario
