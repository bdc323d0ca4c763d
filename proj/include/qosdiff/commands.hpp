#pragma once

#include "qosdiff/scenario.hpp"

#include "json.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace qosdiff::cli {

enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kValidation = 3,
    kInfeasible = 4,
    kDomain = 5,
    kSimulationMismatch = 6,
};

struct Outcome {
    nlohmann::json summary = nlohmann::json::object();
    std::vector<std::string> files;  // written, relative to the output directory
    int exit_code = kOk;
};

// Hex SHA-256 of `text`.
std::string sha256_hex(std::string_view text);
// `git describe` of the source tree at configure time.
std::string source_version();

// Each command writes its CSV files into scenario.output_dir and returns the
// results that go into summary.json.
Outcome cmd_optimize(const scenario::Scenario& sc);
Outcome cmd_bounds(const scenario::Scenario& sc);
Outcome cmd_simulate(const scenario::Scenario& sc, bool validate);
Outcome cmd_dsic(const scenario::Scenario& sc);

std::vector<std::string> reproduce_targets();
// `max_slas` caps the L range of the sweep-based targets.
Outcome cmd_reproduce(const scenario::Scenario& sc, std::string_view target, std::size_t max_slas = 6);

// Adds provenance (command, scenario hash, source version, wall time) and
// writes summary.json next to the CSV files.
void write_summary(const scenario::Scenario& sc, std::string_view command, double wall_seconds, Outcome& outcome);

} // namespace qosdiff::cli
