#pragma once

#include "qosdiff/optimizer.hpp"
#include "qosdiff/queueing.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace qosdiff::simulator {

enum class Dispatch { Random, RoundRobin };

// Jobs beyond this many waiting at one server abort the run.
inline constexpr std::size_t kQueueOverflow = 10'000'000;

struct SimConfig {
    std::uint64_t seed = 1;
    // Unset: max(1e5, 10 x the longest predicted relaxation time in jobs).
    std::optional<std::uint64_t> warmup_jobs;
    std::uint64_t measured_jobs = 1'000'000;
    std::size_t replications = 10;
    Dispatch dispatch = Dispatch::Random;
    unsigned threads = 1;
    // Per-job trace of replication 0: "arrival,start,class,server" rows.
    std::ostream* trace = nullptr;

    // measured_jobs >= 1e4 and replications >= 5 are needed for the
    // reported confidence intervals; smaller values are rejected.
    void validate() const;
};

struct Estimate {
    double mean = 0.0;
    double half_width = 0.0;  // 95 % Student-t over replication means
};

struct SimReport {
    std::vector<Estimate> wait;                // per class
    std::vector<Estimate> throughput;          // completions per unit time, per class
    std::vector<Estimate> arrival_rate;        // observed, per class
    std::vector<Estimate> queue_length;        // time-average jobs waiting, per class
    std::vector<Estimate> little;              // observed arrival rate x mean wait, per class
    std::vector<double> server_utilization;    // per server, mean over replications
    Estimate utilization;                      // busy fraction over all servers
    std::uint64_t jobs_simulated = 0;          // all replications, warmup included
    std::uint64_t warmup_jobs = 0;
    std::size_t replications = 0;
};

// Class l arrives as a Poisson stream of rate class_rates[l]. Class to pool
// mapping: on-demand and PBS use one pool for every class (PBS by priority,
// lower class first); SMS gives class l its own FCFS pool; the hybrid sends
// class 0 to the FCFS first part and the rest to the priority second part.
// Throws UnstableQueue when some server would be loaded at or beyond 1,
// InvalidParameter on a class count the layout cannot serve.
SimReport simulate(const optimizer::ArchitectureConfig& arch, std::span<const double> class_rates,
                   const SimConfig& config);

// Mean waits the M/G/1 formulas predict for the same arrangement.
std::vector<double> analytic_waits(const optimizer::ArchitectureConfig& arch, std::span<const double> class_rates);

struct ValidationReport {
    std::vector<double> predicted;
    std::vector<double> simulated;
    std::vector<double> half_width;
    std::vector<double> deviation;  // |simulated - predicted| / predicted
    double tolerance = 0.03;
    bool pass = false;
};

ValidationReport validate_formulas(const optimizer::ArchitectureConfig& arch, std::span<const double> class_rates,
                                   const SimConfig& config, std::span<const double> predicted,
                                   double tolerance = 0.03);

} // namespace qosdiff::simulator
