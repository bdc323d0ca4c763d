#pragma once

#include "qosdiff/mechanism.hpp"
#include "qosdiff/model.hpp"
#include "qosdiff/queueing.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qosdiff::optimizer {

// Delay comparisons (t_1 <= T, T < t_2 < ... < t_L) use this resolution.
inline constexpr double kDelayTolerance = 1e-12;

// All m servers run FCFS for a single SLA.
struct OnDemand {
    std::size_t servers = 0;
};

// Servers split into one FCFS module per SLA.
struct Sms {
    std::vector<std::size_t> partition;
};

// All servers shared; SLA index is the non-preemptive priority class.
struct Pbs {
    std::size_t servers = 0;
};

// FCFS module for SLA 1 plus a shared priority pool for SLAs 2..L.
struct Hybrid {
    std::size_t first = 0;
    std::size_t second = 0;
};

using Layout = std::variant<OnDemand, Sms, Pbs, Hybrid>;

enum class ArchKind { OnDemand, Sms, Pbs, Hybrid };

std::string_view to_string(ArchKind kind);
std::optional<ArchKind> parse_arch(std::string_view name);

struct ArchitectureConfig {
    Layout layout;
    queueing::ServiceDist dist;

    ArchKind kind() const noexcept;
    std::size_t total_servers() const noexcept;
    // Throws InvalidParameter on zero-sized modules or pools.
    void validate() const;
};

struct Problem {
    model::WtpModel model;
    model::TypePopulation population;
    std::size_t servers = 0;
    queueing::ServiceDist dist;

    // Model validity, servers >= 1, and a service distribution whose mean
    // matches the population's mean service time.
    void validate() const;
    double load() const { return population.total_rate() / static_cast<double>(servers); }
    Problem with_load(double per_server_load) const;
};

struct OptResult {
    mechanism::SlaMenu menu;
    mechanism::Segmentation segmentation;
    ArchitectureConfig architecture;
    std::vector<double> class_rates;   // Lambda_l
    std::vector<double> server_loads;  // per-server arrival rate of each SLA
    double revenue = 0.0;
    double gamma = 0.0;
    double load = 0.0;                 // Lambda / m
    bool exact = true;
    std::vector<std::string> warnings;
};

struct Infeasible {
    std::string reason;
};

using Evaluation = std::variant<OptResult, Infeasible>;

// Revenue of serving everything on demand at the largest load meeting T:
// m * p * s * T / (A + T s).
double od_revenue(std::size_t servers, const model::WtpModel& model, const queueing::ServiceDist& dist);

// Smallest number of FCFS servers keeping the delay of a stream of rate
// `rate` within T; nullopt when more than `limit` would be needed.
std::optional<std::size_t> min_servers_for_delay(double rate, double od_delay, const queueing::ServiceDist& dist,
                                                 std::size_t limit);

// Candidate evaluation. `cuts` are the 1-based first types i_2..i_L of SLAs
// 2..L. SLA delays are set to the actual waiting times (phi_1 = T,
// phi_l = t_l), prices follow the indifference rule.
Evaluation evaluate_on_demand(const Problem& problem);
Evaluation evaluate_sms(const Problem& problem, std::span<const std::size_t> partition,
                        std::span<const std::size_t> cuts);
Evaluation evaluate_pbs(const Problem& problem, std::span<const std::size_t> cuts);
Evaluation evaluate_hybrid(const Problem& problem, std::size_t first_part, std::span<const std::size_t> cuts);

struct SearchOptions {
    unsigned threads = 1;
    // Largest number of cut tuples searched exhaustively.
    std::size_t candidate_budget = 20000;
    // Beyond the budget: coordinate search over cuts (result.exact = false)
    // instead of throwing SearchTooLarge.
    bool best_effort = false;
    // Wall-clock cap for best-effort search; 0 disables it. When it triggers
    // results are no longer reproducible run to run.
    double time_budget_seconds = 0.0;
};

// Revenue-maximizing configuration at the problem's arrival rate. Ties go to
// the lexicographically smallest (partition, cuts). Throw
// NoFeasibleCandidate when nothing is feasible.
OptResult optimize_sms(const Problem& problem, std::size_t sla_count, const SearchOptions& options = {});
OptResult optimize_pbs(const Problem& problem, std::size_t sla_count, const SearchOptions& options = {});
OptResult optimize_hybrid(const Problem& problem, std::size_t sla_count, const SearchOptions& options = {});
OptResult optimize(ArchKind kind, const Problem& problem, std::size_t sla_count, const SearchOptions& options = {});

// Best result over per-server loads; the population rate is rescaled to
// load * m for every grid point. Ties go to the smaller load.
OptResult optimize_over_loads(ArchKind kind, const Problem& problem, std::size_t sla_count,
                              std::span<const double> loads, const SearchOptions& options = {});

struct SweepRow {
    double load = 0.0;
    std::optional<OptResult> result;
    std::string failure;  // set when result is empty
};

std::vector<SweepRow> sweep_load(ArchKind kind, const Problem& problem, std::size_t sla_count,
                                 std::span<const double> loads, const SearchOptions& options = {});

// 0.05, 0.06, ..., 0.30.
std::vector<double> default_load_grid();
// PBS is only feasible below T/A; `points` uniform loads in (0, T/A) plus
// the on-demand load itself, sorted.
std::vector<double> pbs_load_grid(const model::WtpModel& model, const queueing::ServiceDist& dist,
                                  std::size_t points = 200);

// 1 + T/A.
double pbs_upper_bound(double od_delay, const queueing::ServiceDist& dist);

// Two-SLA revenue ratio with fractional server counts: types with
// alpha > alpha_split get SLA 1, the rest get SLA 2 at delay phi2.
double sms_lower_bound(const model::WtpModel& model, const model::TypePopulation& population, double alpha_split,
                       double phi2, const queueing::ServiceDist& dist);

// Closed form for beta = 3 with an even split:
// 1.875 (1 + A/T) / (2 + A/T + 2A/phi0_hat).
double sms_lower_bound_beta3(double od_delay, double phi0_hat, const queueing::ServiceDist& dist);

} // namespace qosdiff::optimizer
