#pragma once

#include <span>
#include <variant>
#include <vector>

namespace qosdiff::queueing {

// Loads closer to 1 than this are rejected as unstable.
inline constexpr double kStabilityMargin = 1e-9;

struct Exponential {
    double mean = 1.0;
};

// One exponential phase of a hyperexponential: chosen with probability
// `weight`, mean `mean`.
struct Branch {
    double weight = 1.0;
    double mean = 1.0;
};

struct HyperExponential {
    std::vector<Branch> branches;
};

// Service-time distribution. Hyperexponential branches are parameterized by
// their means, not their rates; see from_rates() for the other convention.
class ServiceDist {
public:
    using Variant = std::variant<Exponential, HyperExponential>;

    // Exponential with mean 1.
    ServiceDist() : dist_(Exponential{1.0}) {}

    static ServiceDist exponential(double mean = 1.0);
    static ServiceDist hyperexponential(std::vector<Branch> branches);
    // Branches given as (weight, rate) pairs; converted to means 1/rate.
    static ServiceDist from_rates(std::span<const Branch> weight_rate_pairs);
    // Two branches with weight w1 / 1 - w1 and the second mean chosen so the
    // overall mean is 1: mean2 = (1 - w1 * mean1) / (1 - w1).
    static ServiceDist unit_mean_two_branch(double weight1, double mean1);

    const Variant& variant() const noexcept { return dist_; }
    bool is_exponential() const noexcept { return std::holds_alternative<Exponential>(dist_); }

    double mean() const noexcept;
    double second_moment() const noexcept;

private:
    explicit ServiceDist(Variant dist) : dist_(std::move(dist)) {}

    Variant dist_;
};

double second_moment(const ServiceDist& dist);

// A = E[x^2] / 2, the mean residual-work constant of every M/G/1 formula.
double residual_term(const ServiceDist& dist);

// Mean waiting time (arrival to service start) of an M/G/1 FCFS queue with
// arrival rate `lambda`. Throws UnstableQueue when lambda * E[x] >= 1.
double fcfs_delay(double lambda, const ServiceDist& dist);

// Mean waiting time per class of an M/G/1 non-preemptive priority queue.
// Class 0 has the highest priority:
//   t_l = A * lambda / ((1 - rho_{l-1}) * (1 - rho_l)),
// with lambda the total rate and rho_l the cumulative load of classes 0..l.
std::vector<double> priority_delays(std::span<const double> class_lambdas, const ServiceDist& dist);

// Delays of SLAs 2..L on the shared second part of the hybrid architecture.
// `class_lambdas` are the per-server rates of SLAs 2..L, highest priority first.
std::vector<double> hybrid_delays(std::span<const double> class_lambdas, const ServiceDist& dist);

// Largest per-server arrival rate whose FCFS delay equals T.
double od_max_load(double od_delay, const ServiceDist& dist);

// Fractional number of FCFS servers at which a stream of rate `sla_rate`
// split evenly sees a mean delay of exactly `sla_delay`.
double required_servers_fractional(double sla_rate, double sla_delay, const ServiceDist& dist);

} // namespace qosdiff::queueing
