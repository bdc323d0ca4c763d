#include "qosdiff/queueing.hpp"

#include "qosdiff/errors.hpp"

#include <cmath>
#include <string>

namespace qosdiff::queueing {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_stable(double load, const char* where)
{
    if (!(load < 1.0 - kStabilityMargin)) {
        throw UnstableQueue(std::string(where) + ": load " + std::to_string(load) + " is not below 1");
    }
}

} // namespace

ServiceDist ServiceDist::exponential(double mean)
{
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        throw InvalidParameter("exponential: mean must be positive");
    }
    return ServiceDist(Exponential{mean});
}

ServiceDist ServiceDist::hyperexponential(std::vector<Branch> branches)
{
    if (branches.empty()) {
        throw InvalidParameter("hyperexponential: at least one branch is required");
    }
    double total = 0.0;
    for (const auto& b : branches) {
        if (!(b.weight > 0.0) || !(b.weight <= 1.0)) {
            throw InvalidParameter("hyperexponential: branch weights must lie in (0, 1]");
        }
        if (!(b.mean > 0.0) || !std::isfinite(b.mean)) {
            throw InvalidParameter("hyperexponential: branch means must be positive");
        }
        total += b.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw InvalidParameter("hyperexponential: weights sum to " + std::to_string(total));
    }
    return ServiceDist(HyperExponential{std::move(branches)});
}

ServiceDist ServiceDist::from_rates(std::span<const Branch> weight_rate_pairs)
{
    std::vector<Branch> branches;
    branches.reserve(weight_rate_pairs.size());
    for (const auto& wr : weight_rate_pairs) {
        if (!(wr.mean > 0.0)) {
            throw InvalidParameter("hyperexponential: branch rates must be positive");
        }
        branches.push_back({wr.weight, 1.0 / wr.mean});
    }
    return hyperexponential(std::move(branches));
}

ServiceDist ServiceDist::unit_mean_two_branch(double weight1, double mean1)
{
    if (!(weight1 > 0.0) || !(weight1 < 1.0)) {
        throw InvalidParameter("two-branch hyperexponential: weight must lie in (0, 1)");
    }
    const double weight2 = 1.0 - weight1;
    const double mean2 = (1.0 - weight1 * mean1) / weight2;
    if (!(mean1 > 0.0) || !(mean2 > 0.0)) {
        throw InvalidParameter("two-branch hyperexponential: no positive second mean gives overall mean 1");
    }
    return hyperexponential({{weight1, mean1}, {weight2, mean2}});
}

double ServiceDist::mean() const noexcept
{
    return std::visit(Overloaded{
                          [](const Exponential& e) { return e.mean; },
                          [](const HyperExponential& h) {
                              double m = 0.0;
                              for (const auto& b : h.branches) {
                                  m += b.weight * b.mean;
                              }
                              return m;
                          },
                      },
                      dist_);
}

double ServiceDist::second_moment() const noexcept
{
    return std::visit(Overloaded{
                          [](const Exponential& e) { return 2.0 * e.mean * e.mean; },
                          [](const HyperExponential& h) {
                              double m2 = 0.0;
                              for (const auto& b : h.branches) {
                                  m2 += 2.0 * b.mean * b.mean * b.weight;
                              }
                              return m2;
                          },
                      },
                      dist_);
}

double second_moment(const ServiceDist& dist)
{
    return dist.second_moment();
}

double residual_term(const ServiceDist& dist)
{
    return 0.5 * dist.second_moment();
}

double fcfs_delay(double lambda, const ServiceDist& dist)
{
    if (!(lambda >= 0.0)) {
        throw DomainError("fcfs_delay: arrival rate must be non-negative");
    }
    const double load = lambda * dist.mean();
    check_stable(load, "fcfs_delay");
    return residual_term(dist) * lambda / (1.0 - load);
}

std::vector<double> priority_delays(std::span<const double> class_lambdas, const ServiceDist& dist)
{
    if (class_lambdas.empty()) {
        throw InvalidParameter("priority_delays: at least one class is required");
    }
    double total = 0.0;
    for (double r : class_lambdas) {
        if (!(r >= 0.0)) {
            throw DomainError("priority_delays: class rates must be non-negative");
        }
        total += r;
    }
    const double s = dist.mean();
    check_stable(total * s, "priority_delays");

    const double work = residual_term(dist) * total;
    std::vector<double> delays;
    delays.reserve(class_lambdas.size());
    double above = 0.0;  // cumulative load of strictly higher classes
    for (double r : class_lambdas) {
        const double through = above + r * s;
        delays.push_back(work / ((1.0 - above) * (1.0 - through)));
        above = through;
    }
    return delays;
}

std::vector<double> hybrid_delays(std::span<const double> class_lambdas, const ServiceDist& dist)
{
    // The second part is a plain priority pool over SLAs 2..L.
    return priority_delays(class_lambdas, dist);
}

double od_max_load(double od_delay, const ServiceDist& dist)
{
    if (!(od_delay > 0.0)) {
        throw DomainError("od_max_load: T must be positive");
    }
    // Solve A * lambda / (1 - lambda * s) = T for lambda.
    return od_delay / (residual_term(dist) + od_delay * dist.mean());
}

double required_servers_fractional(double sla_rate, double sla_delay, const ServiceDist& dist)
{
    if (!(sla_rate > 0.0) || !(sla_delay > 0.0)) {
        throw DomainError("required_servers_fractional: rate and delay must be positive");
    }
    return sla_rate * (sla_delay * dist.mean() + residual_term(dist)) / sla_delay;
}

} // namespace qosdiff::queueing
