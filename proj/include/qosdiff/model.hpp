#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qosdiff::model {

// Willingness-to-pay family u(alpha, phi) = p * (1 - (alpha * (phi - T))^beta).
//
// u(alpha, T) = p for every type; for phi > T the value falls faster for
// larger alpha, and it crosses zero at phi = 1/alpha + T.
struct WtpModel {
    double price = 1.0;      // on-demand price per unit of service time
    double od_delay = 0.05;  // on-demand delay bound T
    double beta = 3.0;       // curvature exponent, >= 2

    // Throws InvalidParameter when price <= 0, od_delay <= 0 or beta < 2.
    void validate() const;
};

// Raw WTP. Not clamped: values below zero mean the customer would refuse.
double wtp(const WtpModel& model, double alpha, double phi);

// Delay at which the WTP of type alpha reaches zero: 1/alpha + T.
double zero_value_delay(const WtpModel& model, double alpha);

// Finite population of delay-cost types, ordered from the most delay
// sensitive (largest alpha) to the least sensitive (smallest alpha).
class TypePopulation {
public:
    static TypePopulation create(std::vector<double> alphas, std::vector<double> probs,
                                 double total_rate, double mean_service = 1.0);

    std::size_t size() const noexcept { return alphas_.size(); }
    std::span<const double> alphas() const noexcept { return alphas_; }
    std::span<const double> probs() const noexcept { return probs_; }
    double alpha(std::size_t i) const { return alphas_.at(i); }
    double prob(std::size_t i) const { return probs_.at(i); }
    double total_rate() const noexcept { return total_rate_; }
    double mean_service() const noexcept { return mean_service_; }
    double max_alpha() const noexcept { return alphas_.front(); }
    double min_alpha() const noexcept { return alphas_.back(); }

    // Probability mass of types [first, last).
    double mass(std::size_t first, std::size_t last) const;

    // Same types and probabilities, different arrival rate.
    TypePopulation with_total_rate(double total_rate) const;

private:
    TypePopulation() = default;

    std::vector<double> alphas_;
    std::vector<double> probs_;
    double total_rate_ = 0.0;
    double mean_service_ = 1.0;
};

// Uniform grid population: type i (1-based) has 1/alpha_i = epsilon for i = 1
// and (i - 1) * delta otherwise; every type has probability 1/n.
TypePopulation grid_population(std::size_t n, double delta, double epsilon, double total_rate);

} // namespace qosdiff::model
