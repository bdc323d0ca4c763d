#include "qosdiff/model.hpp"

#include "qosdiff/errors.hpp"

#include <cmath>
#include <string>

namespace qosdiff::model {

void WtpModel::validate() const
{
    if (!(price > 0.0) || !std::isfinite(price)) {
        throw InvalidParameter("wtp: price must be positive, got " + std::to_string(price));
    }
    if (!(od_delay > 0.0) || !std::isfinite(od_delay)) {
        throw InvalidParameter("wtp: on-demand delay T must be positive, got " + std::to_string(od_delay));
    }
    if (!(beta >= 2.0) || !std::isfinite(beta)) {
        throw InvalidParameter("wtp: beta must be >= 2, got " + std::to_string(beta));
    }
}

double wtp(const WtpModel& model, double alpha, double phi)
{
    model.validate();
    if (!(alpha > 0.0)) {
        throw DomainError("wtp: alpha must be positive");
    }
    if (!(phi >= model.od_delay)) {
        throw DomainError("wtp: delay " + std::to_string(phi) + " is below the on-demand delay "
                          + std::to_string(model.od_delay));
    }
    const double scaled = alpha * (phi - model.od_delay);
    if (model.beta == 3.0) {
        return model.price * (1.0 - scaled * scaled * scaled);
    }
    return model.price * (1.0 - std::pow(scaled, model.beta));
}

double zero_value_delay(const WtpModel& model, double alpha)
{
    if (!(alpha > 0.0)) {
        throw DomainError("zero_value_delay: alpha must be positive");
    }
    return 1.0 / alpha + model.od_delay;
}

TypePopulation TypePopulation::create(std::vector<double> alphas, std::vector<double> probs,
                                      double total_rate, double mean_service)
{
    if (alphas.empty()) {
        throw InvalidParameter("population: at least one type is required");
    }
    if (alphas.size() != probs.size()) {
        throw InvalidParameter("population: " + std::to_string(alphas.size()) + " types but "
                               + std::to_string(probs.size()) + " probabilities");
    }
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        if (!(alphas[i] > 0.0) || !std::isfinite(alphas[i])) {
            throw InvalidParameter("population: alpha of type " + std::to_string(i + 1) + " must be positive");
        }
        if (i > 0 && !(alphas[i] < alphas[i - 1])) {
            throw InvalidParameter("population: types must be strictly decreasing in alpha (type "
                                   + std::to_string(i + 1) + ")");
        }
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const bool single = probs.size() == 1;
        if (!(probs[i] > 0.0) || (!single && !(probs[i] < 1.0))) {
            throw InvalidParameter("population: probability of type " + std::to_string(i + 1)
                                   + " must lie in (0, 1)");
        }
        sum += probs[i];
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw InvalidParameter("population: probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
    if (!(total_rate >= 0.0) || !std::isfinite(total_rate)) {
        throw InvalidParameter("population: total arrival rate must be non-negative");
    }
    if (!(mean_service > 0.0)) {
        throw InvalidParameter("population: mean service time must be positive");
    }

    TypePopulation pop;
    pop.alphas_ = std::move(alphas);
    pop.probs_ = std::move(probs);
    pop.total_rate_ = total_rate;
    pop.mean_service_ = mean_service;
    return pop;
}

double TypePopulation::mass(std::size_t first, std::size_t last) const
{
    if (first > last || last > size()) {
        throw InvalidParameter("population: type range out of bounds");
    }
    double sum = 0.0;
    for (std::size_t i = first; i < last; ++i) {
        sum += probs_[i];
    }
    return sum;
}

TypePopulation TypePopulation::with_total_rate(double total_rate) const
{
    if (!(total_rate >= 0.0) || !std::isfinite(total_rate)) {
        throw InvalidParameter("population: total arrival rate must be non-negative");
    }
    TypePopulation copy = *this;
    copy.total_rate_ = total_rate;
    return copy;
}

TypePopulation grid_population(std::size_t n, double delta, double epsilon, double total_rate)
{
    if (n < 2) {
        throw InvalidParameter("grid population: n must be at least 2");
    }
    if (!(delta > 0.0)) {
        throw InvalidParameter("grid population: delta must be positive");
    }
    if (!(epsilon > 0.0) || !(epsilon < delta)) {
        throw InvalidParameter("grid population: epsilon must lie in (0, delta)");
    }
    if (!(total_rate > 0.0)) {
        throw InvalidParameter("grid population: total rate must be positive");
    }
    std::vector<double> alphas(n);
    std::vector<double> probs(n, 1.0 / static_cast<double>(n));
    alphas[0] = 1.0 / epsilon;
    for (std::size_t i = 1; i < n; ++i) {
        alphas[i] = 1.0 / (static_cast<double>(i) * delta);
    }
    // 1/n in floating point may not sum to exactly 1; nudge the last entry.
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        head += probs[i];
    }
    probs[n - 1] = 1.0 - head;
    return TypePopulation::create(std::move(alphas), std::move(probs), total_rate, 1.0);
}

} // namespace qosdiff::model
