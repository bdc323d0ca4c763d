#include "qosdiff/mechanism.hpp"

#include "qosdiff/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qosdiff::mechanism {

Segmentation Segmentation::from_starts(std::vector<std::size_t> starts, std::size_t type_count)
{
    if (starts.empty() || starts.front() != 0) {
        throw InvalidParameter("segmentation: the first SLA must start at the first type");
    }
    for (std::size_t l = 1; l < starts.size(); ++l) {
        if (!(starts[l] > starts[l - 1])) {
            throw InvalidParameter("segmentation: cuts must be strictly increasing");
        }
    }
    if (!(starts.back() < type_count)) {
        throw InvalidParameter("segmentation: cut beyond the last type");
    }
    return Segmentation(std::move(starts), type_count);
}

Segmentation Segmentation::from_cuts(std::span<const std::size_t> cuts, std::size_t type_count)
{
    std::vector<std::size_t> starts{0};
    for (std::size_t c : cuts) {
        if (c < 2) {
            throw InvalidParameter("segmentation: 1-based cut indices start at 2");
        }
        starts.push_back(c - 1);
    }
    return from_starts(std::move(starts), type_count);
}

std::size_t Segmentation::start(std::size_t sla) const
{
    if (sla == starts_.size()) {
        return type_count_;
    }
    return starts_.at(sla);
}

std::vector<std::size_t> Segmentation::cuts() const
{
    std::vector<std::size_t> out;
    for (std::size_t l = 1; l < starts_.size(); ++l) {
        out.push_back(starts_[l] + 1);
    }
    return out;
}

std::size_t Segmentation::sla_of(std::size_t type_index) const
{
    if (type_index >= type_count_) {
        throw InvalidParameter("segmentation: type index out of range");
    }
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), type_index);
    return static_cast<std::size_t>(it - starts_.begin()) - 1;
}

std::vector<double> Segmentation::thresholds(const model::TypePopulation& population) const
{
    if (population.size() != type_count_) {
        throw InvalidParameter("segmentation: population size mismatch");
    }
    std::vector<double> out;
    out.reserve(starts_.size() + 1);
    for (std::size_t s : starts_) {
        out.push_back(population.alpha(s));
    }
    out.push_back(population.min_alpha());
    return out;
}

std::vector<std::string> menu_violations(const model::WtpModel& model, const SlaMenu& menu)
{
    std::vector<std::string> out;
    if (menu.delays.empty()) {
        out.emplace_back("menu has no SLA");
        return out;
    }
    if (menu.prices.size() != menu.delays.size()) {
        out.emplace_back("menu has " + std::to_string(menu.delays.size()) + " delays but "
                         + std::to_string(menu.prices.size()) + " prices");
        return out;
    }
    if (!menu.thresholds.empty() && menu.thresholds.size() != menu.delays.size() + 1) {
        out.emplace_back("menu thresholds must hold L + 1 values");
    }
    if (menu.delays.front() != model.od_delay) {
        out.emplace_back("first SLA delay must equal the on-demand delay");
    }
    if (menu.prices.front() != model.price) {
        out.emplace_back("first SLA price must equal the on-demand price");
    }
    for (std::size_t l = 1; l < menu.size(); ++l) {
        if (!(menu.delays[l] > menu.delays[l - 1])) {
            out.emplace_back("delay of SLA " + std::to_string(l + 1) + " does not exceed SLA " + std::to_string(l));
        }
        if (!(menu.prices[l] < menu.prices[l - 1])) {
            out.emplace_back("price of SLA " + std::to_string(l + 1) + " is not below SLA " + std::to_string(l));
        }
    }
    return out;
}

double surplus(const model::WtpModel& model, double alpha, const SlaMenu& menu, std::size_t sla)
{
    if (sla >= menu.size() || sla >= menu.prices.size()) {
        throw std::out_of_range("surplus: SLA index " + std::to_string(sla) + " out of range");
    }
    return model::wtp(model, alpha, menu.delays[sla]) - menu.prices[sla];
}

std::size_t assign_sla(const model::WtpModel& model, double alpha, const SlaMenu& menu)
{
    if (menu.size() == 0 || menu.prices.size() != menu.size()) {
        throw InvalidParameter("assign_sla: malformed menu");
    }
    std::vector<double> values(menu.size());
    double best = -INFINITY;
    for (std::size_t l = 0; l < menu.size(); ++l) {
        values[l] = surplus(model, alpha, menu, l);
        best = std::max(best, values[l]);
    }
    for (std::size_t l = menu.size(); l-- > 0;) {
        if (values[l] >= best - kTieTolerance) {
            return l;
        }
    }
    return 0;
}

Segmentation segment(const model::WtpModel& model, const model::TypePopulation& population,
                     const SlaMenu& menu)
{
    const std::size_t sla_count = menu.size();
    std::vector<std::size_t> starts;
    std::size_t previous = 0;
    for (std::size_t i = 0; i < population.size(); ++i) {
        const std::size_t sla = assign_sla(model, population.alpha(i), menu);
        if (i == 0 && sla != 0) {
            throw StructureError("segment: the most sensitive type is not assigned to SLA 1");
        }
        if (sla < previous) {
            throw StructureError("segment: type " + std::to_string(i + 1) + " goes to SLA " + std::to_string(sla + 1)
                                 + " after a less sensitive block used SLA " + std::to_string(previous + 1));
        }
        if (i == 0 || sla != previous) {
            if (sla != starts.size()) {
                throw StructureError("segment: SLA " + std::to_string(starts.size() + 1) + " receives no type");
            }
            starts.push_back(i);
        }
        previous = sla;
    }
    if (starts.size() != sla_count) {
        throw StructureError("segment: SLA " + std::to_string(starts.size() + 1) + " receives no type");
    }
    return Segmentation::from_starts(std::move(starts), population.size());
}

std::vector<double> arrival_rates(const model::TypePopulation& population, const Segmentation& seg)
{
    if (population.size() != seg.type_count()) {
        throw InvalidParameter("arrival_rates: population size mismatch");
    }
    std::vector<double> rates(seg.sla_count());
    for (std::size_t l = 0; l < seg.sla_count(); ++l) {
        rates[l] = population.total_rate() * population.mass(seg.start(l), seg.start(l + 1));
    }
    return rates;
}

std::vector<double> optimal_prices(const model::WtpModel& model, std::span<const double> thresholds,
                                   std::span<const double> delays)
{
    const std::size_t sla_count = delays.size();
    if (sla_count == 0) {
        throw InvalidParameter("optimal_prices: at least one SLA is required");
    }
    if (thresholds.size() != sla_count + 1) {
        throw InvalidParameter("optimal_prices: expected " + std::to_string(sla_count + 1) + " thresholds");
    }
    if (delays[0] != model.od_delay) {
        throw InvalidParameter("optimal_prices: first delay must equal the on-demand delay");
    }
    for (std::size_t l = 1; l < sla_count; ++l) {
        if (!(delays[l] > delays[l - 1])) {
            throw InvalidParameter("optimal_prices: delays must be strictly increasing");
        }
        if (!(thresholds[l] < thresholds[l - 1])) {
            throw InvalidParameter("optimal_prices: thresholds must be strictly decreasing");
        }
    }
    if (!(thresholds[sla_count] <= thresholds[sla_count - 1])) {
        throw InvalidParameter("optimal_prices: last threshold must not exceed the previous one");
    }

    std::vector<double> prices(sla_count);
    prices[0] = model.price;
    for (std::size_t l = 1; l < sla_count; ++l) {
        const double drop = model::wtp(model, thresholds[l], delays[l - 1]) - model::wtp(model, thresholds[l], delays[l]);
        prices[l] = prices[l - 1] - drop;
    }
    return prices;
}

double revenue(std::span<const double> prices, std::span<const double> rates, double mean_service)
{
    if (prices.size() != rates.size()) {
        throw InvalidParameter("revenue: prices and rates differ in length");
    }
    double total = 0.0;
    for (std::size_t l = 0; l < prices.size(); ++l) {
        total += prices[l] * rates[l] * mean_service;
    }
    return total;
}

namespace {

// SLA the mechanism hands to a customer reporting `alpha`.
std::size_t sla_for_report(const model::WtpModel& model, double alpha, const SlaMenu& menu)
{
    if (menu.thresholds.empty()) {
        return assign_sla(model, alpha, menu);
    }
    const std::size_t last = menu.size() - 1;
    for (std::size_t l = 0; l < last; ++l) {
        if (alpha > menu.thresholds[l + 1]) {
            return l;
        }
    }
    return last;
}

} // namespace

DsicReport verify_dsic(const model::WtpModel& model, const model::TypePopulation& population,
                       const SlaMenu& menu)
{
    if (menu.size() == 0 || menu.prices.size() != menu.size()) {
        throw InvalidParameter("verify_dsic: malformed menu");
    }
    if (!menu.thresholds.empty() && menu.thresholds.size() != menu.size() + 1) {
        throw InvalidParameter("verify_dsic: menu thresholds must hold L + 1 values");
    }
    const std::size_t n = population.size();
    std::vector<std::size_t> outcome(n);
    for (std::size_t i = 0; i < n; ++i) {
        outcome[i] = sla_for_report(model, population.alpha(i), menu);
    }

    DsicReport report;
    for (std::size_t truth = 0; truth < n; ++truth) {
        const double alpha = population.alpha(truth);
        const double honest = surplus(model, alpha, menu, outcome[truth]);
        for (std::size_t lie = 0; lie < n; ++lie) {
            if (outcome[lie] == outcome[truth]) {
                continue;
            }
            const double gain = surplus(model, alpha, menu, outcome[lie]) - honest;
            if (gain > kTieTolerance) {
                report.violations.push_back({truth, lie, gain});
            }
            report.worst_violation = std::max(report.worst_violation, gain);
        }
    }
    report.truthful = report.worst_violation <= kTieTolerance;
    return report;
}

} // namespace qosdiff::mechanism
