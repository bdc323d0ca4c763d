#pragma once

#include "qosdiff/model.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qosdiff::mechanism {

// Surplus comparisons treat values closer than this as equal.
inline constexpr double kTieTolerance = 1e-12;

// Contiguous split of an ordered population into L non-empty blocks.
// SLA l (0-based) receives types [start(l), start(l + 1)).
class Segmentation {
public:
    // `starts` are 0-based first-type indices per SLA; starts[0] must be 0.
    static Segmentation from_starts(std::vector<std::size_t> starts, std::size_t type_count);
    // `cuts` are the 1-based first-type indices i_2..i_L of SLAs 2..L.
    static Segmentation from_cuts(std::span<const std::size_t> cuts, std::size_t type_count);

    std::size_t sla_count() const noexcept { return starts_.size(); }
    std::size_t type_count() const noexcept { return type_count_; }
    std::size_t start(std::size_t sla) const;  // sla in [0, L]; start(L) == type_count
    std::size_t size(std::size_t sla) const { return start(sla + 1) - start(sla); }
    std::span<const std::size_t> starts() const noexcept { return starts_; }

    // 1-based cut indices i_2..i_L.
    std::vector<std::size_t> cuts() const;
    // 0-based SLA of type `type_index`.
    std::size_t sla_of(std::size_t type_index) const;
    // alpha-hat_1..alpha-hat_{L+1}: most sensitive type of each block, then
    // the least sensitive type overall.
    std::vector<double> thresholds(const model::TypePopulation& population) const;

    friend bool operator==(const Segmentation&, const Segmentation&) = default;

private:
    Segmentation(std::vector<std::size_t> starts, std::size_t type_count)
        : starts_(std::move(starts)), type_count_(type_count)
    {
    }

    std::vector<std::size_t> starts_;
    std::size_t type_count_ = 0;
};

// L (delay, price) pairs. `thresholds`, when present, holds the alpha-hat
// sequence (L + 1 values) the menu was priced for; reports are then mapped to
// SLAs through those thresholds.
struct SlaMenu {
    std::vector<double> delays;
    std::vector<double> prices;
    std::vector<double> thresholds;

    std::size_t size() const noexcept { return delays.size(); }
};

// Invariant violations of a menu: phi_1 = T, strictly increasing delays,
// p_1 = p, strictly decreasing prices, consistent lengths. Empty when valid.
std::vector<std::string> menu_violations(const model::WtpModel& model, const SlaMenu& menu);

double surplus(const model::WtpModel& model, double alpha, const SlaMenu& menu, std::size_t sla);

// Surplus-maximizing SLA (0-based); ties within kTieTolerance go to the
// largest index.
std::size_t assign_sla(const model::WtpModel& model, double alpha, const SlaMenu& menu);

// Applies assign_sla to every type. Throws StructureError if the blocks are
// not contiguous, out of order, or some SLA is left empty.
Segmentation segment(const model::WtpModel& model, const model::TypePopulation& population,
                     const SlaMenu& menu);

// Lambda_l = Lambda * P(Phi_l).
std::vector<double> arrival_rates(const model::TypePopulation& population, const Segmentation& seg);

// Highest prices keeping each threshold type indifferent between adjacent
// SLAs: p_1 = p, p_l = p_{l-1} - (u(ah_l, phi_{l-1}) - u(ah_l, phi_l)).
// `thresholds` holds L + 1 values (the last is unused by the formula).
std::vector<double> optimal_prices(const model::WtpModel& model, std::span<const double> thresholds,
                                   std::span<const double> delays);

// G = sum_l p_l * Lambda_l * s.
double revenue(std::span<const double> prices, std::span<const double> rates, double mean_service);

struct Misreport {
    std::size_t true_type = 0;
    std::size_t reported_type = 0;
    double gain = 0.0;
};

struct DsicReport {
    bool truthful = true;
    double worst_violation = 0.0;
    std::vector<Misreport> violations;
};

// Exhaustive misreport scan over every (true type, reported type) pair of
// the population.
DsicReport verify_dsic(const model::WtpModel& model, const model::TypePopulation& population,
                       const SlaMenu& menu);

} // namespace qosdiff::mechanism
