#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qosdiff {

// Argument outside the mathematical domain of a formula (phi < T, alpha <= 0, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Construction parameter that violates a type invariant.
class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Offered load at or beyond the stability limit of a queue.
class UnstableQueue : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// SLA assignments that do not form contiguous, ordered blocks.
class StructureError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Search finished without a single feasible candidate.
class NoFeasibleCandidate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exact search space exceeds the configured candidate budget.
class SearchTooLarge : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Simulated queue grew past the overflow guard; the configuration is
// almost certainly unstable.
class SimulationOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Scenario file that cannot be parsed or fails validation. Carries every
// problem found, not only the first.
class ScenarioError : public std::runtime_error {
public:
    enum class Kind { Parse, Validation };

    ScenarioError(Kind kind, std::vector<std::string> problems);

    Kind kind() const noexcept { return kind_; }
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    Kind kind_;
    std::vector<std::string> problems_;
};

} // namespace qosdiff
