#include "qosdiff/errors.hpp"

#include <utility>

namespace qosdiff {

namespace {

std::string join_problems(const std::vector<std::string>& problems)
{
    std::string out;
    for (const auto& p : problems) {
        if (!out.empty()) {
            out += "; ";
        }
        out += p;
    }
    return out;
}

} // namespace

ScenarioError::ScenarioError(Kind kind, std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), kind_(kind), problems_(std::move(problems))
{
}

} // namespace qosdiff
