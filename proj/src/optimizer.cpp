#include "qosdiff/optimizer.hpp"

#include "qosdiff/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <numeric>
#include <thread>

namespace qosdiff::optimizer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool stable(double per_server_rate, double mean_service)
{
    return per_server_rate * mean_service < 1.0 - queueing::kStabilityMargin;
}

std::vector<std::size_t> layout_key(const Layout& layout)
{
    return std::visit(Overloaded{
                          [](const OnDemand& a) { return std::vector<std::size_t>{a.servers}; },
                          [](const Sms& a) { return a.partition; },
                          [](const Pbs& a) { return std::vector<std::size_t>{a.servers}; },
                          [](const Hybrid& a) { return std::vector<std::size_t>{a.first, a.second}; },
                      },
                      layout);
}

// Higher revenue wins; ties go to the smaller (partition, cuts).
bool better(const OptResult& a, const OptResult& b)
{
    if (a.revenue != b.revenue) {
        return a.revenue > b.revenue;
    }
    const auto ka = layout_key(a.architecture.layout);
    const auto kb = layout_key(b.architecture.layout);
    if (ka != kb) {
        return ka < kb;
    }
    return a.segmentation.cuts() < b.segmentation.cuts();
}

void keep_better(std::optional<OptResult>& best, OptResult candidate)
{
    if (!best || better(candidate, *best)) {
        best = std::move(candidate);
    }
}

// Shared tail of every evaluation: feasibility of the wait vector, delays,
// prices and revenue.
Evaluation finish(const Problem& problem, mechanism::Segmentation seg, std::vector<double> rates,
                  std::span<const double> waits, Layout layout, std::vector<double> server_loads)
{
    const double T = problem.model.od_delay;
    if (waits[0] > T + kDelayTolerance) {
        return Infeasible{"SLA 1 waits " + std::to_string(waits[0]) + " > T"};
    }
    for (std::size_t l = 1; l < waits.size(); ++l) {
        const double floor = l == 1 ? T : waits[l - 1];
        if (!(waits[l] > floor + kDelayTolerance)) {
            return Infeasible{"SLA " + std::to_string(l + 1) + " delay is not above SLA " + std::to_string(l)};
        }
    }

    std::vector<double> delays(waits.begin(), waits.end());
    delays[0] = T;
    auto thresholds = seg.thresholds(problem.population);
    auto prices = mechanism::optimal_prices(problem.model, thresholds, delays);

    OptResult r{
        .menu = {std::move(delays), std::move(prices), std::move(thresholds)},
        .segmentation = std::move(seg),
        .architecture = {std::move(layout), problem.dist},
        .class_rates = std::move(rates),
        .server_loads = std::move(server_loads),
        .warnings = {},
    };
    r.revenue = mechanism::revenue(r.menu.prices, r.class_rates, problem.population.mean_service());
    r.gamma = r.revenue / od_revenue(problem.servers, problem.model, problem.dist);
    r.load = problem.load();
    for (std::size_t l = 0; l < r.menu.prices.size(); ++l) {
        if (!(r.menu.prices[l] > 0.0)) {
            r.warnings.push_back("SLA " + std::to_string(l + 1) + " price is not positive");
        }
    }
    return r;
}

std::size_t choose_saturated(std::size_t n, std::size_t k)
{
    if (k > n) {
        return 0;
    }
    k = std::min(k, n - k);
    const std::size_t cap = std::numeric_limits<std::size_t>::max();
    std::size_t out = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        const std::size_t num = n - k + i;
        if (out > cap / num) {
            return cap;
        }
        out = out * num / i;
    }
    return out;
}

// Next strictly increasing tuple of 1-based cuts in [2, n]; false at the end.
bool next_cuts(std::vector<std::size_t>& cuts, std::size_t n)
{
    const std::size_t k = cuts.size();
    for (std::size_t i = k; i-- > 0;) {
        if (cuts[i] < n - (k - 1 - i)) {
            ++cuts[i];
            for (std::size_t j = i + 1; j < k; ++j) {
                cuts[j] = cuts[j - 1] + 1;
            }
            return true;
        }
    }
    return false;
}

using Scorer = std::function<std::optional<OptResult>(std::span<const std::size_t>)>;

std::optional<OptResult> exhaustive(std::size_t n, std::size_t sla_count, const Scorer& score, unsigned threads)
{
    const unsigned workers = std::max(1u, threads);
    std::vector<std::optional<OptResult>> best(workers);
    std::vector<std::exception_ptr> errors(workers);

    auto work = [&](unsigned w) {
        try {
            std::vector<std::size_t> cuts(sla_count - 1);
            std::iota(cuts.begin(), cuts.end(), std::size_t{2});
            std::size_t index = 0;
            do {
                if (index++ % workers == w) {
                    if (auto r = score(cuts)) {
                        keep_better(best[w], std::move(*r));
                    }
                }
            } while (next_cuts(cuts, n));
        } catch (...) {
            errors[w] = std::current_exception();
        }
    };

    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work, w);
        }
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::optional<OptResult> out;
    for (auto& b : best) {
        if (b) {
            keep_better(out, std::move(*b));
        }
    }
    return out;
}

using Clock = std::chrono::steady_clock;

struct Deadline {
    std::optional<Clock::time_point> at;
    bool expired() const { return at && Clock::now() >= *at; }
};

// Coordinate ascent: move one cut at a time to its best position between
// its neighbours until no single move improves.
OptResult improve(OptResult current, std::size_t n, const Scorer& score, const Deadline& deadline)
{
    auto cuts = current.segmentation.cuts();
    const std::size_t k = cuts.size();
    bool moved = true;
    while (moved && !deadline.expired()) {
        moved = false;
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t lo = j == 0 ? 2 : cuts[j - 1] + 1;
            const std::size_t hi = j + 1 == k ? n : cuts[j + 1] - 1;
            std::optional<OptResult> best;
            auto trial = cuts;
            for (std::size_t c = lo; c <= hi; ++c) {
                if (c == cuts[j]) {
                    continue;
                }
                trial[j] = c;
                if (auto r = score(trial)) {
                    keep_better(best, std::move(*r));
                }
            }
            if (best && better(*best, current)) {
                current = std::move(*best);
                cuts = current.segmentation.cuts();
                moved = true;
            }
        }
    }
    return current;
}

std::optional<OptResult> local_search(std::size_t n, std::size_t sla_count, const Scorer& score,
                                      const std::optional<OptResult>& lower, const SearchOptions& options)
{
    Deadline deadline;
    if (options.time_budget_seconds > 0.0) {
        deadline.at = Clock::now()
                      + std::chrono::duration_cast<Clock::duration>(
                          std::chrono::duration<double>(options.time_budget_seconds));
    }

    std::vector<OptResult> seeds;
    if (lower) {
        // Every way of adding one cut to the best (L-1)-SLA solution.
        const auto base = lower->segmentation.cuts();
        std::optional<OptResult> seed;
        for (std::size_t c = 2; c <= n; ++c) {
            if (std::find(base.begin(), base.end(), c) != base.end()) {
                continue;
            }
            auto trial = base;
            trial.insert(std::upper_bound(trial.begin(), trial.end(), c), c);
            if (auto r = score(trial)) {
                keep_better(seed, std::move(*r));
            }
        }
        if (seed) {
            seeds.push_back(std::move(*seed));
        }
    }
    {
        std::vector<std::size_t> even;
        for (std::size_t j = 1; j < sla_count; ++j) {
            even.push_back(2 + (j * (n - 1)) / sla_count);
        }
        for (std::size_t j = 1; j < even.size(); ++j) {
            even[j] = std::max(even[j], even[j - 1] + 1);
        }
        if (even.back() <= n) {
            if (auto r = score(even)) {
                seeds.push_back(std::move(*r));
            }
        }
    }

    std::optional<OptResult> best;
    for (auto& s : seeds) {
        keep_better(best, improve(std::move(s), n, score, deadline));
    }
    return best;
}

OptResult search(const Problem& problem, std::size_t sla_count, const SearchOptions& options, const Scorer& score,
                 const std::function<std::optional<OptResult>()>& lower)
{
    const std::size_t n = problem.population.size();
    if (sla_count == 0 || sla_count > n) {
        throw InvalidParameter("optimize: L must lie in [1, " + std::to_string(n) + "]");
    }
    const std::size_t count = choose_saturated(n - 1, sla_count - 1);
    std::optional<OptResult> best;
    if (count <= options.candidate_budget) {
        best = exhaustive(n, sla_count, score, options.threads);
    } else if (options.best_effort) {
        best = local_search(n, sla_count, score, lower(), options);
        if (best) {
            best->exact = false;
        }
    } else {
        throw SearchTooLarge("optimize: " + std::to_string(count) + " cut tuples exceed the candidate budget of "
                             + std::to_string(options.candidate_budget));
    }
    if (!best) {
        throw NoFeasibleCandidate("optimize: no feasible configuration with L=" + std::to_string(sla_count)
                                  + " at load " + std::to_string(problem.load()));
    }
    return std::move(*best);
}

// Best (L-1)-SLA solution, or nothing when none is feasible.
std::optional<OptResult> try_lower(ArchKind kind, const Problem& problem, std::size_t sla_count,
                                   const SearchOptions& options)
{
    const std::size_t floor = kind == ArchKind::Hybrid ? 2 : 1;
    if (sla_count <= floor) {
        return std::nullopt;
    }
    try {
        return optimize(kind, problem, sla_count - 1, options);
    } catch (const NoFeasibleCandidate&) {
        return std::nullopt;
    }
}

// Best SMS server partition for fixed cuts.
//
// With phi_1 = T the revenue is p*Lambda*s plus, for l >= 2,
// W_l * (u(ah_l, t_l) - u(ah_l, t_{l-1})) with W_l = s * sum_{j>=l} Lambda_j,
// so it only couples neighbouring modules. SLA 1 takes every server not
// given to modules 2..L, which leaves a chain DP over (servers used, servers
// of the last module).
std::optional<std::vector<std::size_t>> best_partition(const Problem& problem, std::span<const double> rates,
                                                       std::span<const double> thresholds)
{
    const std::size_t L = rates.size();
    const std::size_t m = problem.servers;
    const double T = problem.model.od_delay;
    const double s = problem.dist.mean();

    const auto first = min_servers_for_delay(rates[0], T, problem.dist, m);
    if (!first) {
        return std::nullopt;
    }
    if (L == 1) {
        return std::vector<std::size_t>{m};
    }
    if (*first + (L - 1) > m) {
        return std::nullopt;
    }
    const std::size_t B = m - *first;
    const std::size_t stride = B + 1;

    // delay[l][k]: wait of module l on k servers, +inf when unstable.
    // Reused across calls; the exhaustive search hits this once per cut tuple.
    thread_local struct {
        std::vector<std::vector<double>> delay;
        std::vector<std::vector<std::uint32_t>> parent;
        std::vector<double> F, next, S, cost;
        std::vector<std::uint32_t> arg;
    } scratch;
    auto& delay = scratch.delay;
    delay.resize(L);
    for (auto& d : delay) {
        d.assign(stride, kInf);
    }
    for (std::size_t l = 1; l < L; ++l) {
        for (std::size_t k = 1; k <= B; ++k) {
            const double per = rates[l] / static_cast<double>(k);
            if (stable(per, s)) {
                delay[l][k] = queueing::fcfs_delay(per, problem.dist);
            }
        }
    }
    std::vector<double> weight(L, 0.0);
    for (std::size_t l = L; l-- > 1;) {
        weight[l] = (l + 1 < L ? weight[l + 1] : 0.0) + rates[l] * s;
    }

    auto at = [stride](std::vector<double>& v, std::size_t b, std::size_t k) -> double& { return v[b * stride + k]; };

    auto& F = scratch.F;
    F.assign(stride * stride, kNegInf);
    for (std::size_t k = 1; k <= B; ++k) {
        const double t = delay[1][k];
        if (std::isfinite(t) && t > T + kDelayTolerance) {
            at(F, k, k) = weight[1] * (model::wtp(problem.model, thresholds[1], t) - problem.model.price);
        }
    }

    auto& parent = scratch.parent;
    parent.resize(L);
    auto& S = scratch.S;
    auto& arg = scratch.arg;
    S.assign(stride * (stride + 1), kNegInf);
    arg.assign(stride * (stride + 1), 0);
    for (std::size_t l = 2; l < L; ++l) {
        // S(b, k) = max over k2 >= k of F(b, k2) - W_l u(ah_l, t_{l-1}(k2)).
        auto& cost = scratch.cost;
        cost.assign(stride, kNegInf);
        for (std::size_t k = 1; k <= B; ++k) {
            if (std::isfinite(delay[l - 1][k]) && delay[l - 1][k] > T) {
                cost[k] = weight[l] * model::wtp(problem.model, thresholds[l], delay[l - 1][k]);
            }
        }
        const std::size_t wide = stride + 1;
        for (std::size_t b = l - 1; b <= B; ++b) {
            S[b * wide + stride] = kNegInf;
            for (std::size_t k = B; k >= 1; --k) {
                const double f = F[b * stride + k];
                const double g = f == kNegInf ? kNegInf : f - cost[k];
                const double tail = S[b * wide + k + 1];
                if (g >= tail && g != kNegInf) {
                    S[b * wide + k] = g;
                    arg[b * wide + k] = static_cast<std::uint32_t>(k);
                } else {
                    S[b * wide + k] = tail;
                    arg[b * wide + k] = arg[b * wide + k + 1];
                }
            }
        }

        auto& next = scratch.next;
        next.assign(stride * stride, kNegInf);
        parent[l].assign(stride * stride, 0);
        const auto& prev_delay = delay[l - 1];
        for (std::size_t kp = 1; kp <= B; ++kp) {
            const double t = delay[l][kp];
            if (!std::isfinite(t) || !(t > T + kDelayTolerance)) {
                continue;
            }
            // Smallest k whose module l-1 wait is below t - tol; waits fall in k.
            const double limit = t - kDelayTolerance;
            std::size_t lo = 1;
            std::size_t hi = B + 1;
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (prev_delay[mid] < limit) {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            if (lo > B) {
                continue;
            }
            const double gain = weight[l] * model::wtp(problem.model, thresholds[l], t);
            for (std::size_t b = l - 1; b + kp <= B; ++b) {
                const double tail = S[b * wide + lo];
                if (tail == kNegInf) {
                    continue;
                }
                next[(b + kp) * stride + kp] = gain + tail;
                parent[l][(b + kp) * stride + kp] = arg[b * wide + lo];
            }
        }
        F.swap(next);
    }

    double best = kNegInf;
    std::size_t best_b = 0;
    std::size_t best_k = 0;
    for (std::size_t b = L - 1; b <= B; ++b) {
        for (std::size_t k = 1; k <= B; ++k) {
            if (at(F, b, k) > best) {
                best = at(F, b, k);
                best_b = b;
                best_k = k;
            }
        }
    }
    if (best == kNegInf) {
        return std::nullopt;
    }

    std::vector<std::size_t> partition(L);
    std::size_t b = best_b;
    std::size_t k = best_k;
    for (std::size_t l = L - 1; l >= 2; --l) {
        partition[l] = k;
        const std::size_t kprev = parent[l][b * stride + k];
        b -= k;
        k = kprev;
    }
    partition[1] = k;
    std::size_t used = 0;
    for (std::size_t l = 1; l < L; ++l) {
        used += partition[l];
    }
    partition[0] = m - used;
    return partition;
}

std::optional<OptResult> score_sms(const Problem& problem, std::span<const std::size_t> cuts)
{
    const auto seg = mechanism::Segmentation::from_cuts(cuts, problem.population.size());
    const auto rates = mechanism::arrival_rates(problem.population, seg);
    const auto thresholds = seg.thresholds(problem.population);
    const auto partition = best_partition(problem, rates, thresholds);
    if (!partition) {
        return std::nullopt;
    }
    auto e = evaluate_sms(problem, *partition, cuts);
    if (auto* r = std::get_if<OptResult>(&e)) {
        return std::move(*r);
    }
    return std::nullopt;
}

std::optional<OptResult> score_hybrid(const Problem& problem, std::span<const std::size_t> cuts)
{
    const std::size_t m = problem.servers;
    const auto seg = mechanism::Segmentation::from_cuts(cuts, problem.population.size());
    const auto rates = mechanism::arrival_rates(problem.population, seg);
    const auto first = min_servers_for_delay(rates[0], problem.model.od_delay, problem.dist, m - 1);
    if (!first) {
        return std::nullopt;
    }
    double rest = 0.0;
    for (std::size_t l = 1; l < rates.size(); ++l) {
        rest += rates[l];
    }
    // Every price rises as the second part grows, so the largest feasible
    // second part wins.
    for (std::size_t second = m - *first; second >= 1; --second) {
        if (!stable(rest / static_cast<double>(second), problem.dist.mean())) {
            break;
        }
        auto e = evaluate_hybrid(problem, m - second, cuts);
        if (auto* r = std::get_if<OptResult>(&e)) {
            return std::move(*r);
        }
    }
    return std::nullopt;
}

std::optional<OptResult> score_pbs(const Problem& problem, std::span<const std::size_t> cuts)
{
    auto e = evaluate_pbs(problem, cuts);
    if (auto* r = std::get_if<OptResult>(&e)) {
        return std::move(*r);
    }
    return std::nullopt;
}

} // namespace

std::string_view to_string(ArchKind kind)
{
    switch (kind) {
    case ArchKind::OnDemand:
        return "od";
    case ArchKind::Sms:
        return "sms";
    case ArchKind::Pbs:
        return "pbs";
    case ArchKind::Hybrid:
        return "hybrid";
    }
    return "?";
}

std::optional<ArchKind> parse_arch(std::string_view name)
{
    if (name == "od") {
        return ArchKind::OnDemand;
    }
    if (name == "sms") {
        return ArchKind::Sms;
    }
    if (name == "pbs") {
        return ArchKind::Pbs;
    }
    if (name == "hybrid") {
        return ArchKind::Hybrid;
    }
    return std::nullopt;
}

ArchKind ArchitectureConfig::kind() const noexcept
{
    return std::visit(Overloaded{
                          [](const OnDemand&) { return ArchKind::OnDemand; },
                          [](const Sms&) { return ArchKind::Sms; },
                          [](const Pbs&) { return ArchKind::Pbs; },
                          [](const Hybrid&) { return ArchKind::Hybrid; },
                      },
                      layout);
}

std::size_t ArchitectureConfig::total_servers() const noexcept
{
    const auto key = layout_key(layout);
    return std::accumulate(key.begin(), key.end(), std::size_t{0});
}

void ArchitectureConfig::validate() const
{
    const auto key = layout_key(layout);
    if (key.empty()) {
        throw InvalidParameter("architecture: no server module");
    }
    for (std::size_t c : key) {
        if (c == 0) {
            throw InvalidParameter("architecture: every module needs at least one server");
        }
    }
}

void Problem::validate() const
{
    model.validate();
    if (servers == 0) {
        throw InvalidParameter("problem: at least one server is required");
    }
    if (std::abs(dist.mean() - population.mean_service()) > 1e-9 * std::max(1.0, dist.mean())) {
        throw InvalidParameter("problem: service distribution mean " + std::to_string(dist.mean())
                               + " differs from the population's mean service time "
                               + std::to_string(population.mean_service()));
    }
}

Problem Problem::with_load(double per_server_load) const
{
    if (!(per_server_load > 0.0) || !(per_server_load < 1.0)) {
        throw DomainError("load " + std::to_string(per_server_load) + " is outside (0, 1)");
    }
    Problem out = *this;
    out.population = population.with_total_rate(per_server_load * static_cast<double>(servers));
    return out;
}

double od_revenue(std::size_t servers, const model::WtpModel& model, const queueing::ServiceDist& dist)
{
    if (servers == 0) {
        throw InvalidParameter("od_revenue: at least one server is required");
    }
    return static_cast<double>(servers) * model.price * dist.mean() * queueing::od_max_load(model.od_delay, dist);
}

std::optional<std::size_t> min_servers_for_delay(double rate, double od_delay, const queueing::ServiceDist& dist,
                                                 std::size_t limit)
{
    for (std::size_t k = 1; k <= limit; ++k) {
        const double per = rate / static_cast<double>(k);
        if (stable(per, dist.mean()) && queueing::fcfs_delay(per, dist) <= od_delay + kDelayTolerance) {
            return k;
        }
    }
    return std::nullopt;
}

Evaluation evaluate_on_demand(const Problem& problem)
{
    problem.validate();
    const std::size_t m = problem.servers;
    auto seg = mechanism::Segmentation::from_starts({0}, problem.population.size());
    auto rates = mechanism::arrival_rates(problem.population, seg);
    const double per = rates[0] / static_cast<double>(m);
    if (!stable(per, problem.dist.mean())) {
        return Infeasible{"on-demand servers are unstable"};
    }
    const double wait = queueing::fcfs_delay(per, problem.dist);
    return finish(problem, std::move(seg), std::move(rates), std::span<const double>(&wait, 1), OnDemand{m}, {per});
}

Evaluation evaluate_sms(const Problem& problem, std::span<const std::size_t> partition,
                        std::span<const std::size_t> cuts)
{
    if (partition.size() != cuts.size() + 1) {
        throw InvalidParameter("evaluate_sms: " + std::to_string(partition.size()) + " modules for "
                               + std::to_string(cuts.size() + 1) + " SLAs");
    }
    std::size_t total = 0;
    for (std::size_t k : partition) {
        if (k == 0) {
            throw InvalidParameter("evaluate_sms: every module needs at least one server");
        }
        total += k;
    }
    if (total != problem.servers) {
        throw InvalidParameter("evaluate_sms: partition uses " + std::to_string(total) + " of "
                               + std::to_string(problem.servers) + " servers");
    }
    auto seg = mechanism::Segmentation::from_cuts(cuts, problem.population.size());
    auto rates = mechanism::arrival_rates(problem.population, seg);
    std::vector<double> loads(rates.size());
    std::vector<double> waits(rates.size());
    for (std::size_t l = 0; l < rates.size(); ++l) {
        loads[l] = rates[l] / static_cast<double>(partition[l]);
        if (!stable(loads[l], problem.dist.mean())) {
            return Infeasible{"module of SLA " + std::to_string(l + 1) + " is unstable"};
        }
        waits[l] = queueing::fcfs_delay(loads[l], problem.dist);
    }
    return finish(problem, std::move(seg), std::move(rates), waits,
                  Sms{std::vector<std::size_t>(partition.begin(), partition.end())}, std::move(loads));
}

Evaluation evaluate_pbs(const Problem& problem, std::span<const std::size_t> cuts)
{
    const std::size_t m = problem.servers;
    auto seg = mechanism::Segmentation::from_cuts(cuts, problem.population.size());
    auto rates = mechanism::arrival_rates(problem.population, seg);
    std::vector<double> loads(rates.size());
    double total = 0.0;
    for (std::size_t l = 0; l < rates.size(); ++l) {
        loads[l] = rates[l] / static_cast<double>(m);
        total += loads[l];
    }
    if (!stable(total, problem.dist.mean())) {
        return Infeasible{"shared servers are unstable"};
    }
    const auto waits = queueing::priority_delays(loads, problem.dist);
    return finish(problem, std::move(seg), std::move(rates), waits, Pbs{m}, std::move(loads));
}

Evaluation evaluate_hybrid(const Problem& problem, std::size_t first_part, std::span<const std::size_t> cuts)
{
    const std::size_t m = problem.servers;
    if (cuts.empty()) {
        throw InvalidParameter("evaluate_hybrid: at least two SLAs are required");
    }
    if (first_part == 0 || first_part >= m) {
        throw InvalidParameter("evaluate_hybrid: both parts need at least one server");
    }
    const std::size_t second = m - first_part;
    auto seg = mechanism::Segmentation::from_cuts(cuts, problem.population.size());
    auto rates = mechanism::arrival_rates(problem.population, seg);
    std::vector<double> loads(rates.size());
    loads[0] = rates[0] / static_cast<double>(first_part);
    if (!stable(loads[0], problem.dist.mean())) {
        return Infeasible{"first part is unstable"};
    }
    double rest = 0.0;
    for (std::size_t l = 1; l < rates.size(); ++l) {
        loads[l] = rates[l] / static_cast<double>(second);
        rest += loads[l];
    }
    if (!stable(rest, problem.dist.mean())) {
        return Infeasible{"second part is unstable"};
    }
    std::vector<double> waits{queueing::fcfs_delay(loads[0], problem.dist)};
    const auto shared = queueing::hybrid_delays(std::span<const double>(loads).subspan(1), problem.dist);
    waits.insert(waits.end(), shared.begin(), shared.end());
    return finish(problem, std::move(seg), std::move(rates), waits, Hybrid{first_part, second}, std::move(loads));
}

OptResult optimize_sms(const Problem& problem, std::size_t sla_count, const SearchOptions& options)
{
    problem.validate();
    if (problem.servers < sla_count) {
        throw InvalidParameter("optimize_sms: need at least one server per SLA");
    }
    return search(
        problem, sla_count, options, [&](std::span<const std::size_t> cuts) { return score_sms(problem, cuts); },
        [&] { return try_lower(ArchKind::Sms, problem, sla_count, options); });
}

OptResult optimize_pbs(const Problem& problem, std::size_t sla_count, const SearchOptions& options)
{
    problem.validate();
    return search(
        problem, sla_count, options, [&](std::span<const std::size_t> cuts) { return score_pbs(problem, cuts); },
        [&] { return try_lower(ArchKind::Pbs, problem, sla_count, options); });
}

OptResult optimize_hybrid(const Problem& problem, std::size_t sla_count, const SearchOptions& options)
{
    problem.validate();
    if (sla_count < 2) {
        throw InvalidParameter("optimize_hybrid: at least two SLAs are required");
    }
    if (problem.servers < 2) {
        throw InvalidParameter("optimize_hybrid: at least two servers are required");
    }
    return search(
        problem, sla_count, options, [&](std::span<const std::size_t> cuts) { return score_hybrid(problem, cuts); },
        [&] { return try_lower(ArchKind::Hybrid, problem, sla_count, options); });
}

OptResult optimize(ArchKind kind, const Problem& problem, std::size_t sla_count, const SearchOptions& options)
{
    switch (kind) {
    case ArchKind::OnDemand: {
        auto e = evaluate_on_demand(problem);
        if (auto* r = std::get_if<Infeasible>(&e)) {
            throw NoFeasibleCandidate("on-demand: " + r->reason);
        }
        return std::get<OptResult>(std::move(e));
    }
    case ArchKind::Sms:
        return optimize_sms(problem, sla_count, options);
    case ArchKind::Pbs:
        return optimize_pbs(problem, sla_count, options);
    case ArchKind::Hybrid:
        return optimize_hybrid(problem, sla_count, options);
    }
    throw InvalidParameter("optimize: unknown architecture");
}

OptResult optimize_over_loads(ArchKind kind, const Problem& problem, std::size_t sla_count,
                              std::span<const double> loads, const SearchOptions& options)
{
    std::optional<OptResult> best;
    for (const auto& row : sweep_load(kind, problem, sla_count, loads, options)) {
        if (!row.result) {
            continue;
        }
        if (!best || row.result->revenue > best->revenue
            || (row.result->revenue == best->revenue && row.load < best->load)) {
            best = *row.result;
        }
    }
    if (!best) {
        throw NoFeasibleCandidate("optimize: no feasible configuration at any grid load");
    }
    return std::move(*best);
}

std::vector<SweepRow> sweep_load(ArchKind kind, const Problem& problem, std::size_t sla_count,
                                 std::span<const double> loads, const SearchOptions& options)
{
    std::vector<SweepRow> rows;
    rows.reserve(loads.size());
    for (double load : loads) {
        SweepRow row{.load = load, .result = std::nullopt, .failure = {}};
        try {
            row.result = optimize(kind, problem.with_load(load), sla_count, options);
        } catch (const NoFeasibleCandidate& e) {
            row.failure = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<double> default_load_grid()
{
    std::vector<double> out;
    for (int i = 5; i <= 30; ++i) {
        out.push_back(i / 100.0);
    }
    return out;
}

std::vector<double> pbs_load_grid(const model::WtpModel& model, const queueing::ServiceDist& dist,
                                  std::size_t points)
{
    if (points == 0) {
        throw InvalidParameter("pbs_load_grid: at least one point is required");
    }
    const double top = std::min(model.od_delay / queueing::residual_term(dist), 1.0);
    std::vector<double> out;
    for (std::size_t i = 1; i <= points; ++i) {
        out.push_back(top * static_cast<double>(i) / static_cast<double>(points + 1));
    }
    out.push_back(queueing::od_max_load(model.od_delay, dist));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double pbs_upper_bound(double od_delay, const queueing::ServiceDist& dist)
{
    if (!(od_delay > 0.0)) {
        throw DomainError("pbs_upper_bound: T must be positive");
    }
    return 1.0 + od_delay / queueing::residual_term(dist);
}

double sms_lower_bound(const model::WtpModel& model, const model::TypePopulation& population, double alpha_split,
                       double phi2, const queueing::ServiceDist& dist)
{
    if (!(alpha_split > population.min_alpha()) || !(alpha_split < population.max_alpha())) {
        throw DomainError("sms_lower_bound: split must lie strictly between the smallest and largest alpha");
    }
    if (!(phi2 > model.od_delay)) {
        throw DomainError("sms_lower_bound: second delay must exceed T");
    }
    std::size_t split = 0;
    while (split < population.size() && population.alpha(split) > alpha_split) {
        ++split;
    }
    const double rate1 = population.total_rate() * population.mass(0, split);
    const double rate2 = population.total_rate() - rate1;
    const double m1 = queueing::required_servers_fractional(rate1, model.od_delay, dist);
    const double m2 = queueing::required_servers_fractional(rate2, phi2, dist);
    const double gain = model.price * rate1 + model::wtp(model, alpha_split, phi2) * rate2;
    return gain / ((m1 + m2) * model.price * queueing::od_max_load(model.od_delay, dist));
}

double sms_lower_bound_beta3(double od_delay, double phi0_hat, const queueing::ServiceDist& dist)
{
    if (!(od_delay > 0.0) || !(phi0_hat > od_delay)) {
        throw DomainError("sms_lower_bound_beta3: need phi0_hat > T > 0");
    }
    const double A = queueing::residual_term(dist);
    return 1.875 * (1.0 + A / od_delay) / (2.0 + A / od_delay + 2.0 * A / phi0_hat);
}

} // namespace qosdiff::optimizer
