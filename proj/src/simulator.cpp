#include "qosdiff/simulator.hpp"

#include "qosdiff/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <queue>
#include <random>
#include <thread>

namespace qosdiff::simulator {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

struct Pool {
    std::size_t first_server = 0;
    std::size_t size = 0;
    bool priority = false;
    std::size_t first_class = 0;  // class served at priority 0
};

struct Setup {
    std::vector<Pool> pools;
    std::vector<std::size_t> pool_of_class;
    std::size_t servers = 0;
};

Setup build_setup(const optimizer::ArchitectureConfig& arch, std::size_t classes)
{
    arch.validate();
    Setup s;
    auto add = [&s](std::size_t size, bool priority, std::size_t first_class) {
        s.pools.push_back({s.servers, size, priority, first_class});
        s.servers += size;
    };
    std::visit(Overloaded{
                   [&](const optimizer::OnDemand& a) {
                       add(a.servers, false, 0);
                       s.pool_of_class.assign(classes, 0);
                   },
                   [&](const optimizer::Sms& a) {
                       if (a.partition.size() != classes) {
                           throw InvalidParameter("simulate: SMS layout has " + std::to_string(a.partition.size())
                                                  + " modules for " + std::to_string(classes) + " classes");
                       }
                       for (std::size_t l = 0; l < classes; ++l) {
                           add(a.partition[l], false, l);
                           s.pool_of_class.push_back(l);
                       }
                   },
                   [&](const optimizer::Pbs& a) {
                       add(a.servers, true, 0);
                       s.pool_of_class.assign(classes, 0);
                   },
                   [&](const optimizer::Hybrid& a) {
                       if (classes < 2) {
                           throw InvalidParameter("simulate: the hybrid layout needs at least two classes");
                       }
                       add(a.first, false, 0);
                       add(a.second, true, 1);
                       s.pool_of_class.assign(classes, 1);
                       s.pool_of_class[0] = 0;
                   },
               },
               arch.layout);
    return s;
}

// Per-server arrival rate of each pool, split by class.
std::vector<std::vector<double>> pool_loads(const Setup& setup, std::span<const double> rates)
{
    std::vector<std::vector<double>> out(setup.pools.size());
    for (std::size_t l = 0; l < rates.size(); ++l) {
        const auto& pool = setup.pools[setup.pool_of_class[l]];
        out[setup.pool_of_class[l]].push_back(rates[l] / static_cast<double>(pool.size));
    }
    return out;
}

void check_rates(std::span<const double> rates)
{
    if (rates.empty()) {
        throw InvalidParameter("simulate: at least one class is required");
    }
    for (double r : rates) {
        if (!(r > 0.0) || !std::isfinite(r)) {
            throw InvalidParameter("simulate: class rates must be positive");
        }
    }
}

struct Job {
    double arrival = 0.0;
    std::uint64_t index = 0;
    std::uint32_t cls = 0;
};

struct Server {
    bool busy = false;
    std::uint32_t cls = 0;
    double busy_since = 0.0;
    double busy_time = 0.0;
    std::vector<std::deque<Job>> queues;
    std::size_t waiting = 0;
};

struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    std::uint32_t server = 0;
    bool arrival = false;
};

struct Later {
    bool operator()(const Event& a, const Event& b) const
    {
        if (a.time != b.time) {
            return a.time > b.time;
        }
        return a.seq > b.seq;
    }
};

class ServiceSampler {
public:
    explicit ServiceSampler(const queueing::ServiceDist& dist)
    {
        std::visit(Overloaded{
                       [&](const queueing::Exponential& e) {
                           cumulative_.push_back(1.0);
                           means_.push_back(e.mean);
                       },
                       [&](const queueing::HyperExponential& h) {
                           double c = 0.0;
                           for (const auto& b : h.branches) {
                               c += b.weight;
                               cumulative_.push_back(c);
                               means_.push_back(b.mean);
                           }
                           cumulative_.back() = 1.0;
                       },
                   },
                   dist.variant());
    }

    template <class Rng>
    double operator()(Rng& rng)
    {
        std::size_t b = 0;
        if (means_.size() > 1) {
            const double u = unit_(rng);
            while (b + 1 < cumulative_.size() && u >= cumulative_[b]) {
                ++b;
            }
        }
        return means_[b] * unit_exp_(rng);
    }

private:
    std::vector<double> cumulative_;
    std::vector<double> means_;
    std::uniform_real_distribution<double> unit_{0.0, 1.0};
    std::exponential_distribution<double> unit_exp_{1.0};
};

struct Replication {
    std::vector<double> wait;
    std::vector<double> throughput;
    std::vector<double> arrival_rate;
    std::vector<double> queue_length;
    std::vector<double> little;
    std::vector<double> server_utilization;
    double utilization = 0.0;
    std::uint64_t jobs = 0;
};

double overlap(double a, double b, double lo, double hi)
{
    return std::max(0.0, std::min(b, hi) - std::max(a, lo));
}

Replication run(const Setup& setup, std::span<const double> rates, const queueing::ServiceDist& dist,
                const SimConfig& config, std::uint64_t warmup, std::size_t replication, std::ostream* trace)
{
    const std::size_t classes = rates.size();
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(replication)};
    std::mt19937_64 rng(seq);

    double total_rate = 0.0;
    std::vector<double> class_cdf;
    for (double r : rates) {
        total_rate += r;
        class_cdf.push_back(total_rate);
    }
    for (double& c : class_cdf) {
        c /= total_rate;
    }
    class_cdf.back() = 1.0;

    std::exponential_distribution<double> interarrival(total_rate);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ServiceSampler service(dist);

    std::vector<Server> servers(setup.servers);
    for (std::size_t p = 0; p < setup.pools.size(); ++p) {
        const auto& pool = setup.pools[p];
        std::size_t levels = 1;
        if (pool.priority) {
            levels = static_cast<std::size_t>(std::count(setup.pool_of_class.begin(), setup.pool_of_class.end(), p));
        }
        for (std::size_t k = 0; k < pool.size; ++k) {
            servers[pool.first_server + k].queues.resize(levels);
        }
    }
    std::vector<std::size_t> round_robin(setup.pools.size(), 0);

    const std::uint64_t first_measured = warmup;
    const std::uint64_t end_measured = warmup + config.measured_jobs;
    const double inf = std::numeric_limits<double>::infinity();
    double window_start = inf;
    double window_end = inf;

    std::vector<double> wait_sum(classes, 0.0);
    std::vector<std::uint64_t> wait_count(classes, 0);
    std::vector<std::uint64_t> arrivals_in_window(classes, 0);
    std::vector<std::uint64_t> completions_in_window(classes, 0);
    std::vector<std::int64_t> waiting(classes, 0);
    std::vector<double> waiting_area(classes, 0.0);
    double last_time = 0.0;

    std::priority_queue<Event, std::vector<Event>, Later> events;
    std::uint64_t next_seq = 0;
    std::uint64_t arrivals = 0;
    events.push({interarrival(rng), next_seq++, 0, true});

    auto start_service = [&](Server& srv, std::uint32_t id, const Job& job, double now) {
        if (!srv.busy) {
            srv.busy = true;
            srv.busy_since = now;
        }
        srv.cls = job.cls;
        if (job.index >= first_measured && job.index < end_measured) {
            wait_sum[job.cls] += now - job.arrival;
            ++wait_count[job.cls];
        }
        if (trace) {
            *trace << job.arrival << ',' << now << ',' << job.cls << ',' << id << '\n';
        }
        events.push({now + service(rng), next_seq++, id, false});
    };

    while (!events.empty()) {
        const Event ev = events.top();
        events.pop();
        const double now = ev.time;
        const double span = overlap(last_time, now, window_start, window_end);
        if (span > 0.0) {
            for (std::size_t l = 0; l < classes; ++l) {
                waiting_area[l] += static_cast<double>(waiting[l]) * span;
            }
        }
        last_time = now;

        if (ev.arrival) {
            const std::uint64_t index = arrivals++;
            if (index == first_measured) {
                window_start = now;
            }
            const double u = unit(rng);
            std::uint32_t cls = 0;
            while (cls + 1 < classes && u >= class_cdf[cls]) {
                ++cls;
            }
            if (index >= first_measured && index < end_measured) {
                ++arrivals_in_window[cls];
            }

            const std::size_t p = setup.pool_of_class[cls];
            const auto& pool = setup.pools[p];
            std::size_t k = 0;
            if (pool.size > 1) {
                if (config.dispatch == Dispatch::Random) {
                    k = std::uniform_int_distribution<std::size_t>(0, pool.size - 1)(rng);
                } else {
                    k = round_robin[p];
                    round_robin[p] = (k + 1) % pool.size;
                }
            }
            const auto id = static_cast<std::uint32_t>(pool.first_server + k);
            Server& srv = servers[id];
            const Job job{now, index, cls};
            if (!srv.busy) {
                start_service(srv, id, job, now);
            } else {
                const std::size_t level = pool.priority ? cls - pool.first_class : 0;
                srv.queues[level].push_back(job);
                ++srv.waiting;
                ++waiting[cls];
                if (srv.waiting > kQueueOverflow) {
                    throw SimulationOverflow("simulate: more than " + std::to_string(kQueueOverflow)
                                             + " jobs waiting at server " + std::to_string(id));
                }
            }

            if (index + 1 == end_measured) {
                window_end = now;
            } else {
                events.push({now + interarrival(rng), next_seq++, 0, true});
            }
        } else {
            Server& srv = servers[ev.server];
            if (now >= window_start && now <= window_end) {
                ++completions_in_window[srv.cls];
            }
            auto next = std::find_if(srv.queues.begin(), srv.queues.end(), [](const auto& q) { return !q.empty(); });
            if (next == srv.queues.end()) {
                srv.busy = false;
                srv.busy_time += overlap(srv.busy_since, now, window_start, window_end);
            } else {
                const Job job = next->front();
                next->pop_front();
                --srv.waiting;
                --waiting[job.cls];
                start_service(srv, ev.server, job, now);
            }
        }
    }

    Replication out;
    const double duration = window_end - window_start;
    out.jobs = arrivals;
    for (std::size_t l = 0; l < classes; ++l) {
        const double w = wait_count[l] ? wait_sum[l] / static_cast<double>(wait_count[l]) : 0.0;
        const double lam = static_cast<double>(arrivals_in_window[l]) / duration;
        out.wait.push_back(w);
        out.arrival_rate.push_back(lam);
        out.throughput.push_back(static_cast<double>(completions_in_window[l]) / duration);
        out.queue_length.push_back(waiting_area[l] / duration);
        out.little.push_back(lam * w);
    }
    double busy = 0.0;
    for (const auto& srv : servers) {
        out.server_utilization.push_back(srv.busy_time / duration);
        busy += srv.busy_time;
    }
    out.utilization = busy / (duration * static_cast<double>(servers.size()));
    return out;
}

Estimate estimate(const std::vector<double>& samples)
{
    Estimate e;
    const double n = static_cast<double>(samples.size());
    for (double x : samples) {
        e.mean += x;
    }
    e.mean /= n;
    if (samples.size() < 2) {
        e.half_width = std::numeric_limits<double>::infinity();
        return e;
    }
    double ss = 0.0;
    for (double x : samples) {
        ss += (x - e.mean) * (x - e.mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    const boost::math::students_t t(n - 1.0);
    e.half_width = boost::math::quantile(boost::math::complement(t, 0.025)) * sd / std::sqrt(n);
    return e;
}

std::vector<Estimate> per_class(const std::vector<Replication>& reps, std::vector<double> Replication::*field)
{
    const std::size_t classes = (reps.front().*field).size();
    std::vector<Estimate> out;
    for (std::size_t l = 0; l < classes; ++l) {
        std::vector<double> xs;
        for (const auto& r : reps) {
            xs.push_back((r.*field)[l]);
        }
        out.push_back(estimate(xs));
    }
    return out;
}

} // namespace

void SimConfig::validate() const
{
    if (measured_jobs < 10'000) {
        throw InvalidParameter("simulate: at least 10^4 measured jobs are required");
    }
    if (replications < 5) {
        throw InvalidParameter("simulate: at least 5 replications are required");
    }
}

std::vector<double> analytic_waits(const optimizer::ArchitectureConfig& arch, std::span<const double> class_rates)
{
    check_rates(class_rates);
    const Setup setup = build_setup(arch, class_rates.size());
    const auto loads = pool_loads(setup, class_rates);
    std::vector<std::vector<double>> pool_waits(setup.pools.size());
    for (std::size_t p = 0; p < setup.pools.size(); ++p) {
        if (loads[p].empty()) {
            continue;
        }
        if (setup.pools[p].priority) {
            pool_waits[p] = queueing::priority_delays(loads[p], arch.dist);
        } else {
            double total = 0.0;
            for (double x : loads[p]) {
                total += x;
            }
            pool_waits[p].assign(loads[p].size(), queueing::fcfs_delay(total, arch.dist));
        }
    }
    std::vector<double> out;
    std::vector<std::size_t> used(setup.pools.size(), 0);
    for (std::size_t l = 0; l < class_rates.size(); ++l) {
        const std::size_t p = setup.pool_of_class[l];
        out.push_back(pool_waits[p][used[p]++]);
    }
    return out;
}

SimReport simulate(const optimizer::ArchitectureConfig& arch, std::span<const double> class_rates,
                   const SimConfig& config)
{
    config.validate();
    // Also rejects unstable pools.
    const auto predicted = analytic_waits(arch, class_rates);
    const Setup setup = build_setup(arch, class_rates.size());

    std::uint64_t warmup = 100'000;
    if (config.warmup_jobs) {
        warmup = *config.warmup_jobs;
    } else {
        // Relaxation time of an M/G/1 queue at load rho: ~ E[x^2] / (2 E[x] (1 - sqrt(rho))^2).
        double total_rate = 0.0;
        for (double r : class_rates) {
            total_rate += r;
        }
        double relax = 0.0;
        const auto loads = pool_loads(setup, class_rates);
        for (const auto& pool : loads) {
            double rho = 0.0;
            for (double x : pool) {
                rho += x * arch.dist.mean();
            }
            const double gap = 1.0 - std::sqrt(rho);
            relax = std::max(relax, queueing::residual_term(arch.dist) / arch.dist.mean() / (gap * gap));
        }
        warmup = std::max<std::uint64_t>(warmup, static_cast<std::uint64_t>(std::ceil(10.0 * relax * total_rate)));
    }

    std::vector<Replication> reps(config.replications);
    const unsigned workers = std::max(1u, std::min<unsigned>(config.threads, config.replications));
    std::vector<std::exception_ptr> errors(workers);
    auto work = [&](unsigned w) {
        try {
            for (std::size_t r = w; r < config.replications; r += workers) {
                reps[r] = run(setup, class_rates, arch.dist, config, warmup, r, r == 0 ? config.trace : nullptr);
            }
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

    SimReport report;
    report.wait = per_class(reps, &Replication::wait);
    report.throughput = per_class(reps, &Replication::throughput);
    report.arrival_rate = per_class(reps, &Replication::arrival_rate);
    report.queue_length = per_class(reps, &Replication::queue_length);
    report.little = per_class(reps, &Replication::little);
    report.server_utilization.assign(setup.servers, 0.0);
    std::vector<double> util;
    for (const auto& r : reps) {
        for (std::size_t k = 0; k < setup.servers; ++k) {
            report.server_utilization[k] += r.server_utilization[k] / static_cast<double>(reps.size());
        }
        util.push_back(r.utilization);
        report.jobs_simulated += r.jobs;
    }
    report.utilization = estimate(util);
    report.warmup_jobs = warmup;
    report.replications = reps.size();
    return report;
}

ValidationReport validate_formulas(const optimizer::ArchitectureConfig& arch, std::span<const double> class_rates,
                                   const SimConfig& config, std::span<const double> predicted, double tolerance)
{
    if (predicted.size() != class_rates.size()) {
        throw InvalidParameter("validate_formulas: one prediction per class is required");
    }
    if (!(tolerance > 0.0)) {
        throw InvalidParameter("validate_formulas: tolerance must be positive");
    }
    const SimReport sim = simulate(arch, class_rates, config);
    ValidationReport out;
    out.tolerance = tolerance;
    out.pass = true;
    for (std::size_t l = 0; l < predicted.size(); ++l) {
        out.predicted.push_back(predicted[l]);
        out.simulated.push_back(sim.wait[l].mean);
        out.half_width.push_back(sim.wait[l].half_width);
        const double gap = std::abs(sim.wait[l].mean - predicted[l]);
        const double dev = predicted[l] != 0.0 ? gap / std::abs(predicted[l]) : gap;
        out.deviation.push_back(dev);
        out.pass = out.pass && dev <= tolerance;
    }
    return out;
}

} // namespace qosdiff::simulator
