#include "doctest.h"
#include "oracle.hpp"

#include "qosdiff/errors.hpp"
#include "qosdiff/simulator.hpp"

#include <sstream>

using namespace qosdiff;
using namespace qosdiff::simulator;
using optimizer::ArchitectureConfig;
using doctest::Approx;

namespace {

SimConfig quick(std::uint64_t seed = 5)
{
    SimConfig c;
    c.seed = seed;
    c.warmup_jobs = 20'000;
    c.measured_jobs = 200'000;
    c.replications = 5;
    return c;
}

bool within(const Estimate& e, double want, double rel)
{
    return std::abs(e.mean - want) <= rel * want + e.half_width;
}

}  // namespace

TEST_SUITE("simulator")
{
    TEST_CASE("configuration checks")
    {
        SimConfig c;
        c.measured_jobs = 9'999;
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c.measured_jobs = 10'000;
        c.replications = 4;
        CHECK_THROWS_AS(c.validate(), InvalidParameter);
        c.replications = 5;
        CHECK_NOTHROW(c.validate());

        const ArchitectureConfig od{optimizer::OnDemand{1}, {}};
        const double over[] = {1.0};
        CHECK_THROWS_AS(simulate(od, over, quick()), UnstableQueue);
        const ArchitectureConfig sms{optimizer::Sms{{1, 1}}, {}};
        const double three[] = {0.1, 0.1, 0.1};
        CHECK_THROWS_AS(simulate(sms, three, quick()), InvalidParameter);
        const ArchitectureConfig hyb{optimizer::Hybrid{1, 1}, {}};
        const double one[] = {0.1};
        CHECK_THROWS_AS(simulate(hyb, one, quick()), InvalidParameter);
    }

    TEST_CASE("M/M/1 waiting time")
    {
        const ArchitectureConfig od{optimizer::OnDemand{1}, {}};
        const double rate[] = {0.5};
        const auto r = simulate(od, rate, quick());
        CHECK(within(r.wait[0], 1.0, 0.03));
        CHECK(within(r.utilization, 0.5, 0.01));
        CHECK(r.replications == 5);
        CHECK(r.jobs_simulated == 5 * (200'000 + 20'000));
    }

    TEST_CASE("report invariants")
    {
        const ArchitectureConfig pbs{optimizer::Pbs{3}, {}};
        const double rates[] = {0.6, 0.6, 0.9};
        const auto r = simulate(pbs, rates, quick());
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(r.wait[c].mean >= 0.0);
            CHECK(r.throughput[c].mean <= r.arrival_rate[c].mean + r.throughput[c].half_width + r.arrival_rate[c].half_width);
            CHECK(within(r.arrival_rate[c], rates[c], 0.01));
        }
        for (double u : r.server_utilization) {
            CHECK(u >= 0.0);
            CHECK(u <= 1.0);
        }
    }

    TEST_CASE("priority classes are ordered and match Cobham")
    {
        const ArchitectureConfig pbs{optimizer::Pbs{1}, {}};
        const double rates[] = {0.2, 0.2, 0.3};
        const auto r = simulate(pbs, rates, quick());
        CHECK(r.wait[0].mean < r.wait[1].mean);
        CHECK(r.wait[1].mean < r.wait[2].mean);
        const auto want = oracle::cobham_waits({0.2, 0.2, 0.3}, {{1.0, 1.0}});
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(within(r.wait[c], want[c], 0.04));
        }
    }

    TEST_CASE("work conservation and Little's law")
    {
        const ArchitectureConfig pbs{optimizer::Pbs{4}, queueing::ServiceDist::hyperexponential({{0.75, 0.5}, {0.25, 2.5}})};
        const double rates[] = {0.8, 1.0, 1.2};
        const auto r = simulate(pbs, rates, quick());
        CHECK(within(r.utilization, 3.0 / 4.0, 0.01));
        for (std::size_t c = 0; c < 3; ++c) {
            const double tol = r.queue_length[c].half_width + r.little[c].half_width + 0.01 * r.little[c].mean;
            CHECK(std::abs(r.queue_length[c].mean - r.little[c].mean) <= tol);
        }
    }

    TEST_CASE("hyperexponential FCFS waiting time")
    {
        const auto dist = queueing::ServiceDist::hyperexponential({{0.75, 0.5}, {0.25, 2.5}});
        const ArchitectureConfig od{optimizer::OnDemand{2}, dist};
        const double rate[] = {1.2};
        auto c = quick();
        c.measured_jobs = 400'000;
        const auto r = simulate(od, rate, c);
        CHECK(within(r.wait[0], oracle::mg1_wait(0.6, {{0.75, 0.5}, {0.25, 2.5}}), 0.05));
    }

    TEST_CASE("same seed gives the same report and trace")
    {
        const ArchitectureConfig hyb{optimizer::Hybrid{3, 2}, {}};
        const double rates[] = {1.0, 0.4, 0.6};
        auto c = quick(17);
        c.measured_jobs = 20'000;
        c.warmup_jobs = 1'000;
        std::ostringstream t1, t2;
        c.trace = &t1;
        const auto a = simulate(hyb, rates, c);
        c.trace = &t2;
        c.threads = 3;
        const auto b = simulate(hyb, rates, c);
        CHECK(t1.str() == t2.str());
        CHECK_FALSE(t1.str().empty());
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(a.wait[k].mean == b.wait[k].mean);
            CHECK(a.wait[k].half_width == b.wait[k].half_width);
            CHECK(a.queue_length[k].mean == b.queue_length[k].mean);
        }
        CHECK(a.server_utilization == b.server_utilization);

        c.seed = 18;
        c.trace = nullptr;
        const auto d = simulate(hyb, rates, c);
        CHECK(d.wait[1].mean != a.wait[1].mean);

        std::istringstream in(t1.str());
        std::string line;
        std::getline(in, line);
        CHECK(std::count(line.begin(), line.end(), ',') == 3);
    }

    TEST_CASE("dispatch policies")
    {
        // One server per pool: both policies see the same Poisson stream.
        const ArchitectureConfig single{optimizer::Sms{{1, 1}}, {}};
        const double two[] = {0.3, 0.5};
        auto rr = quick(9);
        rr.dispatch = Dispatch::RoundRobin;
        const auto a = simulate(single, two, quick(9));
        const auto b = simulate(single, two, rr);
        for (std::size_t k = 0; k < 2; ++k) {
            CHECK(std::abs(a.wait[k].mean - b.wait[k].mean) <= a.wait[k].half_width + b.wait[k].half_width);
        }

        // Many servers: cycling smooths per-server arrivals, so waits drop
        // well below the M/G/1 prediction that Random dispatch attains.
        const ArchitectureConfig hyb{optimizer::Hybrid{51, 49}, {}};
        const double rates[] = {2.4, 1.2, 2.2, 4.2};
        const auto random = simulate(hyb, rates, quick(10));
        const auto cyc = simulate(hyb, rates, [] {
            auto c = quick(10);
            c.dispatch = Dispatch::RoundRobin;
            return c;
        }());
        const auto predicted = analytic_waits(hyb, rates);
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK(within(random.wait[k], predicted[k], 0.06));
            CHECK(cyc.wait[k].mean < 0.5 * random.wait[k].mean);
        }
    }

    TEST_CASE("analytic waits")
    {
        const ArchitectureConfig sms{optimizer::Sms{{2, 3}}, {}};
        const double rates[] = {0.4, 1.5};
        const auto w = analytic_waits(sms, rates);
        CHECK(w[0] == Approx(oracle::mg1_wait(0.2, {{1.0, 1.0}})));
        CHECK(w[1] == Approx(oracle::mg1_wait(0.5, {{1.0, 1.0}})));
        const ArchitectureConfig hyb{optimizer::Hybrid{51, 49}, {}};
        const double hr[] = {2.4, 1.2, 2.2, 4.2};
        const auto h = analytic_waits(hyb, hr);
        CHECK(oracle::near(h[1], 0.1590, 5e-4));
        CHECK(h[0] == Approx(oracle::mg1_wait(2.4 / 51.0, {{1.0, 1.0}})));
    }

    TEST_CASE("formula validation and its negative control")
    {
        const ArchitectureConfig sms{optimizer::Sms{{27}}, {}};
        const double rate[] = {6.0};
        const auto predicted = analytic_waits(sms, rate);
        CHECK(oracle::near(predicted[0], 0.2857, 5e-4));
        auto c = quick(3);
        c.measured_jobs = 400'000;
        const auto good = validate_formulas(sms, rate, c, predicted, 0.05);
        CHECK(good.pass);
        const double doubled[] = {2.0 * predicted[0]};
        const auto bad = validate_formulas(sms, rate, c, doubled, 0.05);
        CHECK_FALSE(bad.pass);
        CHECK(bad.deviation[0] > 0.4);
        const double wrong_size[] = {0.1, 0.2};
        CHECK_THROWS_AS(validate_formulas(sms, rate, c, wrong_size), InvalidParameter);
    }
}
