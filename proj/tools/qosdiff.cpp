// qosdiff: SLA menu optimization, bounds, simulation and plot data.

#include "qosdiff/commands.hpp"
#include "qosdiff/errors.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>

using namespace qosdiff;

namespace {

struct Options {
    std::string scenario_path;
    std::string preset;
    std::string arch;
    std::size_t slas = 0;
    unsigned threads = 0;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool best_effort = false;
    std::size_t candidate_budget = 0;
    double time_budget = -1.0;
    bool validate = false;
    std::string target;
};

void add_common(CLI::App* cmd, Options& o)
{
    cmd->add_option("--scenario", o.scenario_path, "scenario file (YAML key tree)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "grid-low | grid-high");
    cmd->add_option("--arch", o.arch, "sms | pbs | hybrid | od");
    cmd->add_option("--L", o.slas, "number of SLAs (reproduce: largest L)");
    cmd->add_option("--threads", o.threads, "worker threads (default: QOSDIFF_THREADS or 1)");
    cmd->add_option("--seed", o.seed, "simulation master seed");
    cmd->add_option("--out", o.out_dir, "output directory");
    cmd->add_flag("--best-effort", o.best_effort, "local search when exact enumeration exceeds the budget");
    cmd->add_option("--candidate-budget", o.candidate_budget, "largest number of cut tuples searched exactly");
    cmd->add_option("--time-budget", o.time_budget, "seconds for best-effort search (breaks reproducibility)");
}

scenario::Scenario build(const Options& o, std::vector<std::string>& overrides)
{
    if (!o.scenario_path.empty() && !o.preset.empty()) {
        throw InvalidParameter("--scenario and --preset are mutually exclusive (put 'preset:' in the file)");
    }
    auto sc = o.scenario_path.empty() ? scenario::from_preset(o.preset.empty() ? "grid-low" : o.preset)
                                      : scenario::load_scenario(o.scenario_path);
    if (!o.arch.empty()) {
        const auto kind = optimizer::parse_arch(o.arch);
        if (!kind) {
            throw InvalidParameter("--arch must be sms, pbs, hybrid or od");
        }
        sc.arch = *kind;
        overrides.push_back("arch=" + o.arch);
    }
    if (o.slas) {
        sc.slas = o.slas;
        overrides.push_back("L=" + std::to_string(o.slas));
    }
    unsigned threads = o.threads;
    if (!threads) {
        if (const char* env = std::getenv("QOSDIFF_THREADS")) {
            threads = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
        }
    }
    if (threads) {
        sc.search.threads = threads;
        sc.simulation.config.threads = threads;
        overrides.push_back("threads=" + std::to_string(threads));
    }
    if (o.seed) {
        sc.simulation.config.seed = *o.seed;
        overrides.push_back("seed=" + std::to_string(*o.seed));
    }
    if (!o.out_dir.empty()) {
        sc.output_dir = o.out_dir;
    }
    if (o.best_effort) {
        sc.search.best_effort = true;
        overrides.push_back("best_effort");
    }
    if (o.candidate_budget) {
        sc.search.candidate_budget = o.candidate_budget;
        overrides.push_back("candidate_budget=" + std::to_string(o.candidate_budget));
    }
    if (o.time_budget >= 0.0) {
        sc.search.time_budget_seconds = o.time_budget;
        overrides.push_back("time_budget=" + std::to_string(o.time_budget));
    }
    sc.validate();
    return sc;
}

int fail(std::string_view category, const std::string& message, int code)
{
    std::cerr << "error: category=" << category << " message=" << message << '\n';
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"QoS-differentiated SLA pricing: optimizer, bounds, simulator"};
    app.require_subcommand(1);
    Options o;

    auto* optimize = app.add_subcommand("optimize", "optimal SLA menus over the load grid");
    auto* bounds = app.add_subcommand("bounds", "PBS upper bound and SMS lower bounds");
    auto* simulate = app.add_subcommand("simulate", "discrete-event simulation of a configuration");
    auto* dsic = app.add_subcommand("dsic", "misreport scan of the optimal menu");
    auto* reproduce = app.add_subcommand("reproduce", "plot data for a named target");
    for (auto* cmd : {optimize, bounds, simulate, dsic, reproduce}) {
        add_common(cmd, o);
    }
    simulate->add_flag("--validate", o.validate, "compare simulated waits with the formulas");
    reproduce
        ->add_option("target", o.target,
                     "pbs-bound | sms-bound | best-gamma | gamma-by-load | prices-by-load | delays-by-load | "
                     "hybrid-vs-sms | all")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        return fail("usage", e.what(), cli::kUsage);
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        std::vector<std::string> overrides;
        auto sc = build(o, overrides);
        cli::Outcome outcome;
        std::string name;
        if (optimize->parsed()) {
            name = "optimize";
            outcome = cli::cmd_optimize(sc);
        } else if (bounds->parsed()) {
            name = "bounds";
            outcome = cli::cmd_bounds(sc);
        } else if (simulate->parsed()) {
            name = "simulate";
            outcome = cli::cmd_simulate(sc, o.validate);
        } else if (dsic->parsed()) {
            name = "dsic";
            outcome = cli::cmd_dsic(sc);
        } else {
            name = "reproduce " + o.target;
            outcome = cli::cmd_reproduce(sc, o.target, o.slas ? o.slas : 6);
        }
        outcome.summary["overrides"] = overrides;
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        cli::write_summary(sc, name, wall, outcome);

        std::cout << name << ": wrote";
        for (const auto& f : outcome.files) {
            std::cout << ' ' << f;
        }
        std::cout << " summary.json to " << sc.output_dir << '\n';
        if (outcome.summary.contains("best")) {
            const auto& b = outcome.summary["best"];
            std::cout << "best gamma " << b["gamma"].get<double>() << " at load " << b["load"].get<double>()
                      << (b["exact"].get<bool>() ? "" : " (best-effort)") << '\n';
        }
        if (outcome.summary.contains("validation")) {
            std::cout << "validation " << (outcome.summary["validation"]["pass"].get<bool>() ? "passed" : "FAILED")
                      << '\n';
        }
        if (outcome.exit_code == cli::kSimulationMismatch) {
            return fail("simulation", "simulated waits deviate from the formulas beyond tolerance",
                        outcome.exit_code);
        }
        return outcome.exit_code;
    } catch (const ScenarioError& e) {
        const bool parse = e.kind() == ScenarioError::Kind::Parse;
        for (const auto& p : e.problems()) {
            fail(parse ? "parse" : "validation", p, 0);
        }
        return parse ? cli::kUsage : cli::kValidation;
    } catch (const InvalidParameter& e) {
        return fail("validation", e.what(), cli::kValidation);
    } catch (const NoFeasibleCandidate& e) {
        return fail("infeasible", e.what(), cli::kInfeasible);
    } catch (const SearchTooLarge& e) {
        return fail("infeasible", std::string(e.what()) + " (use --best-effort or raise --candidate-budget)",
                    cli::kInfeasible);
    } catch (const UnstableQueue& e) {
        return fail("domain", e.what(), cli::kDomain);
    } catch (const DomainError& e) {
        return fail("domain", e.what(), cli::kDomain);
    } catch (const SimulationOverflow& e) {
        return fail("domain", e.what(), cli::kDomain);
    } catch (const std::exception& e) {
        return fail("internal", e.what(), cli::kInternal);
    }
}
