#include "qosdiff/commands.hpp"

#include "qosdiff/errors.hpp"
#include "qosdiff/mechanism.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#ifndef QOSDIFF_GIT_DESCRIBE
#define QOSDIFF_GIT_DESCRIBE "unknown"
#endif

namespace qosdiff::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string num(double x)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : header_(std::move(header)) {}

    void row(std::vector<std::string> cells)
    {
        cells.resize(header_.size());
        rows_.push_back(std::move(cells));
    }

    void write(const scenario::Scenario& sc, const std::string& file, Outcome& outcome) const
    {
        fs::create_directories(sc.output_dir);
        const fs::path path = fs::path(sc.output_dir) / file;
        std::ofstream out(path);
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
        auto line = [&out](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                out << (i ? "," : "") << cells[i];
            }
            out << '\n';
        };
        line(header_);
        for (const auto& r : rows_) {
            line(r);
        }
        outcome.files.push_back(file);
    }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::vector<std::size_t> layout_counts(const optimizer::Layout& layout)
{
    return std::visit(
        [](const auto& a) -> std::vector<std::size_t> {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, optimizer::Sms>) {
                return a.partition;
            } else if constexpr (std::is_same_v<T, optimizer::Hybrid>) {
                return {a.first, a.second};
            } else {
                return {a.servers};
            }
        },
        layout);
}

std::string join(const std::vector<std::size_t>& xs)
{
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out += (i ? " " : "") + std::to_string(xs[i]);
    }
    return out;
}

json result_json(const model::WtpModel& wtp, const optimizer::OptResult& r)
{
    json cut_phi0 = json::array();
    for (std::size_t l = 1; l < r.menu.thresholds.size() - 1; ++l) {
        cut_phi0.push_back(model::zero_value_delay(wtp, r.menu.thresholds[l]));
    }
    return {
        {"architecture", std::string(optimizer::to_string(r.architecture.kind()))},
        {"load", r.load},
        {"gamma", r.gamma},
        {"revenue", r.revenue},
        {"exact", r.exact},
        {"delays", r.menu.delays},
        {"prices", r.menu.prices},
        {"cuts", r.segmentation.cuts()},
        {"cut_phi0", cut_phi0},
        {"servers", layout_counts(r.architecture.layout)},
        {"class_rates", r.class_rates},
        {"warnings", r.warnings},
    };
}

std::vector<std::string> sweep_header(std::size_t slas)
{
    std::vector<std::string> h{"lambda", "feasible", "exact", "gamma", "revenue"};
    for (std::size_t l = 1; l <= slas; ++l) {
        h.push_back("phi_" + std::to_string(l));
    }
    for (std::size_t l = 1; l <= slas; ++l) {
        h.push_back("p_" + std::to_string(l));
    }
    for (std::size_t l = 2; l <= slas; ++l) {
        h.push_back("cut_" + std::to_string(l));
    }
    for (std::size_t l = 2; l <= slas; ++l) {
        h.push_back("cut_phi0_" + std::to_string(l));
    }
    h.push_back("servers");
    return h;
}

std::vector<std::string> sweep_cells(const model::WtpModel& wtp, const optimizer::SweepRow& row, std::size_t slas)
{
    std::vector<std::string> c{num(row.load)};
    if (!row.result) {
        c.emplace_back("0");
        return c;
    }
    const auto& r = *row.result;
    c.insert(c.end(), {"1", r.exact ? "1" : "0", num(r.gamma), num(r.revenue)});
    for (std::size_t l = 0; l < slas; ++l) {
        c.push_back(l < r.menu.size() ? num(r.menu.delays[l]) : "");
    }
    for (std::size_t l = 0; l < slas; ++l) {
        c.push_back(l < r.menu.size() ? num(r.menu.prices[l]) : "");
    }
    const auto cuts = r.segmentation.cuts();
    for (std::size_t l = 0; l + 1 < slas; ++l) {
        c.push_back(l < cuts.size() ? std::to_string(cuts[l]) : "");
    }
    for (std::size_t l = 0; l + 1 < slas; ++l) {
        c.push_back(l < cuts.size() ? num(model::zero_value_delay(wtp, r.menu.thresholds[l + 1])) : "");
    }
    c.push_back(join(layout_counts(r.architecture.layout)));
    return c;
}

std::optional<optimizer::OptResult> best_of(const std::vector<optimizer::SweepRow>& rows)
{
    std::optional<optimizer::OptResult> best;
    for (const auto& row : rows) {
        if (row.result && (!best || row.result->revenue > best->revenue)) {
            best = *row.result;
        }
    }
    return best;
}

std::vector<optimizer::SweepRow> run_sweep(const scenario::Scenario& sc, optimizer::ArchKind kind, std::size_t slas,
                                           const optimizer::SearchOptions& search)
{
    const auto grid = sc.load_grid();
    std::vector<optimizer::SweepRow> rows;
    for (double load : grid) {
        optimizer::SweepRow row{.load = load, .result = std::nullopt, .failure = {}};
        try {
            row.result = optimizer::optimize(kind, sc.problem(load), slas, search);
        } catch (const NoFeasibleCandidate& e) {
            row.failure = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

optimizer::OptResult best_config(const scenario::Scenario& sc)
{
    const std::size_t slas = sc.arch == optimizer::ArchKind::OnDemand ? 1 : sc.slas;
    auto best = best_of(run_sweep(sc, sc.arch, slas, sc.search));
    if (!best) {
        throw NoFeasibleCandidate("no feasible configuration at any load of the grid");
    }
    return std::move(*best);
}

// Two-branch hyperexponential sweep: weight 0.75 on a branch whose mean runs
// 0.20, 0.25, ..., 0.95, second branch sized for overall mean 1.
struct HyperPoint {
    double mean1;
    queueing::ServiceDist dist;
};

std::vector<HyperPoint> hyper_sweep()
{
    std::vector<HyperPoint> out;
    for (int i = 20; i <= 95; i += 5) {
        const double mean1 = i / 100.0;
        out.push_back({mean1, queueing::ServiceDist::unit_mean_two_branch(0.75, mean1)});
    }
    return out;
}

// Delay at which the median type stops paying: the even-split phi0-hat.
double half_split_phi0(const scenario::Scenario& sc, const model::TypePopulation& pop)
{
    const std::size_t half = pop.size() / 2;
    return 1.0 / pop.alpha(half) + sc.wtp.od_delay;
}

} // namespace

std::string sha256_hex(std::string_view text)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int size = 0;
    if (EVP_Digest(text.data(), text.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < size; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        out += buf;
    }
    return out;
}

std::string source_version()
{
    return QOSDIFF_GIT_DESCRIBE;
}

Outcome cmd_optimize(const scenario::Scenario& sc)
{
    const std::size_t slas = sc.arch == optimizer::ArchKind::OnDemand ? 1 : sc.slas;
    const auto rows = run_sweep(sc, sc.arch, slas, sc.search);

    Outcome out;
    Csv csv(sweep_header(slas));
    json points = json::array();
    for (const auto& row : rows) {
        csv.row(sweep_cells(sc.wtp, row, slas));
        if (!row.result) {
            points.push_back({{"load", row.load}, {"feasible", false}, {"reason", row.failure}});
        }
    }
    const std::string file = "optimize_" + std::string(optimizer::to_string(sc.arch)) + "_L" + std::to_string(slas) + ".csv";
    csv.write(sc, file, out);

    const auto best = best_of(rows);
    if (!best) {
        throw NoFeasibleCandidate("no feasible configuration at any load of the grid");
    }
    out.summary["best"] = result_json(sc.wtp, *best);
    out.summary["infeasible_loads"] = points;
    out.summary["od_revenue"] = optimizer::od_revenue(sc.servers, sc.wtp, sc.dist);
    return out;
}

Outcome cmd_bounds(const scenario::Scenario& sc)
{
    Outcome out;
    const auto pop = sc.make_population(0.1);
    const double T = sc.wtp.od_delay;
    const double phi0 = half_split_phi0(sc, pop);
    const double split = pop.alpha(pop.size() / 2);

    Csv table({"quantity", "value"});
    const double od_load = queueing::od_max_load(T, sc.dist);
    const double upper = optimizer::pbs_upper_bound(T, sc.dist);
    const double closed_05 = optimizer::sms_lower_bound_beta3(T, 0.5, sc.dist);
    const double closed = optimizer::sms_lower_bound_beta3(T, phi0, sc.dist);
    table.row({"A", num(queueing::residual_term(sc.dist))});
    table.row({"od_max_load", num(od_load)});
    table.row({"pbs_upper_bound", num(upper)});
    table.row({"sms_lower_bound_beta3_phi0_0.5", num(closed_05)});
    table.row({"half_split_phi0", num(phi0)});
    table.row({"sms_lower_bound_beta3", num(closed)});
    json summary{{"A", queueing::residual_term(sc.dist)},
                 {"od_max_load", od_load},
                 {"pbs_upper_bound", upper},
                 {"sms_lower_bound_beta3_phi0_0.5", closed_05},
                 {"half_split_phi0", phi0},
                 {"sms_lower_bound_beta3", closed}};
    if (split > pop.min_alpha() && split < pop.max_alpha()) {
        const double general = optimizer::sms_lower_bound(sc.wtp, pop, split, (phi0 + T) / 2.0, sc.dist);
        table.row({"sms_lower_bound", num(general)});
        summary["sms_lower_bound"] = general;
    }
    table.write(sc, "bounds.csv", out);

    Csv sweep({"mean_1", "mean_2", "A", "pbs_upper_bound", "kappa"});
    double min_kappa = std::numeric_limits<double>::infinity();
    double min_a = std::numeric_limits<double>::infinity();
    for (const auto& p : hyper_sweep()) {
        const auto& h = std::get<queueing::HyperExponential>(p.dist.variant());
        const double a = queueing::residual_term(p.dist);
        const double kappa = optimizer::sms_lower_bound_beta3(T, 0.5, p.dist);
        min_kappa = std::min(min_kappa, kappa);
        min_a = std::min(min_a, a);
        sweep.row({num(p.mean1), num(h.branches[1].mean), num(a), num(optimizer::pbs_upper_bound(T, p.dist)), num(kappa)});
    }
    sweep.write(sc, "bounds_hyper_sweep.csv", out);
    summary["hyper_sweep_min_A"] = min_a;
    summary["hyper_sweep_min_kappa"] = min_kappa;
    out.summary["bounds"] = summary;
    return out;
}

Outcome cmd_simulate(const scenario::Scenario& sc, bool validate)
{
    Outcome out;
    optimizer::ArchitectureConfig arch{optimizer::OnDemand{1}, sc.dist};
    std::vector<double> rates;
    if (sc.simulation.layout) {
        arch.layout = *sc.simulation.layout;
        rates = sc.simulation.rates;
    } else {
        auto best = best_config(sc);
        arch = best.architecture;
        rates = best.class_rates;
        out.summary["configuration"] = result_json(sc.wtp, best);
    }

    auto config = sc.simulation.config;
    std::ofstream trace;
    if (!sc.simulation.trace_path.empty()) {
        trace.open(sc.simulation.trace_path);
        if (!trace) {
            throw std::runtime_error("cannot write trace " + sc.simulation.trace_path);
        }
        trace << "arrival,start,class,server\n";
        trace.precision(17);
        config.trace = &trace;
    }
    const auto report = simulator::simulate(arch, rates, config);
    const auto predicted = simulator::analytic_waits(arch, rates);

    Csv csv({"class", "rate", "predicted_wait", "wait", "wait_ci", "deviation", "throughput", "queue_length",
             "queue_length_ci", "little", "little_ci"});
    bool pass = true;
    json classes = json::array();
    for (std::size_t l = 0; l < rates.size(); ++l) {
        const double dev = std::abs(report.wait[l].mean - predicted[l]) / predicted[l];
        pass = pass && dev <= sc.simulation.tolerance;
        csv.row({std::to_string(l + 1), num(rates[l]), num(predicted[l]), num(report.wait[l].mean),
                 num(report.wait[l].half_width), num(dev), num(report.throughput[l].mean),
                 num(report.queue_length[l].mean), num(report.queue_length[l].half_width), num(report.little[l].mean),
                 num(report.little[l].half_width)});
        classes.push_back({{"rate", rates[l]},
                           {"predicted_wait", predicted[l]},
                           {"wait", report.wait[l].mean},
                           {"wait_ci", report.wait[l].half_width},
                           {"deviation", dev}});
    }
    csv.write(sc, "simulate.csv", out);
    out.summary["simulation"] = {{"classes", classes},
                                 {"utilization", report.utilization.mean},
                                 {"utilization_ci", report.utilization.half_width},
                                 {"jobs_simulated", report.jobs_simulated},
                                 {"warmup_jobs", report.warmup_jobs},
                                 {"replications", report.replications},
                                 {"dispatch", config.dispatch == simulator::Dispatch::Random ? "random" : "round-robin"}};
    if (validate) {
        out.summary["validation"] = {{"tolerance", sc.simulation.tolerance}, {"pass", pass}};
        if (!pass) {
            out.exit_code = kSimulationMismatch;
        }
    }
    return out;
}

Outcome cmd_dsic(const scenario::Scenario& sc)
{
    Outcome out;
    const auto best = best_config(sc);
    const auto pop = sc.make_population(best.load);
    const auto report = mechanism::verify_dsic(sc.wtp, pop, best.menu);

    Csv csv({"check", "truthful", "worst_gain"});
    csv.row({"optimal_menu", report.truthful ? "1" : "0", num(report.worst_violation)});
    json perturbed = json::array();
    for (std::size_t l = 1; l < best.menu.size(); ++l) {
        auto menu = best.menu;
        menu.prices[l] += 0.01;
        const auto r = mechanism::verify_dsic(sc.wtp, pop, menu);
        csv.row({"p_" + std::to_string(l + 1) + "+0.01", r.truthful ? "1" : "0", num(r.worst_violation)});
        perturbed.push_back({{"sla", l + 1}, {"detected", !r.truthful}, {"worst_gain", r.worst_violation}});
    }
    csv.write(sc, "dsic.csv", out);
    out.summary["configuration"] = result_json(sc.wtp, best);
    out.summary["dsic"] = {{"truthful", report.truthful},
                           {"worst_violation", report.worst_violation},
                           {"pairs_checked", pop.size() * pop.size()},
                           {"perturbations", perturbed}};
    return out;
}

std::vector<std::string> reproduce_targets()
{
    return {"pbs-bound",      "sms-bound",      "best-gamma",    "gamma-by-load",
            "prices-by-load", "delays-by-load", "hybrid-vs-sms", "all"};
}

Outcome cmd_reproduce(const scenario::Scenario& sc, std::string_view target, std::size_t max_slas)
{
    const auto ids = reproduce_targets();
    if (std::find(ids.begin(), ids.end(), target) == ids.end()) {
        throw InvalidParameter("unknown reproduce target '" + std::string(target) + "'");
    }
    if (max_slas < 2) {
        throw InvalidParameter("reproduce: the SLA range needs L >= 2");
    }
    Outcome out;
    const bool all = target == "all";
    const double T = sc.wtp.od_delay;
    auto search = sc.search;
    search.best_effort = true;

    if (all || target == "pbs-bound" || target == "sms-bound") {
        Csv pbs_bound({"mean_1", "mean_2", "A", "pbs_upper_bound"});
        Csv sms_bound({"mean_1", "mean_2", "A", "kappa"});
        for (const auto& p : hyper_sweep()) {
            const auto& h = std::get<queueing::HyperExponential>(p.dist.variant());
            const double a = queueing::residual_term(p.dist);
            pbs_bound.row({num(p.mean1), num(h.branches[1].mean), num(a), num(optimizer::pbs_upper_bound(T, p.dist))});
            sms_bound.row({num(p.mean1), num(h.branches[1].mean), num(a),
                      num(optimizer::sms_lower_bound_beta3(T, 0.5, p.dist))});
        }
        if (all || target == "pbs-bound") {
            pbs_bound.write(sc, "pbs_bound.csv", out);
        }
        if (all || target == "sms-bound") {
            sms_bound.write(sc, "sms_bound.csv", out);
        }
    }

    const bool sweeps = all || target == "best-gamma" || target == "gamma-by-load" || target == "prices-by-load"
        || target == "delays-by-load";
    if (sweeps) {
        // SMS sweeps for both delay tolerances and L = 2..max.
        std::map<std::pair<double, std::size_t>, std::vector<optimizer::SweepRow>> table;
        for (double delta : {0.02, 0.04}) {
            auto local = sc;
            local.population.delta = delta;
            local.population.alphas.clear();
            local.population.probs.clear();
            local.loads.clear();
            for (std::size_t L = 2; L <= max_slas; ++L) {
                table[{delta, L}] = run_sweep(local, optimizer::ArchKind::Sms, L, search);
            }
        }

        Csv best_gamma({"delta", "L", "gamma", "lambda", "exact"});
        Csv gamma_by_load({"delta", "L", "lambda", "feasible", "exact", "gamma"});
        std::vector<std::string> h8{"delta", "L", "lambda", "feasible", "exact"};
        std::vector<std::string> h9 = h8;
        for (std::size_t l = 1; l <= max_slas; ++l) {
            h8.push_back("p_" + std::to_string(l));
            h9.push_back("phi_" + std::to_string(l));
        }
        for (std::size_t l = 2; l <= max_slas; ++l) {
            h9.push_back("cut_phi0_" + std::to_string(l));
        }
        Csv prices_by_load(h8);
        Csv delays_by_load(h9);
        json best = json::array();
        for (const auto& [key, rows] : table) {
            const auto b = best_of(rows);
            best_gamma.row({num(key.first), std::to_string(key.second), b ? num(b->gamma) : "", b ? num(b->load) : "",
                      b ? (b->exact ? "1" : "0") : ""});
            if (b) {
                best.push_back({{"delta", key.first}, {"L", key.second}, {"gamma", b->gamma}, {"lambda", b->load},
                                {"exact", b->exact}});
            }
            for (const auto& row : rows) {
                const auto* r = row.result ? &*row.result : nullptr;
                std::vector<std::string> head{num(key.first), std::to_string(key.second), num(row.load),
                                              r ? "1" : "0", r ? (r->exact ? "1" : "0") : ""};
                gamma_by_load.row({head[0], head[1], head[2], head[3], head[4], r ? num(r->gamma) : ""});
                auto c8 = head;
                auto c9 = head;
                if (r) {
                    for (std::size_t l = 0; l < max_slas; ++l) {
                        c8.push_back(l < r->menu.size() ? num(r->menu.prices[l]) : "");
                        c9.push_back(l < r->menu.size() ? num(r->menu.delays[l]) : "");
                    }
                    for (std::size_t l = 1; l < max_slas; ++l) {
                        c9.push_back(l < r->menu.size() ? num(model::zero_value_delay(sc.wtp, r->menu.thresholds[l]))
                                                        : "");
                    }
                }
                prices_by_load.row(std::move(c8));
                delays_by_load.row(std::move(c9));
            }
        }
        if (all || target == "best-gamma") {
            best_gamma.write(sc, "best_gamma.csv", out);
        }
        if (all || target == "gamma-by-load") {
            gamma_by_load.write(sc, "gamma_by_load.csv", out);
        }
        if (all || target == "prices-by-load") {
            prices_by_load.write(sc, "prices_by_load.csv", out);
        }
        if (all || target == "delays-by-load") {
            delays_by_load.write(sc, "delays_by_load.csv", out);
        }
        out.summary["best_per_L"] = best;
    }

    if (all || target == "hybrid-vs-sms") {
        auto local = sc;
        local.loads.clear();
        // Reference configurations replayed as they stand.
        const auto sms_problem = local.problem(0.12);
        const std::vector<std::size_t> sms_part{21, 24, 28, 27};
        const std::vector<std::size_t> sms_cuts{5, 12, 26};
        const std::vector<std::size_t> hyb_cuts{13, 19, 30};
        const auto sms_eval = optimizer::evaluate_sms(sms_problem, sms_part, sms_cuts);
        const auto hyb_eval = optimizer::evaluate_hybrid(local.problem(0.10), 51, hyb_cuts);

        Csv replay({"config", "feasible", "revenue", "phi_1", "phi_2", "phi_3", "phi_4", "p_1", "p_2", "p_3", "p_4"});
        json replays = json::object();
        double sms_rev = 0.0;
        double hyb_rev = 0.0;
        auto add = [&](const char* name, const optimizer::Evaluation& e, double& revenue) {
            if (const auto* r = std::get_if<optimizer::OptResult>(&e)) {
                std::vector<std::string> cells{name, "1", num(r->revenue)};
                for (double d : r->menu.delays) {
                    cells.push_back(num(d));
                }
                for (double p : r->menu.prices) {
                    cells.push_back(num(p));
                }
                replay.row(std::move(cells));
                replays[name] = result_json(local.wtp, *r);
                revenue = r->revenue;
            } else {
                replay.row({name, "0"});
                replays[name] = {{"feasible", false}, {"reason", std::get<optimizer::Infeasible>(e).reason}};
            }
        };
        add("sms", sms_eval, sms_rev);
        add("hybrid", hyb_eval, hyb_rev);
        replay.write(sc, "hybrid_vs_sms_replay.csv", out);
        replays["revenue_ratio"] = sms_rev > 0.0 ? hyb_rev / sms_rev : 0.0;

        Csv ratio({"L", "sms_gamma", "sms_lambda", "sms_exact", "hybrid_gamma", "hybrid_lambda", "hybrid_exact",
                   "gamma_hat"});
        json per_l = json::array();
        for (std::size_t L = 2; L <= max_slas; ++L) {
            const auto s = best_of(run_sweep(local, optimizer::ArchKind::Sms, L, search));
            const auto h = best_of(run_sweep(local, optimizer::ArchKind::Hybrid, L, search));
            if (!s || !h) {
                ratio.row({std::to_string(L)});
                continue;
            }
            const double g = h->revenue / s->revenue;
            ratio.row({std::to_string(L), num(s->gamma), num(s->load), s->exact ? "1" : "0", num(h->gamma),
                       num(h->load), h->exact ? "1" : "0", num(g)});
            per_l.push_back({{"L", L}, {"gamma_hat", g}, {"exact", s->exact && h->exact}});
        }
        ratio.write(sc, "hybrid_vs_sms_ratio.csv", out);
        out.summary["hybrid_vs_sms"] = {{"replay", replays}, {"gamma_hat", per_l}};
    }
    return out;
}

void write_summary(const scenario::Scenario& sc, std::string_view command, double wall_seconds, Outcome& outcome)
{
    json doc = outcome.summary;
    doc["command"] = std::string(command);
    doc["provenance"] = {{"scenario", sc.name},
                         {"scenario_sha256", sha256_hex(sc.source)},
                         {"source_version", source_version()},
                         {"wall_time_seconds", wall_seconds}};
    doc["files"] = outcome.files;
    fs::create_directories(sc.output_dir);
    std::ofstream out(fs::path(sc.output_dir) / "summary.json");
    out << doc.dump(2) << '\n';
    outcome.summary = std::move(doc);
}

} // namespace qosdiff::cli
