#include "qosdiff/scenario.hpp"

#include "qosdiff/errors.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace qosdiff::scenario {

namespace {

template <class T>
const char* type_name()
{
    if constexpr (std::is_same_v<T, bool>) {
        return "a boolean";
    } else if constexpr (std::is_integral_v<T>) {
        return "a non-negative integer";
    } else if constexpr (std::is_floating_point_v<T>) {
        return "a number";
    } else {
        return "a string";
    }
}

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    std::string at(const YAML::Node& node) const
    {
        const auto mark = node.Mark();
        if (mark.line < 0) {
            return origin_;
        }
        return origin_ + ":" + std::to_string(mark.line + 1);
    }

    void fail(const YAML::Node& node, const std::string& message) { errors_.push_back(at(node) + ": " + message); }

    bool expect_map(const YAML::Node& node, const std::string& path)
    {
        if (!node.IsMap()) {
            fail(node, "'" + path + "' must be a mapping");
            return false;
        }
        return true;
    }

    void allow(const YAML::Node& map, const std::string& path, std::initializer_list<std::string_view> keys)
    {
        for (const auto& kv : map) {
            const auto key = kv.first.as<std::string>();
            if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                fail(kv.first, "unknown key '" + (path.empty() ? key : path + "." + key) + "'");
            }
        }
    }

    template <class T>
    std::optional<T> get(const YAML::Node& map, const char* key, const std::string& path)
    {
        const YAML::Node node = map[key];
        if (!node) {
            return std::nullopt;
        }
        const std::string full = path.empty() ? key : path + "." + key;
        if (!node.IsScalar()) {
            fail(node, "'" + full + "' expects " + type_name<T>());
            return std::nullopt;
        }
        if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
            if (!node.Scalar().empty() && node.Scalar().front() == '-') {
                fail(node, "'" + full + "' expects " + type_name<T>());
                return std::nullopt;
            }
        }
        try {
            return node.as<T>();
        } catch (const YAML::BadConversion&) {
            fail(node, "'" + full + "' expects " + type_name<T>());
            return std::nullopt;
        }
    }

    template <class T>
    void set(const YAML::Node& map, const char* key, const std::string& path, T& target)
    {
        if (auto v = get<T>(map, key, path)) {
            target = *v;
        }
    }

    std::vector<double> numbers(const YAML::Node& node, const std::string& path)
    {
        std::vector<double> out;
        if (!node.IsSequence()) {
            fail(node, "'" + path + "' must be a list of numbers");
            return out;
        }
        for (const auto& item : node) {
            try {
                out.push_back(item.as<double>());
            } catch (const YAML::BadConversion&) {
                fail(item, "'" + path + "' entries must be numbers");
            }
        }
        return out;
    }

    const std::vector<std::string>& errors() const { return errors_; }

private:
    std::string origin_;
    std::vector<std::string> errors_;
};

void read_population(Reader& r, const YAML::Node& node, PopulationSpec& pop)
{
    if (!r.expect_map(node, "population")) {
        return;
    }
    r.allow(node, "population", {"n", "delta", "epsilon", "types"});
    r.set(node, "n", "population", pop.n);
    r.set(node, "delta", "population", pop.delta);
    r.set(node, "epsilon", "population", pop.epsilon);
    if (const auto types = node["types"]) {
        if (!types.IsSequence()) {
            r.fail(types, "'population.types' must be a list of {alpha, prob}");
            return;
        }
        pop.alphas.clear();
        pop.probs.clear();
        for (const auto& t : types) {
            if (!r.expect_map(t, "population.types[]")) {
                continue;
            }
            r.allow(t, "population.types[]", {"alpha", "prob"});
            const auto alpha = r.get<double>(t, "alpha", "population.types[]");
            const auto prob = r.get<double>(t, "prob", "population.types[]");
            if (!alpha || !prob) {
                r.fail(t, "every type needs 'alpha' and 'prob'");
                continue;
            }
            pop.alphas.push_back(*alpha);
            pop.probs.push_back(*prob);
        }
    }
}

void read_service(Reader& r, const YAML::Node& node, queueing::ServiceDist& dist)
{
    if (!r.expect_map(node, "service")) {
        return;
    }
    r.allow(node, "service", {"kind", "mean", "branches"});
    const auto kind = r.get<std::string>(node, "kind", "service").value_or("exponential");
    try {
        if (kind == "exponential") {
            dist = queueing::ServiceDist::exponential(r.get<double>(node, "mean", "service").value_or(1.0));
        } else if (kind == "hyperexponential") {
            const auto branches = node["branches"];
            if (!branches || !branches.IsSequence()) {
                r.fail(node, "'service.branches' must list {weight, mean} or {weight, rate}");
                return;
            }
            std::vector<queueing::Branch> list;
            for (const auto& b : branches) {
                if (!r.expect_map(b, "service.branches[]")) {
                    continue;
                }
                r.allow(b, "service.branches[]", {"weight", "mean", "rate"});
                const auto weight = r.get<double>(b, "weight", "service.branches[]");
                const auto mean = r.get<double>(b, "mean", "service.branches[]");
                const auto rate = r.get<double>(b, "rate", "service.branches[]");
                if (!weight || (mean.has_value() == rate.has_value())) {
                    r.fail(b, "every branch needs 'weight' and exactly one of 'mean' or 'rate'");
                    continue;
                }
                if (rate && !(*rate > 0.0)) {
                    r.fail(b, "branch rate must be positive");
                    continue;
                }
                list.push_back({*weight, mean ? *mean : 1.0 / *rate});
            }
            if (r.errors().empty()) {
                dist = queueing::ServiceDist::hyperexponential(std::move(list));
            }
        } else {
            r.fail(node["kind"], "'service.kind' must be exponential or hyperexponential");
        }
    } catch (const InvalidParameter& e) {
        r.fail(node, e.what());
    }
}

std::vector<double> read_loads(Reader& r, const YAML::Node& node)
{
    if (node.IsSequence()) {
        return r.numbers(node, "loads");
    }
    if (!r.expect_map(node, "loads")) {
        return {};
    }
    r.allow(node, "loads", {"from", "to", "step"});
    const auto from = r.get<double>(node, "from", "loads");
    const auto to = r.get<double>(node, "to", "loads");
    const auto step = r.get<double>(node, "step", "loads");
    if (!from || !to || !step) {
        r.fail(node, "'loads' range needs from, to and step");
        return {};
    }
    if (!(*step > 0.0) || !(*to >= *from)) {
        r.fail(node, "'loads' range needs step > 0 and to >= from");
        return {};
    }
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((*to - *from) / *step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) {
        out.push_back(std::round((*from + static_cast<double>(i) * *step) * 1e12) / 1e12);
    }
    return out;
}

std::optional<optimizer::Layout> read_layout(Reader& r, const YAML::Node& node)
{
    if (!r.expect_map(node, "simulation.layout")) {
        return std::nullopt;
    }
    r.allow(node, "simulation.layout", {"kind", "servers", "partition", "first", "second"});
    const auto kind = r.get<std::string>(node, "kind", "simulation.layout");
    if (!kind) {
        r.fail(node, "'simulation.layout.kind' is required");
        return std::nullopt;
    }
    const std::string path = "simulation.layout";
    if (*kind == "od" || *kind == "pbs") {
        const auto servers = r.get<std::size_t>(node, "servers", path);
        if (!servers) {
            r.fail(node, "'" + path + ".servers' is required");
            return std::nullopt;
        }
        if (*kind == "od") {
            return optimizer::OnDemand{*servers};
        }
        return optimizer::Pbs{*servers};
    }
    if (*kind == "sms") {
        const auto part = node["partition"];
        if (!part) {
            r.fail(node, "'" + path + ".partition' is required");
            return std::nullopt;
        }
        std::vector<std::size_t> counts;
        for (double x : r.numbers(part, path + ".partition")) {
            if (!(x >= 1.0) || x != std::floor(x)) {
                r.fail(part, "partition entries must be positive integers");
                return std::nullopt;
            }
            counts.push_back(static_cast<std::size_t>(x));
        }
        return optimizer::Sms{counts};
    }
    if (*kind == "hybrid") {
        const auto first = r.get<std::size_t>(node, "first", path);
        const auto second = r.get<std::size_t>(node, "second", path);
        if (!first || !second) {
            r.fail(node, "'" + path + "' needs first and second");
            return std::nullopt;
        }
        return optimizer::Hybrid{*first, *second};
    }
    r.fail(node["kind"], "'" + path + ".kind' must be od, sms, pbs or hybrid");
    return std::nullopt;
}

void read_simulation(Reader& r, const YAML::Node& node, SimulationSpec& sim)
{
    if (!r.expect_map(node, "simulation")) {
        return;
    }
    const std::string path = "simulation";
    r.allow(node, path,
            {"seed", "warmup_jobs", "measured_jobs", "replications", "dispatch", "threads", "trace", "layout",
             "rates", "tolerance"});
    r.set(node, "seed", path, sim.config.seed);
    if (auto w = r.get<std::uint64_t>(node, "warmup_jobs", path)) {
        sim.config.warmup_jobs = *w;
    }
    r.set(node, "measured_jobs", path, sim.config.measured_jobs);
    r.set(node, "replications", path, sim.config.replications);
    r.set(node, "threads", path, sim.config.threads);
    r.set(node, "trace", path, sim.trace_path);
    r.set(node, "tolerance", path, sim.tolerance);
    if (auto d = r.get<std::string>(node, "dispatch", path)) {
        if (*d == "random") {
            sim.config.dispatch = simulator::Dispatch::Random;
        } else if (*d == "round-robin") {
            sim.config.dispatch = simulator::Dispatch::RoundRobin;
        } else {
            r.fail(node["dispatch"], "'simulation.dispatch' must be random or round-robin");
        }
    }
    if (const auto layout = node["layout"]) {
        sim.layout = read_layout(r, layout);
    }
    if (const auto rates = node["rates"]) {
        sim.rates = r.numbers(rates, "simulation.rates");
    }
}

void read_search(Reader& r, const YAML::Node& node, optimizer::SearchOptions& search)
{
    if (!r.expect_map(node, "search")) {
        return;
    }
    r.allow(node, "search", {"threads", "candidate_budget", "best_effort", "time_budget"});
    r.set(node, "threads", "search", search.threads);
    r.set(node, "candidate_budget", "search", search.candidate_budget);
    r.set(node, "best_effort", "search", search.best_effort);
    r.set(node, "time_budget", "search", search.time_budget_seconds);
}

} // namespace

model::TypePopulation Scenario::make_population(double load) const
{
    const double total = load * static_cast<double>(servers);
    if (!population.alphas.empty()) {
        return model::TypePopulation::create(population.alphas, population.probs, total, dist.mean());
    }
    auto grid = model::grid_population(population.n, population.delta, population.epsilon, total);
    if (dist.mean() == 1.0) {
        return grid;
    }
    return model::TypePopulation::create({grid.alphas().begin(), grid.alphas().end()},
                                         {grid.probs().begin(), grid.probs().end()}, total, dist.mean());
}

optimizer::Problem Scenario::problem(double load) const
{
    return {wtp, make_population(load), servers, dist};
}

std::vector<double> Scenario::load_grid() const
{
    if (!loads.empty()) {
        return loads;
    }
    if (arch == optimizer::ArchKind::Pbs) {
        return optimizer::pbs_load_grid(wtp, dist);
    }
    auto grid = optimizer::default_load_grid();
    // One SLA only pays off at the on-demand load itself, which is below 0.05.
    if (slas == 1 || arch == optimizer::ArchKind::OnDemand) {
        grid.insert(grid.begin(), queueing::od_max_load(wtp.od_delay, dist));
    }
    return grid;
}

std::vector<std::string> Scenario::problems() const
{
    std::vector<std::string> out;
    try {
        wtp.validate();
    } catch (const InvalidParameter& e) {
        out.emplace_back(e.what());
    }
    const std::size_t types = population.alphas.empty() ? population.n : population.alphas.size();
    if (!population.alphas.empty()) {
        try {
            (void)model::TypePopulation::create(population.alphas, population.probs, 1.0, dist.mean());
        } catch (const InvalidParameter& e) {
            out.emplace_back(e.what());
        }
    } else {
        if (population.n < 2) {
            out.emplace_back("population: n must be at least 2");
        }
        if (!(population.delta > 0.0)) {
            out.emplace_back("population: delta must be positive");
        }
        if (!(population.epsilon > 0.0) || !(population.epsilon < population.delta)) {
            out.emplace_back("population: epsilon must lie in (0, delta)");
        }
    }
    if (slas == 0 || slas > types) {
        out.emplace_back("slas must lie in [1, " + std::to_string(types) + "]");
    }
    if (servers < slas) {
        out.emplace_back("servers must be at least slas");
    }
    if (arch == optimizer::ArchKind::Hybrid && slas < 2) {
        out.emplace_back("the hybrid architecture needs at least two SLAs");
    }
    for (double l : loads) {
        if (!(l > 0.0) || !(l < 1.0)) {
            out.emplace_back("load " + std::to_string(l) + " is outside (0, 1)");
        }
    }
    if (search.threads == 0) {
        out.emplace_back("search.threads must be at least 1");
    }
    if (search.candidate_budget == 0) {
        out.emplace_back("search.candidate_budget must be at least 1");
    }
    if (!(search.time_budget_seconds >= 0.0)) {
        out.emplace_back("search.time_budget must be non-negative");
    }
    try {
        simulation.config.validate();
    } catch (const InvalidParameter& e) {
        out.emplace_back(e.what());
    }
    if (simulation.config.threads == 0) {
        out.emplace_back("simulation.threads must be at least 1");
    }
    if (!(simulation.tolerance > 0.0)) {
        out.emplace_back("simulation.tolerance must be positive");
    }
    if (simulation.layout.has_value() != !simulation.rates.empty()) {
        out.emplace_back("simulation.layout and simulation.rates must be given together");
    }
    for (double r : simulation.rates) {
        if (!(r > 0.0)) {
            out.emplace_back("simulation.rates must be positive");
            break;
        }
    }
    if (simulation.layout) {
        try {
            optimizer::ArchitectureConfig{*simulation.layout, dist}.validate();
        } catch (const InvalidParameter& e) {
            out.emplace_back(e.what());
        }
    }
    return out;
}

void Scenario::validate() const
{
    auto list = problems();
    if (!list.empty()) {
        throw ScenarioError(ScenarioError::Kind::Validation, std::move(list));
    }
}

std::vector<std::string> preset_names()
{
    return {"grid-low", "grid-high"};
}

Scenario from_preset(std::string_view name)
{
    Scenario sc;
    sc.preset = std::string(name);
    sc.name = sc.preset;
    sc.source = "preset: " + sc.preset + "\n";
    if (name == "grid-low") {
        sc.population.delta = 0.02;
    } else if (name == "grid-high") {
        sc.population.delta = 0.04;
    } else if (!name.empty()) {
        throw ScenarioError(ScenarioError::Kind::Validation,
                            {"unknown preset '" + std::string(name) + "' (expected grid-low or grid-high)"});
    }
    return sc;
}

Scenario parse_scenario(std::string_view text, std::string_view origin)
{
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ScenarioError(ScenarioError::Kind::Parse,
                            {std::string(origin) + ":" + std::to_string(e.mark.line + 1) + ":"
                             + std::to_string(e.mark.column + 1) + ": " + e.msg});
    }
    Reader r{std::string(origin)};
    Scenario sc;
    if (root.IsNull()) {
        sc.source = std::string(text);
        sc.name = std::string(origin);
        sc.validate();
        return sc;
    }
    if (!root.IsMap()) {
        throw ScenarioError(ScenarioError::Kind::Parse, {r.at(root) + ": top level must be a mapping"});
    }
    r.allow(root, "",
            {"name", "preset", "wtp", "population", "service", "architecture", "slas", "servers", "loads", "search",
             "simulation", "output"});

    if (auto preset = r.get<std::string>(root, "preset", "")) {
        try {
            sc = from_preset(*preset);
        } catch (const ScenarioError& e) {
            r.fail(root["preset"], e.problems().front());
        }
    }
    sc.name = r.get<std::string>(root, "name", "").value_or(sc.name.empty() ? std::string(origin) : sc.name);
    if (const auto wtp = root["wtp"]) {
        if (r.expect_map(wtp, "wtp")) {
            r.allow(wtp, "wtp", {"price", "od_delay", "beta"});
            r.set(wtp, "price", "wtp", sc.wtp.price);
            r.set(wtp, "od_delay", "wtp", sc.wtp.od_delay);
            r.set(wtp, "beta", "wtp", sc.wtp.beta);
        }
    }
    if (const auto pop = root["population"]) {
        read_population(r, pop, sc.population);
    }
    if (const auto service = root["service"]) {
        read_service(r, service, sc.dist);
    }
    if (auto arch = r.get<std::string>(root, "architecture", "")) {
        if (auto kind = optimizer::parse_arch(*arch)) {
            sc.arch = *kind;
        } else {
            r.fail(root["architecture"], "'architecture' must be sms, pbs, hybrid or od");
        }
    }
    r.set(root, "slas", "", sc.slas);
    r.set(root, "servers", "", sc.servers);
    if (const auto loads = root["loads"]) {
        sc.loads = read_loads(r, loads);
    }
    if (const auto search = root["search"]) {
        read_search(r, search, sc.search);
    }
    if (const auto sim = root["simulation"]) {
        read_simulation(r, sim, sc.simulation);
    }
    if (const auto output = root["output"]) {
        if (r.expect_map(output, "output")) {
            r.allow(output, "output", {"dir"});
            r.set(output, "dir", "output", sc.output_dir);
        }
    }
    if (!r.errors().empty()) {
        throw ScenarioError(ScenarioError::Kind::Parse, r.errors());
    }
    sc.source = std::string(text);
    auto list = sc.problems();
    if (!list.empty()) {
        for (auto& p : list) {
            p = std::string(origin) + ": " + p;
        }
        throw ScenarioError(ScenarioError::Kind::Validation, std::move(list));
    }
    return sc;
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ScenarioError(ScenarioError::Kind::Parse, {path + ": cannot open file"});
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario(text.str(), path);
}

} // namespace qosdiff::scenario
