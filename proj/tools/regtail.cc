#include "regtail/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

using namespace regtail;

namespace {

struct Options {
    std::string family;
    std::string file;
    double delta = 1;
    double n = 0;
    std::optional<double> p;
    std::string p_grid;
    std::uint64_t seed = 1;
    long long trials = 0;
    std::string caps;
    std::string thresholds_file;
    std::string out;
    std::string format = "json";
    bool w0 = false;
    bool w1 = false;
    std::string gamma = "1/2";
    double z = 1;
    double w = 0;
    double d1 = 1;
    double d2 = 1;
    std::string graphon_file;
    long long instances = 1000;
    int r = 3;
    int d = 0;
    std::string write_graph;
};

std::string read_file(const std::string & path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Graph load_graph(const Options & o, const std::string & fallback = "")
{
    if (!o.family.empty() && !o.file.empty())
        throw ConfigError("give exactly one of --family and --file");
    if (!o.file.empty())
        return parse_graph(read_file(o.file)).graph;
    if (!o.family.empty())
        return make_named(o.family);
    if (!fallback.empty())
        return make_named(fallback);
    throw ConfigError("a graph is required: --family or --file");
}

Caps load_caps(const Options & o) { return o.caps.empty() ? Caps{} : parse_caps(o.caps); }

std::vector<double> p_values(const Options & o)
{
    if (o.p && !o.p_grid.empty())
        throw ConfigError("give at most one of --p and --p-grid");
    if (o.p)
        return {*o.p};
    std::vector<double> ps;
    std::stringstream ss(o.p_grid);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double x = 0;
        try {
            x = std::stod(tok, &used);
        } catch (const std::exception &) {
            throw ConfigError("--p-grid: bad entry '" + tok + "'");
        }
        if (used != tok.size() || !std::isfinite(x))
            throw ConfigError("--p-grid: bad entry '" + tok + "'");
        ps.push_back(x);
    }
    if (ps.empty())
        throw ConfigError("--p or --p-grid is required");
    return ps;
}

int as_int(double x, const char * flag)
{
    if (!(x >= 0 && x <= 2e9 && x == std::floor(x)))
        throw ConfigError(std::string(flag) + " must be a nonnegative integer");
    return static_cast<int>(x);
}

BlockGraphon load_graphon(const Options & o, double p)
{
    int sources = int(o.w0) + int(o.w1) + int(!o.graphon_file.empty());
    if (sources != 1)
        throw ConfigError("give exactly one of --w0, --w1 and --graphon-file");
    if (o.w0)
        return build_w0(parse_rational(o.gamma), o.z, o.w, p);
    if (o.w1)
        return build_w1(o.d1, o.d2, p);
    return graphon_from_json(json::parse(read_file(o.graphon_file)));
}

std::string default_family(const Options & o) { return o.w1 ? "k0" : "complete-bipartite:2,3"; }

json echo(const std::string & cmd, const Options & o)
{
    json c;
    c["subcommand"] = cmd;
    if (!o.family.empty())
        c["family"] = o.family;
    if (!o.file.empty())
        c["file"] = o.file;
    c["delta"] = o.delta;
    if (o.n > 0)
        c["n"] = o.n;
    if (o.p)
        c["p"] = *o.p;
    if (!o.p_grid.empty())
        c["p_grid"] = o.p_grid;
    c["seed"] = o.seed;
    if (o.trials > 0)
        c["trials"] = o.trials;
    c["caps"] = caps_json(load_caps(o));
    if (!o.thresholds_file.empty())
        c["thresholds_file"] = o.thresholds_file;
    if (o.w0)
        c["w0"] = {{"gamma", o.gamma}, {"z", o.z}, {"w", o.w}};
    if (o.w1)
        c["w1"] = {{"d1", o.d1}, {"d2", o.d2}};
    if (!o.graphon_file.empty())
        c["graphon_file"] = o.graphon_file;
    if (cmd == "holder")
        c["instances"] = o.instances, c["r"] = o.r;
    if (o.d > 0)
        c["d"] = o.d;
    c["format"] = o.format;
    return c;
}

json cmd_invariants(const Options & o)
{
    return invariants_json(load_graph(o), o.delta, load_caps(o));
}

json cmd_rate(const Options & o)
{
    Graph K = load_graph(o);
    if (!(o.n > 0))
        throw ConfigError("--n is required");
    json rows = json::array();
    for (double p : p_values(o)) {
        json r = rate_json(classify_and_rate(K, o.delta, o.n, p, load_caps(o)));
        json row = {{"p", p}};
        for (auto & [k, v] : r.items())
            row[k] = v;
        rows.push_back(row);
    }
    json j;
    j["graph"] = graph_json(K);
    j["rows"] = rows;
    return j;
}

json cmd_construct(const Options & o)
{
    Graph K = load_graph(o, default_family(o));
    Caps caps = load_caps(o);
    json rows = json::array();
    json graphons = json::array();
    for (double p : p_values(o)) {
        BlockGraphon W = load_graphon(o, p);
        double hom = hom_density(K, W, caps.block_terms);
        double ip = ip_total(W, p);
        double L = std::log(1 / p);
        json row = {{"p", p},
                    {"hom", num(hom)},
                    {"hom_over_p_e", num(hom / std::pow(p, K.e()))},
                    {"ip", num(ip)},
                    {"regularity_residual", num(regularity_residual(W, p))}};
        if (o.w0) {
            double g = to_double(parse_rational(o.gamma));
            double target = (2 * o.z + o.w) * std::pow(p, 2 + g) * L;
            row["ip_over_target"] = num(ip / target);
        }
        if (o.w1) {
            double LL = std::log(L);
            double scale = std::pow(p, 3) * std::pow(L, 2.0 / 3) * std::cbrt(LL);
            row["ip_over_target"] = num(ip / ((2 * o.d1 + 2 * o.d2 / 3) * scale));
        }
        rows.push_back(row);
        json gj = graphon_json(W);
        gj["p"] = p;
        graphons.push_back(gj);
    }
    json j;
    j["graph"] = graph_json(K);
    j["rows"] = rows;
    j["graphons"] = graphons;
    return j;
}

json cmd_check_conditions(const Options & o)
{
    Graph K = load_graph(o, default_family(o));
    auto ps = p_values(o);
    if (ps.size() != 1)
        throw ConfigError("check-conditions takes a single --p");
    if (!(o.n > 0))
        throw ConfigError("--n is required");
    Thresholds t;
    if (!o.thresholds_file.empty())
        t = thresholds_from_json(json::parse(read_file(o.thresholds_file)));
    BlockGraphon W = load_graphon(o, ps[0]);
    json j;
    j["graph"] = graph_json(K);
    j["graphon"] = graphon_json(W);
    j["thresholds"] = thresholds_json(t);
    j["report"] = conditions_json(check_conditions(W, K, o.n, ps[0], t));
    j["expansion"] = expansion_json(subgraph_expansion(K, W, ps[0], load_caps(o)));
    return j;
}

json cmd_holder(const Options & o)
{
    Graph H = load_graph(o);
    Caps caps = load_caps(o);
    if (o.instances < 1)
        throw ConfigError("--instances must be positive");
    auto pairs = generate_weight_pairs(H, caps);
    Rational c = frac_vertex_cover_number(H, caps).value;
    for (auto & wp : pairs)
        validate_weight_pair(H, wp, c);
    const KernelStyle styles[] = {KernelStyle::uniform_signed, KernelStyle::uniform_positive, KernelStyle::spike,
                                  KernelStyle::sparse, KernelStyle::lipschitz};
    long long checks = 0, violations = 0;
    double worst = std::numeric_limits<double>::infinity();
    json examples = json::array();
    for (long long i = 0; i < o.instances; ++i) {
        std::mt19937_64 rng = trial_rng(o.seed, static_cast<std::uint64_t>(i));
        auto in = random_instance(H, o.r, rng, styles[i % 5]);
        for (auto & wp : pairs) {
            auto v = verify_instance(in, wp);
            ++checks;
            double rel = v.margin / std::max(1.0, std::fabs(v.rhs));
            worst = std::min(worst, rel);
            if (!v.pass) {
                ++violations;
                if (examples.size() < 5)
                    examples.push_back({{"instance", i}, {"pair", weight_pair_json(wp)}, {"lhs", num(v.lhs)},
                                        {"rhs", num(v.rhs)}});
            }
        }
    }
    json wps = json::array();
    for (auto & wp : pairs)
        wps.push_back(weight_pair_json(wp));
    json j;
    j["graph"] = graph_json(H);
    j["c"] = to_json(c);
    j["weight_pairs"] = wps;
    j["instances"] = o.instances;
    j["checks"] = checks;
    j["violations"] = violations;
    j["min_relative_margin"] = num(worst);
    j["violation_examples"] = examples;
    return j;
}

json cmd_simulate(const Options & o)
{
    Graph K = load_graph(o);
    int n = as_int(o.n, "--n");
    if (o.trials < 1)
        throw ConfigError("--trials must be positive");
    auto t = tail_estimate(K, n, o.d, o.delta, o.trials, o.seed, load_caps(o));
    json j;
    j["graph"] = graph_json(K);
    j["tail"] = tail_json(t);
    if (!o.write_graph.empty()) {
        SimGraph g = sample_regular(n, o.d, o.seed, 0);
        std::ofstream f(o.write_graph);
        if (!f)
            throw ConfigError("cannot write " + o.write_graph);
        f << to_edge_list(to_graph(g));
        j["sample"] = {{"trial", 0}, {"path", o.write_graph}, {"provenance", g.provenance.sampler}};
    }
    return j;
}

json cmd_plant(const Options & o)
{
    Graph K = load_graph(o, default_family(o));
    auto ps = p_values(o);
    if (ps.size() != 1)
        throw ConfigError("plant takes a single --p");
    int n = as_int(o.n, "--n");
    if (o.trials < 1)
        throw ConfigError("--trials must be positive");
    BlockGraphon W = load_graphon(o, ps[0]);
    auto r = planted_comparison(K, W, n, ps[0], o.trials, o.seed, load_caps(o));
    json j;
    j["graph"] = graph_json(K);
    j["graphon"] = graphon_json(W);
    j["planted"] = planted_json(r);
    return j;
}

void emit(const json & doc, const Options & o)
{
    std::string text;
    if (o.format == "csv") {
        if (!doc.contains("rows"))
            throw ConfigError("--format csv is only available for grid commands (rate, construct)");
        text = to_csv(doc["rows"]);
    } else {
        text = doc.dump(2) + "\n";
    }
    if (o.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(o.out);
    if (!f)
        throw ConfigError("cannot write " + o.out);
    f << text;
}

}

int main(int argc, char ** argv)
{
    CLI::App app{"regtail: upper tails of subgraph counts in random regular graphs"};
    app.set_version_flag("--version", version_string());
    app.require_subcommand(1);
    Options o;

    auto graph_flags = [&](CLI::App * s) {
        s->add_option("--family", o.family, "named family, e.g. k0, butterfly, complete-bipartite:2,3");
        s->add_option("--file", o.file, "edge-list file");
    };
    auto common = [&](CLI::App * s) {
        s->add_option("--caps", o.caps, "resource caps k=v,k=v");
        s->add_option("--out", o.out, "output path (default stdout)");
        s->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        s->add_option("--seed", o.seed, "RNG seed");
    };
    auto graphon_flags = [&](CLI::App * s) {
        s->add_flag("--w0", o.w0, "hub/clique graphon");
        s->add_flag("--w1", o.w1, "K0 optimizer graphon");
        s->add_option("--gamma", o.gamma, "gamma for --w0, as p/q");
        s->add_option("--z", o.z, "hub weight for --w0");
        s->add_option("--w", o.w, "clique weight for --w0");
        s->add_option("--d1", o.d1, "hub parameter for --w1");
        s->add_option("--d2", o.d2, "mid parameter for --w1");
        s->add_option("--graphon-file", o.graphon_file, "block graphon JSON");
    };
    auto p_flags = [&](CLI::App * s) {
        s->add_option("--p", o.p, "edge density");
        s->add_option("--p-grid", o.p_grid, "comma-separated densities");
    };

    auto inv = app.add_subcommand("invariants", "exact invariants of a graph");
    graph_flags(inv);
    common(inv);
    inv->add_option("--delta", o.delta, "delta for rho");

    auto rate = app.add_subcommand("rate", "classification and rate");
    graph_flags(rate);
    common(rate);
    p_flags(rate);
    rate->add_option("--delta", o.delta);
    rate->add_option("--n", o.n, "number of vertices");

    auto cons = app.add_subcommand("construct", "block graphon convergence table");
    graph_flags(cons);
    common(cons);
    p_flags(cons);
    graphon_flags(cons);

    auto cond = app.add_subcommand("check-conditions", "conditions 1-10 for a graphon");
    graph_flags(cond);
    common(cond);
    p_flags(cond);
    graphon_flags(cond);
    cond->add_option("--n", o.n);
    cond->add_option("--thresholds-file", o.thresholds_file, "threshold overrides JSON");

    auto hold = app.add_subcommand("holder", "randomized generalized Holder check");
    graph_flags(hold);
    common(hold);
    hold->add_option("--instances", o.instances, "random instances");
    hold->add_option("--r", o.r, "grid resolution");

    auto sim = app.add_subcommand("simulate", "Monte Carlo upper tail in G(n,d)");
    graph_flags(sim);
    common(sim);
    sim->add_option("--n", o.n);
    sim->add_option("--d", o.d, "degree")->required();
    sim->add_option("--delta", o.delta);
    sim->add_option("--trials", o.trials)->required();
    sim->add_option("--write-graph", o.write_graph, "write the first sample as an edge list");

    auto plant = app.add_subcommand("plant", "planted-structure comparison");
    graph_flags(plant);
    common(plant);
    p_flags(plant);
    graphon_flags(plant);
    plant->add_option("--n", o.n);
    plant->add_option("--trials", o.trials)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success & e) {
        return app.exit(e);
    } catch (const CLI::ParseError & e) {
        app.exit(e);
        return 2;
    }

    try {
        CLI::App * s = app.get_subcommands().front();
        std::string name = s->get_name();
        json body;
        if (name == "invariants")
            body = cmd_invariants(o);
        else if (name == "rate")
            body = cmd_rate(o);
        else if (name == "construct")
            body = cmd_construct(o);
        else if (name == "check-conditions")
            body = cmd_check_conditions(o);
        else if (name == "holder")
            body = cmd_holder(o);
        else if (name == "simulate")
            body = cmd_simulate(o);
        else
            body = cmd_plant(o);
        json doc;
        doc["version"] = version_string();
        doc["config"] = echo(name, o);
        for (auto & [k, v] : body.items())
            doc[k] = v;
        emit(doc, o);
    } catch (const CapExceeded & e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return 3;
    } catch (const Infeasible & e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 4;
    } catch (const ConfigError & e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception & e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception & e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
