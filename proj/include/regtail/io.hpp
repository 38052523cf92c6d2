#pragma once

#include "regtail/common.hpp"
#include "regtail/graph.hpp"
#include "regtail/graphon.hpp"
#include "regtail/holder.hpp"
#include "regtail/lp.hpp"
#include "regtail/sim.hpp"
#include "regtail/tail.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace regtail {

using json = nlohmann::ordered_json;

inline const char * version_string() { return "0.1.0"; }

// non-finite doubles become strings so the output stays valid JSON
inline json num(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    return x;
}

inline json to_json(const Rational & r) { return to_string(r); }

inline json graph_json(const Graph & g)
{
    json j;
    j["shape"] = shape_name(g);
    j["v"] = g.v();
    j["e"] = g.e();
    json vs = json::array();
    for (int v : g.vertices)
        vs.push_back(g.label(v));
    j["vertices"] = vs;
    json es = json::array();
    for (auto & e : g.edges)
        es.push_back(g.edge_label(e));
    j["edges"] = es;
    return j;
}

inline std::vector<std::string> vertex_labels(const Graph & g, const std::vector<int> & ids)
{
    std::vector<std::string> out;
    for (int v : ids)
        out.push_back(g.label(v));
    return out;
}

inline json invariants_json(const Graph & K, double delta, const Caps & caps = {})
{
    json j;
    j["graph"] = graph_json(K);
    j["c"] = to_json(frac_vertex_cover_number(K, caps).value);
    try {
        j["delta_star"] = to_json(delta_star(K));
    }
    catch (const ConfigError &) {
        j["delta_star"] = nullptr;
    }
    auto inv = analyze(K, caps);
    j["gamma"] = to_json(inv.gamma.value);
    j["forest"] = inv.gamma.forest;
    if (inv.gamma.forest) {
        j["classification"] = "forest: upper tail trivial";
        return j;
    }
    j["gamma_witness"] = shape_name(inv.gamma.witness);
    json names = json::array(), bad = json::object(), valid = json::object(), detail = json::array();
    for (auto & cs : inv.contributing) {
        std::string nm = shape_name(cs.graph);
        names.push_back(nm);
        json d;
        d["name"] = nm;
        d["c"] = to_json(cs.c);
        d["edges"] = graph_json(cs.graph)["edges"];
        if (!cs.graph.empty()) {
            json be = json::array();
            for (auto & e : bad_edges(cs.graph, caps))
                be.push_back(cs.graph.edge_label(e));
            bad[nm] = be;
            json vs = json::array();
            for (auto & a : valid_subsets(cs.graph, caps))
                vs.push_back(vertex_labels(cs.graph, a));
            valid[nm] = vs;
            d["bad_edges"] = be;
            d["valid_subsets"] = vs;
        }
        detail.push_back(d);
    }
    j["contributing"] = names;
    j["bad_edges"] = bad;
    j["valid_subsets"] = valid;
    j["contributing_detail"] = detail;
    auto poly = p_polynomial(inv, caps);
    j["P"] = poly.str();
    j["delta"] = delta;
    j["rho"] = num(rho(poly, delta).value);
    return j;
}

inline json rate_json(const RateReport & r)
{
    json j;
    j["classification"] = r.classification;
    j["gamma"] = to_json(r.gamma);
    j["forest"] = r.forest;
    j["constant_name"] = r.constant_name;
    j["constant"] = num(r.constant);
    j["exponent"] = r.exponent;
    j["rate"] = num(r.rate);
    j["order_only"] = r.order_only;
    j["lower_rate"] = num(r.lower_rate);
    j["lower_constant_note"] = r.lower_constant_note;
    j["window_lower"] = num(r.window_lower);
    j["in_window"] = r.in_window;
    j["validity"] = r.validity;
    j["polynomial"] = r.polynomial;
    j["notes"] = r.notes;
    return j;
}

inline json graphon_json(const BlockGraphon & W)
{
    json j;
    j["sizes"] = W.sizes;
    j["values"] = W.values;
    if (!W.names.empty())
        j["names"] = W.names;
    return j;
}

inline BlockGraphon graphon_from_json(const json & j)
{
    try {
        BlockGraphon W;
        W.sizes = j.at("sizes").get<std::vector<double>>();
        W.values = j.at("values").get<std::vector<std::vector<double>>>();
        if (j.contains("names"))
            W.names = j.at("names").get<std::vector<std::string>>();
        validate_graphon(W);
        return W;
    }
    catch (const json::exception & e) {
        throw ConfigError(std::string("graphon JSON: ") + e.what());
    }
}

inline json conditions_json(const ConditionReport & r)
{
    json j;
    json cs = json::object();
    for (auto & c : r.conditions) {
        json x;
        x["name"] = c.name;
        x["status"] = c.status;
        json rt = json::object(), th = json::object();
        for (auto & [k, v] : c.ratios)
            rt[k] = num(v);
        for (auto & [k, v] : c.thresholds)
            th[k] = num(v);
        x["ratios"] = rt;
        x["thresholds"] = th;
        if (!c.detail.empty())
            x["detail"] = c.detail;
        cs[std::to_string(c.number)] = x;
    }
    j["conditions"] = cs;
    json bl = json::array();
    for (auto & b : r.blocks)
        bl.push_back({{"i", b.i}, {"j", b.j}, {"class", b.cls}, {"ratio", num(b.ratio)}});
    j["blocks"] = bl;
    return j;
}

inline Thresholds thresholds_from_json(const json & j)
{
    Thresholds t;
    auto take = [&](const char * key, double & field) {
        if (j.contains(key))
            field = j.at(key).get<double>();
    };
    for (auto & [k, v] : j.items()) {
        static const char * known[] = {"regularity_tol", "negligible_fraction", "importance_cutoff", "small_ratio",
                                       "min_excess",     "bounded_constant",    "size_slack",        "equal_tol"};
        if (std::find_if(std::begin(known), std::end(known), [&](const char * s) { return k == s; }) ==
            std::end(known))
            throw ConfigError("thresholds: unknown key '" + k + "'");
        (void)v;
    }
    take("regularity_tol", t.regularity_tol);
    take("negligible_fraction", t.negligible_fraction);
    take("importance_cutoff", t.importance_cutoff);
    take("small_ratio", t.small_ratio);
    take("min_excess", t.min_excess);
    take("bounded_constant", t.bounded_constant);
    take("size_slack", t.size_slack);
    take("equal_tol", t.equal_tol);
    return t;
}

inline json thresholds_json(const Thresholds & t)
{
    return {{"regularity_tol", t.regularity_tol},   {"negligible_fraction", t.negligible_fraction},
            {"importance_cutoff", t.importance_cutoff}, {"small_ratio", t.small_ratio},
            {"min_excess", t.min_excess},           {"bounded_constant", t.bounded_constant},
            {"size_slack", t.size_slack},           {"equal_tol", t.equal_tol}};
}

// "key=value,key=value"
inline Caps parse_caps(const std::string & s)
{
    Caps c;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty())
            continue;
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw ConfigError("caps: expected key=value, got '" + item + "'");
        std::string k = item.substr(0, eq), v = item.substr(eq + 1);
        long long x;
        try {
            std::size_t used = 0;
            x = std::stoll(v, &used);
            if (used != v.size())
                throw std::invalid_argument(v);
        }
        catch (const std::logic_error &) {
            throw ConfigError("caps: bad value for " + k + ": '" + v + "'");
        }
        if (x < 1)
            throw ConfigError("caps: " + k + " must be positive");
        if (k == "subgraph_edges")
            c.subgraph_edges = static_cast<int>(x);
        else if (k == "cover_vertices")
            c.cover_vertices = static_cast<int>(x);
        else if (k == "matching_edges")
            c.matching_edges = static_cast<int>(x);
        else if (k == "block_terms")
            c.block_terms = x;
        else if (k == "hom_pattern_vertices")
            c.hom_pattern_vertices = static_cast<int>(x);
        else if (k == "hom_host_vertices")
            c.hom_host_vertices = static_cast<int>(x);
        else
            throw ConfigError("caps: unknown key '" + k + "'");
    }
    return c;
}

inline json caps_json(const Caps & c)
{
    return {{"subgraph_edges", c.subgraph_edges},     {"cover_vertices", c.cover_vertices},
            {"matching_edges", c.matching_edges},     {"block_terms", c.block_terms},
            {"hom_pattern_vertices", c.hom_pattern_vertices}, {"hom_host_vertices", c.hom_host_vertices}};
}

inline json expansion_json(const ExpansionTable & t)
{
    json j;
    json rows = json::array();
    for (auto & x : t.terms)
        rows.push_back({{"mask", x.mask},
                        {"edges", graph_json(x.h)["edges"]},
                        {"hom_u", num(x.hom_u)},
                        {"term", num(x.term)}});
    j["terms"] = rows;
    j["sum"] = num(t.sum);
    j["hom_k"] = num(t.hom_k);
    j["residual"] = num(t.residual);
    j["ok"] = t.ok;
    return j;
}

inline json weight_pair_json(const WeightPair & p)
{
    json w = json::array(), wp = json::array();
    for (auto & x : p.w)
        w.push_back(to_string(x));
    for (auto & x : p.wp)
        wp.push_back(to_string(x));
    return {{"w", w}, {"w_prime", wp}};
}

inline WeightPair weight_pair_from_json(const json & j)
{
    WeightPair p;
    for (auto & x : j.at("w"))
        p.w.push_back(parse_rational(x.get<std::string>()));
    for (auto & x : j.at("w_prime"))
        p.wp.push_back(parse_rational(x.get<std::string>()));
    return p;
}

inline json holder_instance_json(const HolderInstance & in)
{
    json j;
    j["edge_list"] = to_edge_list(in.h);
    j["r"] = in.r;
    json boxes = json::array();
    for (auto & b : in.boxes)
        boxes.push_back({b.lo, b.hi});
    j["boxes"] = boxes;
    json ks = json::array();
    for (auto & k : in.kernels)
        ks.push_back(k.vals);
    j["kernels"] = ks;
    return j;
}

inline HolderInstance holder_instance_from_json(const json & j)
{
    try {
        HolderInstance in;
        in.h = parse_graph(j.at("edge_list").get<std::string>()).graph;
        in.r = j.at("r").get<int>();
        for (auto & b : j.at("boxes"))
            in.boxes.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
        for (auto & k : j.at("kernels"))
            in.kernels.push_back(StepKernel{in.r, k.get<std::vector<double>>()});
        check_instance(in);
        return in;
    }
    catch (const json::exception & e) {
        throw ConfigError(std::string("holder instance JSON: ") + e.what());
    }
}

inline json tail_json(const TailEstimate & t)
{
    return {{"trials", t.trials},
            {"hits", t.hits},
            {"estimate", num(t.estimate)},
            {"wilson95", {num(t.wilson.lo), num(t.wilson.hi)}},
            {"seed", t.seed},
            {"threshold", num(t.threshold)},
            {"mean_hom", num(t.mean_hom)},
            {"min_hom", num(t.min_hom)},
            {"max_hom", num(t.max_hom)}};
}

inline json planted_json(const PlantedReport & r)
{
    return {{"trials", r.trials},
            {"seed", r.seed},
            {"n", r.n},
            {"p", r.p},
            {"class_sizes", r.class_sizes},
            {"predicted_ratio", num(r.predicted_ratio)},
            {"mean_hom", num(r.hom.mean)},
            {"mean_hom_stderr", num(r.hom.stderr_)},
            {"mean_injective", num(r.injective.mean)},
            {"mean_injective_stderr", num(r.injective.stderr_)},
            {"baseline_hom", num(r.baseline_hom)},
            {"baseline_injective", num(r.baseline_injective)},
            {"hom_ratio", num(r.hom_ratio)},
            {"injective_ratio", num(r.injective_ratio)},
            {"injective_ratio_stderr", num(r.injective_ratio_stderr)},
            {"relative_error", num(r.relative_error)}};
}

// flat CSV for a list of homogeneous objects
inline std::string to_csv(const json & rows)
{
    if (!rows.is_array() || rows.empty())
        return "";
    std::ostringstream out;
    std::vector<std::string> cols;
    for (auto & [k, v] : rows[0].items())
        cols.push_back(k);
    for (std::size_t i = 0; i < cols.size(); ++i)
        out << (i ? "," : "") << cols[i];
    out << "\n";
    for (auto & row : rows) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            const json & v = row.contains(cols[i]) ? row.at(cols[i]) : json();
            std::string s = v.is_string() ? v.get<std::string>() : v.dump();
            if (s.find_first_of(",\"\n") != std::string::npos) {
                std::string q = "\"";
                for (char ch : s)
                    q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                s = q + "\"";
            }
            out << (i ? "," : "") << s;
        }
        out << "\n";
    }
    return out.str();
}

}
