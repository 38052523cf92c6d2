#include "regtail/io.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace regtail;

TEST(Json, RationalsAsStrings)
{
    EXPECT_EQ(to_json(Rational(5, 2)), json("5/2"));
    EXPECT_EQ(to_json(Rational(3)), json("3"));
    EXPECT_EQ(parse_rational("5/2"), Rational(5, 2));
    EXPECT_EQ(parse_rational(to_json(Rational(-7, 3)).get<std::string>()), Rational(-7, 3));
    EXPECT_THROW(parse_rational("1/0"), ConfigError);
    EXPECT_THROW(parse_rational("x"), ConfigError);
}

TEST(Json, NonFinite)
{
    EXPECT_EQ(num(INFINITY), json("inf"));
    EXPECT_EQ(num(NAN), json("nan"));
    EXPECT_EQ(num(1.5), json(1.5));
}

TEST(Invariants, K0)
{
    auto j = invariants_json(make_named("k0"), 1);
    EXPECT_EQ(j["gamma"], "1");
    EXPECT_EQ(j["c"], "3");
    EXPECT_EQ(j["contributing"], json({"empty", "K24", "K0"}));
    EXPECT_EQ(j["bad_edges"]["K0"], json({"w1-w2"}));
    EXPECT_EQ(j["bad_edges"]["K24"], json::array());
    EXPECT_EQ(j["delta_star"], "7/2");
    EXPECT_NE(j.dump(2).find("\"gamma\": \"1\""), std::string::npos);
}

TEST(Invariants, K23)
{
    auto j = invariants_json(make_named("complete-bipartite:2,3"), 1);
    EXPECT_EQ(j["P"], "1 + z^2");
    EXPECT_NEAR(j["rho"].get<double>(), 1.0, 1e-8);
    EXPECT_EQ(j["gamma"], "1/2");
    EXPECT_EQ(j["valid_subsets"]["K23"], json::array({json::array({"v1", "v2"})}));
}

TEST(Invariants, Forest)
{
    auto j = invariants_json(parse_graph("0 1\n1 2\n1 3\n").graph, 1);
    EXPECT_EQ(j["classification"], "forest: upper tail trivial");
    EXPECT_TRUE(j["forest"].get<bool>());
}

TEST(Graphon, RoundTrip)
{
    auto W = build_w0(Rational(1, 2), 1, 1, 1e-2);
    auto back = graphon_from_json(json::parse(graphon_json(W).dump()));
    EXPECT_EQ(back.sizes, W.sizes);
    EXPECT_EQ(back.values, W.values);
    EXPECT_EQ(back.names, W.names);
    EXPECT_THROW(graphon_from_json(json::parse(R"({"sizes":[0.5,0.5],"values":[[0.1,0.2],[0.3,0.1]]})")),
                 ConfigError);
    EXPECT_THROW(graphon_from_json(json::parse(R"({"sizes":[1]})")), ConfigError);
}

TEST(Conditions, KeyedByNumber)
{
    auto rep = check_conditions(build_w0(Rational(1, 2), 1, 0, 1e-3), make_named("complete-bipartite:2,3"), 1e9, 1e-3);
    auto j = conditions_json(rep);
    for (int i = 1; i <= 10; ++i) {
        ASSERT_TRUE(j["conditions"].contains(std::to_string(i)));
        EXPECT_TRUE(j["conditions"][std::to_string(i)].contains("status"));
    }
    EXPECT_EQ(j["conditions"]["1"]["status"], "pass");
}

TEST(Thresholds, ParseAndReject)
{
    auto t = thresholds_from_json(json::parse(R"({"importance_cutoff": 0.25, "min_excess": 0.1})"));
    EXPECT_EQ(t.importance_cutoff, 0.25);
    EXPECT_EQ(t.min_excess, 0.1);
    EXPECT_EQ(t.regularity_tol, Thresholds{}.regularity_tol);
    EXPECT_THROW(thresholds_from_json(json::parse(R"({"bogus": 1})")), ConfigError);
    auto rt = thresholds_from_json(thresholds_json(t));
    EXPECT_EQ(rt.importance_cutoff, 0.25);
}

TEST(Caps, Parse)
{
    auto c = parse_caps("subgraph_edges=20,hom_host_vertices=3000");
    EXPECT_EQ(c.subgraph_edges, 20);
    EXPECT_EQ(c.hom_host_vertices, 3000);
    EXPECT_EQ(c.cover_vertices, Caps{}.cover_vertices);
    EXPECT_THROW(parse_caps("nope=3"), ConfigError);
    EXPECT_THROW(parse_caps("subgraph_edges"), ConfigError);
    EXPECT_THROW(parse_caps("subgraph_edges=abc"), ConfigError);
    EXPECT_THROW(parse_caps("subgraph_edges=0"), ConfigError);
}

TEST(Holder, InstanceRoundTrip)
{
    std::mt19937_64 rng(5);
    auto in = random_instance(make_named("butterfly"), 4, rng, KernelStyle::uniform_signed);
    auto back = holder_instance_from_json(json::parse(holder_instance_json(in).dump()));
    EXPECT_EQ(back.h.edges, in.h.edges);
    EXPECT_EQ(back.r, in.r);
    for (std::size_t e = 0; e < in.kernels.size(); ++e)
        EXPECT_EQ(back.kernels[e].vals, in.kernels[e].vals);
    EXPECT_EQ(lhs_integral(back), lhs_integral(in));
    auto pairs = generate_weight_pairs(in.h);
    auto p = weight_pair_from_json(weight_pair_json(pairs[0]));
    EXPECT_EQ(p.w, pairs[0].w);
    EXPECT_EQ(p.wp, pairs[0].wp);
}

TEST(Graphs, EdgeListRoundTripIsomorphic)
{
    for (auto f : {"k0", "butterfly", "complete-bipartite:2,4", "disjoint-union:cycle:3+path:3"}) {
        Graph g = make_named(f);
        Graph back = parse_graph(to_edge_list(g)).graph;
        EXPECT_TRUE(is_isomorphic(g, back)) << f;
        EXPECT_EQ(back.edges, g.edges);
    }
    auto sim = sample_regular(12, 3, 4, 0);
    Graph g = to_graph(sim);
    EXPECT_EQ(from_graph(parse_graph(to_edge_list(g)).graph).bits, sim.bits);
}

TEST(Sim, TailJsonShape)
{
    auto t = tail_estimate(make_named("path:2"), 10, 3, 0, 5, 1);
    auto j = tail_json(t);
    EXPECT_EQ(j["trials"], 5);
    EXPECT_EQ(j["hits"], 5);
    EXPECT_EQ(j["wilson95"].size(), 2u);
    EXPECT_EQ(j["seed"], 1);
}

TEST(Csv, Basic)
{
    json rows = json::array({{{"p", 0.01}, {"name", "a,b"}}, {{"p", 0.001}, {"name", "c"}}});
    EXPECT_EQ(to_csv(rows), "p,name\n0.01,\"a,b\"\n0.001,c\n");
    EXPECT_EQ(to_csv(json::array()), "");
}
