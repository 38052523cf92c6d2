#include "regtail/graph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

using namespace regtail;

namespace {

std::vector<Graph> corpus()
{
    std::vector<Graph> out;
    for (auto f : {"k0", "butterfly", "complete:4", "complete:5", "complete-bipartite:2,3", "complete-bipartite:2,4",
                   "complete-bipartite:3,3", "cycle:3", "cycle:5", "path:4", "star:3",
                   "disjoint-union:cycle:3+cycle:4"})
        out.push_back(make_named(f));
    out.push_back(make_graph({{0, 1}, {1, 2}, {2, 0}, {2, 3}}));
    return out;
}

}

TEST(Parse, Triangle)
{
    auto r = parse_graph("0 1\n1 2\n2 0");
    EXPECT_EQ(r.graph.v(), 3);
    EXPECT_EQ(r.graph.e(), 3);
    EXPECT_TRUE(r.warnings.empty());
}

TEST(Parse, DuplicateCollapsed)
{
    auto r = parse_graph("0 1\n0 1");
    EXPECT_EQ(r.graph.e(), 1);
    EXPECT_EQ(parse_graph("0 1\n1 0").graph.e(), 1);
}

TEST(Parse, SelfLoopRejected)
{
    EXPECT_THROW(parse_graph("0 0"), ParseError);
}

TEST(Parse, MalformedLineReportsLineNumber)
{
    try {
        parse_graph("# header\n0 1\n\n1 x\n");
        FAIL() << "expected a parse error";
    }
    catch (const ParseError & e) {
        EXPECT_EQ(e.line_no, 4);
    }
    EXPECT_THROW(parse_graph("0 1 2"), ParseError);
}

TEST(Parse, CommentsAndIsolatedVertices)
{
    auto r = parse_graph("# a comment\n0 1 # trailing\n7\n\n1 2\n");
    EXPECT_EQ(r.graph.e(), 2);
    EXPECT_EQ(r.graph.v(), 3);
    ASSERT_EQ(r.warnings.size(), 1u);
    EXPECT_NE(r.warnings[0].find("7"), std::string::npos);
}

TEST(Parse, RoundTrip)
{
    for (auto & g : corpus()) {
        auto back = parse_graph(to_edge_list(g)).graph;
        EXPECT_EQ(back.vertices, g.vertices);
        EXPECT_EQ(back.edges, g.edges);
    }
}

TEST(Named, K0)
{
    Graph g = make_named("k0");
    EXPECT_EQ(g.v(), 6);
    EXPECT_EQ(g.e(), 9);
    auto d = g.degrees();
    std::sort(d.rbegin(), d.rend());
    EXPECT_EQ(d, (std::vector<int>{4, 4, 3, 3, 2, 2}));
    EXPECT_EQ(g.label(0), "v1");
    EXPECT_EQ(g.edge_label(make_edge(2, 3)), "w1-w2");
}

TEST(Named, Butterfly)
{
    Graph g = make_named("butterfly");
    EXPECT_EQ(g.v(), 5);
    EXPECT_EQ(g.e(), 6);
    auto d = g.degrees();
    EXPECT_EQ(std::count(d.begin(), d.end(), 4), 1);
}

TEST(Named, CompleteBipartite)
{
    Graph g = make_named("complete-bipartite:2,3");
    EXPECT_EQ(g.v(), 5);
    EXPECT_EQ(g.e(), 6);
}

TEST(Named, InvalidParameters)
{
    EXPECT_THROW(make_named("cycle:2"), ConfigError);
    EXPECT_THROW(make_named("complete"), ConfigError);
    EXPECT_THROW(make_named("petersen"), ConfigError);
    EXPECT_THROW(make_named("cycle:x"), ConfigError);
}

TEST(TwoCore, Examples)
{
    EXPECT_TRUE(two_core(make_named("path:4")).empty());
    Graph tri_pendant = make_graph({{0, 1}, {1, 2}, {2, 0}, {2, 3}});
    EXPECT_EQ(two_core(tri_pendant), make_named("cycle:3"));
    EXPECT_EQ(two_core(make_named("k0")), make_named("k0"));
}

TEST(TwoCore, IdempotentAndShrinking)
{
    for (auto & g : corpus()) {
        Graph c = two_core(g);
        EXPECT_EQ(two_core(c), c);
        EXPECT_LE(c.e(), g.e());
        if (!c.empty()) {
            EXPECT_GE(c.min_degree(), 2);
        }
    }
}

TEST(Predicates, ForestAndCycleUnion)
{
    Graph tri_pendant = make_graph({{0, 1}, {1, 2}, {2, 0}, {2, 3}});
    auto lens = cycle_union_lengths(tri_pendant);
    ASSERT_TRUE(lens.has_value());
    EXPECT_EQ(*lens, std::vector<int>{3});
    EXPECT_FALSE(is_cycle_union_core(make_named("k0")));
    Graph tree = make_named("star:3");
    EXPECT_TRUE(is_forest(tree));
    EXPECT_FALSE(is_cycle_union_core(tree));
    EXPECT_FALSE(is_forest(make_named("cycle:3")));
    auto two = cycle_union_lengths(make_named("disjoint-union:cycle:3+cycle:4"));
    ASSERT_TRUE(two.has_value());
    EXPECT_EQ(*two, (std::vector<int>{3, 4}));
}

TEST(EdgeSubgraphs, Counts)
{
    EXPECT_EQ(enumerate_edge_subgraphs(make_named("path:2")).size(), 2u);
    EXPECT_EQ(enumerate_edge_subgraphs(make_named("cycle:3")).size(), 8u);
    EXPECT_EQ(enumerate_edge_subgraphs(make_named("complete-bipartite:2,3")).size(), 64u);
}

TEST(EdgeSubgraphs, SubsetsOfParent)
{
    for (auto & g : corpus()) {
        std::set<std::vector<Edge>> seen;
        std::size_t count = 0;
        for_each_edge_subgraph(g, [&](std::uint64_t, const Graph & h) {
            ++count;
            seen.insert(h.edges);
            for (auto & e : h.edges)
                EXPECT_TRUE(std::binary_search(g.edges.begin(), g.edges.end(), e));
            for (int v : h.vertices)
                EXPECT_GE(g.index_of(v), 0);
            if (!h.empty()) {
                EXPECT_GE(h.min_degree(), 1);
            }
        });
        EXPECT_EQ(count, std::size_t{1} << g.e());
        EXPECT_EQ(seen.size(), count);
    }
}

TEST(EdgeSubgraphs, CapRefusal)
{
    EXPECT_THROW(enumerate_edge_subgraphs(make_named("complete:7")), CapExceeded);
    EXPECT_NO_THROW(enumerate_edge_subgraphs(make_named("complete:4"), 6));
    EXPECT_THROW(enumerate_edge_subgraphs(make_named("complete:4"), 5), CapExceeded);
}

TEST(DeltaStar, Examples)
{
    EXPECT_EQ(delta_star(make_named("complete-bipartite:2,3")), Rational(5, 2));
    EXPECT_EQ(delta_star(make_named("k0")), Rational(7, 2));
    EXPECT_EQ(delta_star(make_named("cycle:5")), Rational(2));
    EXPECT_THROW(delta_star(Graph{}), ConfigError);
}

TEST(DeltaStar, BoundedByEdgeCount)
{
    for (auto & g : corpus()) {
        if (components(g).size() != 1 || g.e() < 2)
            continue;
        EXPECT_LE(delta_star(g) * 2, Rational(g.e() + 1)) << shape_name(g);
    }
}

TEST(Isomorphism, Basic)
{
    Graph a = make_named("cycle:4");
    Graph b = make_graph({{10, 12}, {12, 11}, {11, 13}, {13, 10}});
    EXPECT_TRUE(is_isomorphic(a, b));
    EXPECT_FALSE(is_isomorphic(a, make_named("star:3")));
    EXPECT_EQ(shape_name(make_named("complete-bipartite:2,4")), "K24");
    EXPECT_EQ(shape_name(make_named("k0")), "K0");
    EXPECT_EQ(shape_name(Graph{}), "empty");
}
