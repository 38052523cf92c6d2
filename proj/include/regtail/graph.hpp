#pragma once

#include "regtail/common.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace regtail {

using Edge = std::pair<int, int>;

// Small simple undirected graph. Vertex ids are kept from the parent on subgraph
// extraction, so witnesses from different modules can be compared directly.
struct Graph {
    std::vector<int> vertices;
    std::vector<Edge> edges;
    std::map<int, std::string> labels;

    int v() const { return static_cast<int>(vertices.size()); }
    int e() const { return static_cast<int>(edges.size()); }
    bool empty() const { return edges.empty(); }

    std::string label(int id) const
    {
        auto it = labels.find(id);
        return it == labels.end() ? std::to_string(id) : it->second;
    }

    std::string edge_label(const Edge & ed) const { return label(ed.first) + "-" + label(ed.second); }

    int index_of(int id) const
    {
        auto it = std::lower_bound(vertices.begin(), vertices.end(), id);
        if (it == vertices.end() || *it != id)
            return -1;
        return static_cast<int>(it - vertices.begin());
    }

    int degree(int id) const
    {
        int d = 0;
        for (auto & [a, b] : edges)
            d += (a == id) + (b == id);
        return d;
    }

    std::vector<int> degrees() const
    {
        std::vector<int> d(vertices.size(), 0);
        for (auto & [a, b] : edges) {
            ++d[index_of(a)];
            ++d[index_of(b)];
        }
        return d;
    }

    int min_degree() const
    {
        auto d = degrees();
        return d.empty() ? 0 : *std::min_element(d.begin(), d.end());
    }

    int max_degree() const
    {
        auto d = degrees();
        return d.empty() ? 0 : *std::max_element(d.begin(), d.end());
    }

    // adjacency as index lists
    std::vector<std::vector<int>> adjacency() const
    {
        std::vector<std::vector<int>> adj(vertices.size());
        for (auto & [a, b] : edges) {
            int i = index_of(a), j = index_of(b);
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
        return adj;
    }

    // edges as index pairs
    std::vector<std::pair<int, int>> index_edges() const
    {
        std::vector<std::pair<int, int>> r;
        r.reserve(edges.size());
        for (auto & [a, b] : edges)
            r.emplace_back(index_of(a), index_of(b));
        return r;
    }

    bool operator==(const Graph & o) const { return vertices == o.vertices && edges == o.edges; }
};

inline Edge make_edge(int a, int b)
{
    return a < b ? Edge{a, b} : Edge{b, a};
}

// Builds a normalized graph: edges sorted and deduplicated, vertex list = endpoints.
inline Graph make_graph(std::vector<Edge> edges, const std::map<int, std::string> & labels = {})
{
    Graph g;
    for (auto & ed : edges) {
        if (ed.first == ed.second)
            throw ConfigError("self-loop at vertex " + std::to_string(ed.first));
        ed = make_edge(ed.first, ed.second);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.edges = std::move(edges);
    std::set<int> vs;
    for (auto & [a, b] : g.edges) {
        vs.insert(a);
        vs.insert(b);
    }
    g.vertices.assign(vs.begin(), vs.end());
    for (auto & [id, name] : labels)
        if (vs.count(id))
            g.labels[id] = name;
    return g;
}

class ParseError : public ConfigError {
public:
    ParseError(int line, const std::string & what)
        : ConfigError("line " + std::to_string(line) + ": " + what), line_no(line)
    {
    }
    int line_no;
};

struct ParseResult {
    Graph graph;
    std::vector<std::string> warnings;
};

// Edge-list text: "u v" per line, '#' comments, blank lines ignored. A line with a
// single id declares a vertex; declared vertices without edges are dropped.
inline ParseResult parse_graph(const std::string & text)
{
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    std::vector<Edge> edges;
    std::set<int> declared;
    auto parse_int = [&](const std::string & tok) {
        std::size_t pos = 0;
        long long x = 0;
        try {
            x = std::stoll(tok, &pos);
        }
        catch (const std::logic_error &) {
            throw ParseError(line_no, "expected integer, got '" + tok + "'");
        }
        if (pos != tok.size() || x < 0 || x > 1'000'000'000)
            throw ParseError(line_no, "expected nonnegative integer, got '" + tok + "'");
        return static_cast<int>(x);
    };
    while (std::getline(in, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string t;
        while (ls >> t)
            toks.push_back(t);
        if (toks.empty())
            continue;
        if (toks.size() == 1) {
            declared.insert(parse_int(toks[0]));
            continue;
        }
        if (toks.size() != 2)
            throw ParseError(line_no, "expected 'u v'");
        int u = parse_int(toks[0]), w = parse_int(toks[1]);
        if (u == w)
            throw ParseError(line_no, "self-loop at vertex " + std::to_string(u));
        edges.push_back(make_edge(u, w));
    }
    ParseResult r;
    r.graph = make_graph(edges);
    for (int d : declared)
        if (r.graph.index_of(d) < 0)
            r.warnings.push_back("isolated vertex " + std::to_string(d) + " dropped");
    return r;
}

inline std::string to_edge_list(const Graph & g)
{
    std::ostringstream out;
    for (auto & [a, b] : g.edges)
        out << a << " " << b << "\n";
    return out.str();
}

struct NamedFamily {
    std::string tag;
    std::vector<int> params;
    std::vector<NamedFamily> parts;
};

// "k0", "butterfly", "complete:5", "complete-bipartite:2,3", "cycle:4", "path:4",
// "star:3", "disjoint-union:cycle:3+cycle:4"
inline NamedFamily parse_family(const std::string & s)
{
    NamedFamily f;
    auto colon = s.find(':');
    f.tag = s.substr(0, colon);
    if (colon == std::string::npos)
        return f;
    std::string rest = s.substr(colon + 1);
    if (f.tag == "disjoint-union") {
        std::size_t start = 0;
        while (start <= rest.size()) {
            auto plus = rest.find('+', start);
            std::string part = rest.substr(start, plus == std::string::npos ? std::string::npos : plus - start);
            if (part.empty())
                throw ConfigError("empty part in disjoint-union");
            f.parts.push_back(parse_family(part));
            if (plus == std::string::npos)
                break;
            start = plus + 1;
        }
        return f;
    }
    std::stringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t pos = 0;
            int x = std::stoi(tok, &pos);
            if (pos != tok.size())
                throw std::invalid_argument(tok);
            f.params.push_back(x);
        }
        catch (const std::logic_error &) {
            throw ConfigError("bad family parameter '" + tok + "' in '" + s + "'");
        }
    }
    return f;
}

inline Graph make_named(const NamedFamily & f)
{
    auto need = [&](std::size_t k) {
        if (f.params.size() != k)
            throw ConfigError("family " + f.tag + " expects " + std::to_string(k) + " parameter(s)");
    };
    std::vector<Edge> ed;
    std::map<int, std::string> labels;
    if (f.tag == "k0") {
        need(0);
        // v1, v2 joined to w1..w4, plus w1w2
        labels = {{0, "v1"}, {1, "v2"}, {2, "w1"}, {3, "w2"}, {4, "w3"}, {5, "w4"}};
        for (int v = 0; v < 2; ++v)
            for (int w = 2; w < 6; ++w)
                ed.push_back({v, w});
        ed.push_back({2, 3});
    }
    else if (f.tag == "butterfly") {
        need(0);
        ed = {{0, 1}, {0, 2}, {1, 2}, {0, 3}, {0, 4}, {3, 4}};
    }
    else if (f.tag == "complete") {
        need(1);
        int n = f.params[0];
        if (n < 2)
            throw ConfigError("complete needs n >= 2");
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                ed.push_back({i, j});
    }
    else if (f.tag == "complete-bipartite") {
        need(2);
        int a = f.params[0], b = f.params[1];
        if (a < 1 || b < 1)
            throw ConfigError("complete-bipartite needs a, b >= 1");
        for (int i = 0; i < a; ++i) {
            labels[i] = "v" + std::to_string(i + 1);
            for (int j = 0; j < b; ++j)
                ed.push_back({i, a + j});
        }
        for (int j = 0; j < b; ++j)
            labels[a + j] = "w" + std::to_string(j + 1);
    }
    else if (f.tag == "cycle") {
        need(1);
        int n = f.params[0];
        if (n < 3)
            throw ConfigError("cycle length must be >= 3");
        for (int i = 0; i < n; ++i)
            ed.push_back({i, (i + 1) % n});
    }
    else if (f.tag == "path") {
        need(1);
        int n = f.params[0];
        if (n < 2)
            throw ConfigError("path needs >= 2 vertices");
        for (int i = 0; i + 1 < n; ++i)
            ed.push_back({i, i + 1});
    }
    else if (f.tag == "star") {
        need(1);
        int k = f.params[0];
        if (k < 1)
            throw ConfigError("star needs >= 1 leaf");
        for (int i = 1; i <= k; ++i)
            ed.push_back({0, i});
    }
    else if (f.tag == "disjoint-union") {
        if (f.parts.empty())
            throw ConfigError("disjoint-union needs parts");
        int offset = 0;
        for (auto & part : f.parts) {
            Graph g = make_named(part);
            for (auto & [a, b] : g.edges)
                ed.push_back({a + offset, b + offset});
            offset += g.vertices.back() + 1;
        }
    }
    else
        throw ConfigError("unknown family '" + f.tag + "'");
    return make_graph(ed, labels);
}

inline Graph make_named(const std::string & s)
{
    return make_named(parse_family(s));
}

inline Graph subgraph_from_mask(const Graph & g, std::uint64_t mask)
{
    std::vector<Edge> ed;
    for (int i = 0; i < g.e(); ++i)
        if (mask >> i & 1)
            ed.push_back(g.edges[i]);
    return make_graph(ed, g.labels);
}

inline void check_subgraph_cap(const Graph & g, int cap)
{
    if (g.e() > cap)
        throw CapExceeded("edge-subset enumeration refused: e = " + std::to_string(g.e()) + " exceeds cap " +
                          std::to_string(cap));
}

// Calls fn(mask, H) for all 2^e edge subsets, in increasing mask order.
inline void for_each_edge_subgraph(const Graph & g, const std::function<void(std::uint64_t, const Graph &)> & fn,
                                   int cap = Caps{}.subgraph_edges)
{
    check_subgraph_cap(g, cap);
    std::uint64_t total = std::uint64_t{1} << g.e();
    for (std::uint64_t m = 0; m < total; ++m)
        fn(m, subgraph_from_mask(g, m));
}

inline std::vector<Graph> enumerate_edge_subgraphs(const Graph & g, int cap = Caps{}.subgraph_edges)
{
    std::vector<Graph> out;
    for_each_edge_subgraph(g, [&](std::uint64_t, const Graph & h) { out.push_back(h); }, cap);
    return out;
}

inline Graph two_core(const Graph & g)
{
    std::vector<Edge> ed = g.edges;
    for (;;) {
        std::map<int, int> deg;
        for (auto & [a, b] : ed) {
            ++deg[a];
            ++deg[b];
        }
        std::vector<Edge> kept;
        for (auto & e : ed)
            if (deg[e.first] >= 2 && deg[e.second] >= 2)
                kept.push_back(e);
        if (kept.size() == ed.size())
            break;
        ed = std::move(kept);
    }
    return make_graph(ed, g.labels);
}

inline int component_count(const Graph & g)
{
    std::vector<int> parent(g.v());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    int comps = g.v();
    for (auto & [a, b] : g.index_edges()) {
        int ra = find(a), rb = find(b);
        if (ra != rb) {
            parent[ra] = rb;
            --comps;
        }
    }
    return comps;
}

inline bool is_forest(const Graph & g)
{
    return g.e() == g.v() - component_count(g);
}

inline std::vector<std::vector<int>> components(const Graph & g)
{
    auto adj = g.adjacency();
    std::vector<int> seen(g.v(), 0);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < g.v(); ++s) {
        if (seen[s])
            continue;
        std::vector<int> comp, stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            int x = stack.back();
            stack.pop_back();
            comp.push_back(x);
            for (int y : adj[x])
                if (!seen[y]) {
                    seen[y] = 1;
                    stack.push_back(y);
                }
        }
        out.push_back(comp);
    }
    return out;
}

// Cycle lengths (sorted) when the 2-core is a nonempty disjoint union of cycles.
inline std::optional<std::vector<int>> cycle_union_lengths(const Graph & g)
{
    Graph core = two_core(g);
    if (core.empty() || core.max_degree() != 2)
        return std::nullopt;
    std::vector<int> lengths;
    for (auto & comp : components(core))
        lengths.push_back(static_cast<int>(comp.size()));
    std::sort(lengths.begin(), lengths.end());
    return lengths;
}

inline bool is_cycle_union_core(const Graph & g)
{
    return cycle_union_lengths(g).has_value();
}

inline Rational delta_star(const Graph & g)
{
    if (g.empty())
        throw ConfigError("delta_star of a graph without edges");
    auto deg = g.degrees();
    int best = 0;
    for (auto & [a, b] : g.index_edges())
        best = std::max(best, deg[a] + deg[b]);
    return Rational(best, 2);
}

// Brute-force labeled-to-unlabeled isomorphism test for small graphs.
inline bool is_isomorphic(const Graph & a, const Graph & b)
{
    if (a.v() != b.v() || a.e() != b.e())
        return false;
    int n = a.v();
    auto da = a.degrees(), db = b.degrees();
    {
        auto sa = da, sb = db;
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        if (sa != sb)
            return false;
    }
    std::vector<std::vector<char>> ma(n, std::vector<char>(n, 0)), mb = ma;
    for (auto & [x, y] : a.index_edges())
        ma[x][y] = ma[y][x] = 1;
    for (auto & [x, y] : b.index_edges())
        mb[x][y] = mb[y][x] = 1;
    std::vector<int> map(n, -1);
    std::vector<char> used(n, 0);
    std::function<bool(int)> rec = [&](int i) {
        if (i == n)
            return true;
        for (int j = 0; j < n; ++j) {
            if (used[j] || da[i] != db[j])
                continue;
            bool ok = true;
            for (int k = 0; k < i && ok; ++k)
                ok = ma[i][k] == mb[j][map[k]];
            if (!ok)
                continue;
            used[j] = 1;
            map[i] = j;
            if (rec(i + 1))
                return true;
            used[j] = 0;
        }
        return false;
    };
    return rec(0);
}

// Short display name for common shapes, otherwise the edge list.
inline std::string shape_name(const Graph & h)
{
    if (h.empty())
        return "empty";
    if (h.v() == 6 && h.e() == 9 && is_isomorphic(h, make_named("k0")))
        return "K0";
    if (h.v() == 5 && h.e() == 6 && is_isomorphic(h, make_named("butterfly")))
        return "butterfly";
    if (h.e() == h.v() * (h.v() - 1) / 2)
        return "K" + std::to_string(h.v());
    if (h.max_degree() == 2 && h.min_degree() == 2 && components(h).size() == 1)
        return "C" + std::to_string(h.v());
    for (int a = 1; a <= h.v() / 2; ++a) {
        int b = h.v() - a;
        if (a * b != h.e())
            continue;
        if (is_isomorphic(h, make_named(NamedFamily{"complete-bipartite", {a, b}, {}})))
            return a < 10 && b < 10 ? "K" + std::to_string(a) + std::to_string(b)
                                    : "K" + std::to_string(a) + "," + std::to_string(b);
    }
    std::string s = "{";
    for (std::size_t i = 0; i < h.edges.size(); ++i)
        s += (i ? "," : "") + h.edge_label(h.edges[i]);
    return s + "}";
}

}
