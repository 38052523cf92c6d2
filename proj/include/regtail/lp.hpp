#pragma once

#include "regtail/common.hpp"
#include "regtail/graph.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace regtail {

struct HalfIntCover {
    std::map<int, Rational> weights;

    Rational total() const
    {
        Rational t = 0;
        for (auto & [v, x] : weights)
            t += x;
        return t;
    }
};

struct EdgeWeightVector {
    enum class Role { matching, edge_cover, perfect_matching };
    Role role = Role::matching;
    std::map<Edge, Rational> weights;

    Rational total() const
    {
        Rational t = 0;
        for (auto & [e, x] : weights)
            t += x;
        return t;
    }

    Rational at(const Edge & e) const
    {
        auto it = weights.find(e);
        return it == weights.end() ? Rational(0) : it->second;
    }
};

inline std::string role_name(EdgeWeightVector::Role r)
{
    switch (r) {
    case EdgeWeightVector::Role::matching: return "matching";
    case EdgeWeightVector::Role::edge_cover: return "edge-cover";
    case EdgeWeightVector::Role::perfect_matching: return "perfect-matching";
    }
    return "";
}

struct CoverResult {
    Rational value;
    HalfIntCover witness;
};

struct MatchingResult {
    Rational value;
    EdgeWeightVector witness;
};

inline std::map<int, Rational> vertex_sums(const Graph & h, const EdgeWeightVector & w)
{
    std::map<int, Rational> s;
    for (int v : h.vertices)
        s[v] = 0;
    for (auto & e : h.edges) {
        Rational x = w.at(e);
        s[e.first] += x;
        s[e.second] += x;
    }
    return s;
}

inline bool is_fractional_cover(const Graph & h, const HalfIntCover & c)
{
    for (auto & [v, x] : c.weights)
        if (x < 0)
            return false;
    for (auto & [a, b] : h.edges) {
        auto ia = c.weights.find(a), ib = c.weights.find(b);
        Rational xa = ia == c.weights.end() ? Rational(0) : ia->second;
        Rational xb = ib == c.weights.end() ? Rational(0) : ib->second;
        if (xa + xb < 1)
            return false;
    }
    return true;
}

inline bool is_fractional_matching(const Graph & h, const EdgeWeightVector & w)
{
    for (auto & [e, x] : w.weights)
        if (x < 0)
            return false;
    for (auto & [v, s] : vertex_sums(h, w))
        if (s > 1)
            return false;
    return true;
}

inline bool is_fractional_edge_cover(const Graph & h, const EdgeWeightVector & w)
{
    for (auto & [e, x] : w.weights)
        if (x < 0)
            return false;
    for (auto & [v, s] : vertex_sums(h, w))
        if (s < 1)
            return false;
    return true;
}

namespace detail {

struct Compact {
    int n = 0;
    std::vector<std::pair<int, int>> e;
    std::vector<std::vector<int>> inc;
    std::vector<std::vector<int>> adj;

    explicit Compact(const Graph & h) : n(h.v()), e(h.index_edges()), inc(n), adj(n)
    {
        for (int i = 0; i < static_cast<int>(e.size()); ++i) {
            inc[e[i].first].push_back(i);
            inc[e[i].second].push_back(i);
            adj[e[i].first].push_back(e[i].second);
            adj[e[i].second].push_back(e[i].first);
        }
    }
};

// Depth-first search over {0,1,2}^V (half units) for covers. When target >= 0 every
// cover of exactly that total is reported; otherwise the minimum is tracked.
inline void cover_search(const Compact & g, int target, const std::function<void(const std::vector<int> &)> & emit,
                         int & best, std::vector<int> & best_val)
{
    std::vector<int> order(g.n);
    for (int i = 0; i < g.n; ++i)
        order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return g.adj[a].size() > g.adj[b].size(); });
    std::vector<int> val(g.n, -1);
    auto lower = [&](int u) {
        int lo = 0;
        for (int x : g.adj[u])
            if (val[x] >= 0)
                lo = std::max(lo, 2 - val[x]);
        return lo;
    };
    std::function<void(int, int)> rec = [&](int pos, int sum) {
        int lb = sum;
        for (int i = pos; i < g.n; ++i)
            lb += lower(order[i]);
        if (target >= 0 ? lb > target : lb >= best)
            return;
        if (pos == g.n) {
            if (target >= 0)
                emit(val);
            else {
                best = sum;
                best_val = val;
            }
            return;
        }
        int v = order[pos];
        for (int x = lower(v); x <= 2; ++x) {
            val[v] = x;
            rec(pos + 1, sum + x);
        }
        val[v] = -1;
    };
    rec(0, 0);
}

// Depth-first search over {0,1,2}^E (half units) for fractional matchings, with a
// per-edge upper bound maxw. target < 0: maximize; otherwise enumerate all of that total.
inline void matching_search(const Compact & g, const std::vector<int> & maxw, int target,
                            const std::function<void(const std::vector<int> &)> & emit, int & best,
                            std::vector<int> & best_val)
{
    int m = static_cast<int>(g.e.size());
    std::vector<int> cap(g.n, 2), rem(g.n, 0), w(m, 0);
    for (auto & [a, b] : g.e) {
        ++rem[a];
        ++rem[b];
    }
    std::function<void(int, int)> rec = [&](int i, int sum) {
        int ub = 0;
        for (int v = 0; v < g.n; ++v)
            ub += std::min(cap[v], 2 * rem[v]);
        ub = sum + ub / 2;
        if (target >= 0 ? ub < target : ub <= best)
            return;
        if (i == m) {
            if (target >= 0) {
                if (sum == target)
                    emit(w);
            }
            else {
                best = sum;
                best_val = w;
            }
            return;
        }
        auto [a, b] = g.e[i];
        --rem[a];
        --rem[b];
        int hi = std::min({maxw[i], cap[a], cap[b]});
        for (int x = hi; x >= 0; --x) {
            w[i] = x;
            cap[a] -= x;
            cap[b] -= x;
            rec(i + 1, sum + x);
            cap[a] += x;
            cap[b] += x;
        }
        w[i] = 0;
        ++rem[a];
        ++rem[b];
    };
    rec(0, 0);
}

inline void edge_cover_search(const Compact & g, int & best, std::vector<int> & best_val)
{
    int m = static_cast<int>(g.e.size());
    std::vector<int> cur(g.n, 0), rem(g.n, 0), w(m, 0);
    for (auto & [a, b] : g.e) {
        ++rem[a];
        ++rem[b];
    }
    std::function<void(int, int)> rec = [&](int i, int sum) {
        int def = 0;
        for (int v = 0; v < g.n; ++v) {
            int d = std::max(0, 2 - cur[v]);
            if (d > 2 * rem[v])
                return;
            def += d;
        }
        if (sum + (def + 1) / 2 >= best)
            return;
        if (i == m) {
            best = sum;
            best_val = w;
            return;
        }
        auto [a, b] = g.e[i];
        --rem[a];
        --rem[b];
        for (int x = 0; x <= 2; ++x) {
            w[i] = x;
            cur[a] += x;
            cur[b] += x;
            rec(i + 1, sum + x);
            cur[a] -= x;
            cur[b] -= x;
        }
        w[i] = 0;
        ++rem[a];
        ++rem[b];
    };
    rec(0, 0);
}

inline void check_cover_cap(const Graph & h, const Caps & caps)
{
    if (h.v() > caps.cover_vertices)
        throw CapExceeded("vertex-cover enumeration refused: v = " + std::to_string(h.v()) + " exceeds cap " +
                          std::to_string(caps.cover_vertices));
}

inline void check_matching_cap(const Graph & h, const Caps & caps)
{
    if (h.e() > caps.matching_edges)
        throw CapExceeded("matching enumeration refused: e = " + std::to_string(h.e()) + " exceeds cap " +
                          std::to_string(caps.matching_edges));
}

inline HalfIntCover to_cover(const Graph & h, const std::vector<int> & val)
{
    HalfIntCover c;
    for (int i = 0; i < h.v(); ++i)
        c.weights[h.vertices[i]] = from_halves(val[i]);
    return c;
}

inline EdgeWeightVector to_edge_weights(const Graph & h, const std::vector<int> & w, EdgeWeightVector::Role role)
{
    EdgeWeightVector r;
    r.role = role;
    for (int i = 0; i < h.e(); ++i)
        r.weights[h.edges[i]] = from_halves(w[i]);
    return r;
}

inline int max_matching_halves(const Graph & h, const std::vector<int> & maxw)
{
    Compact g(h);
    int best = -1;
    std::vector<int> bv;
    matching_search(g, maxw, -1, {}, best, bv);
    return best;
}

}

inline CoverResult frac_vertex_cover_number(const Graph & h, const Caps & caps = {})
{
    detail::check_cover_cap(h, caps);
    detail::Compact g(h);
    int best = 2 * g.n + 1;
    std::vector<int> bv(g.n, 2);
    detail::cover_search(g, -1, {}, best, bv);
    return {from_halves(best), detail::to_cover(h, bv)};
}

inline std::vector<HalfIntCover> all_min_covers(const Graph & h, const Caps & caps = {})
{
    detail::check_cover_cap(h, caps);
    detail::Compact g(h);
    int best = 2 * g.n + 1;
    std::vector<int> bv(g.n, 2);
    detail::cover_search(g, -1, {}, best, bv);
    std::vector<HalfIntCover> out;
    int dummy = 0;
    detail::cover_search(
        g, best, [&](const std::vector<int> & val) { out.push_back(detail::to_cover(h, val)); }, dummy, bv);
    return out;
}

inline MatchingResult max_frac_matching(const Graph & h, const Caps & caps = {})
{
    detail::check_matching_cap(h, caps);
    detail::Compact g(h);
    int best = -1;
    std::vector<int> bv(g.e.size(), 0);
    detail::matching_search(g, std::vector<int>(g.e.size(), 2), -1, {}, best, bv);
    return {from_halves(best), detail::to_edge_weights(h, bv, EdgeWeightVector::Role::matching)};
}

// All half-integral maximum fractional matchings, in the search's fixed order.
inline std::vector<EdgeWeightVector> all_max_matchings(const Graph & h, const Caps & caps = {},
                                                       std::size_t limit = 100000)
{
    detail::check_matching_cap(h, caps);
    detail::Compact g(h);
    std::vector<int> maxw(g.e.size(), 2);
    int best = -1;
    std::vector<int> bv;
    detail::matching_search(g, maxw, -1, {}, best, bv);
    std::vector<EdgeWeightVector> out;
    int dummy = 0;
    detail::matching_search(
        g, maxw, best,
        [&](const std::vector<int> & w) {
            if (out.size() < limit)
                out.push_back(detail::to_edge_weights(h, w, EdgeWeightVector::Role::matching));
        },
        dummy, bv);
    return out;
}

inline MatchingResult min_frac_edge_cover(const Graph & h, const Caps & caps = {})
{
    detail::check_matching_cap(h, caps);
    detail::Compact g(h);
    for (int v = 0; v < g.n; ++v)
        if (g.inc[v].empty())
            throw ConfigError("edge cover infeasible: isolated vertex " + std::to_string(h.vertices[v]));
    int best = 2 * static_cast<int>(g.e.size()) + 1;
    std::vector<int> bv(g.e.size(), 2);
    detail::edge_cover_search(g, best, bv);
    return {from_halves(best), detail::to_edge_weights(h, bv, EdgeWeightVector::Role::edge_cover)};
}

// Raises each edge at a deficient vertex by deficiency / degree.
inline EdgeWeightVector matching_to_cover(const Graph & h, const EdgeWeightVector & w, const Caps & caps = {})
{
    if (!is_fractional_matching(h, w))
        throw ConfigError("matching_to_cover: input is not a fractional matching");
    Rational c = frac_vertex_cover_number(h, caps).value;
    if (w.total() != c)
        throw ConfigError("matching_to_cover: input total " + to_string(w.total()) + " is not maximum (c = " +
                          to_string(c) + ")");
    auto sums = vertex_sums(h, w);
    EdgeWeightVector out;
    out.role = EdgeWeightVector::Role::edge_cover;
    for (auto & e : h.edges)
        out.weights[e] = w.at(e);
    for (int v : h.vertices) {
        Rational def = 1 - sums[v];
        if (def <= 0)
            continue;
        int d = h.degree(v);
        for (auto & e : h.edges)
            if (e.first == v || e.second == v)
                out.weights[e] += def / d;
    }
    if (!is_fractional_edge_cover(h, out) || out.total() != Rational(h.v()) - c)
        throw std::logic_error("matching_to_cover produced a non-minimum cover");
    return out;
}

// Scales the edges at each over-covered vertex by 1 / (vertex sum).
inline EdgeWeightVector cover_to_matching(const Graph & h, const EdgeWeightVector & wp, const Caps & caps = {})
{
    if (!is_fractional_edge_cover(h, wp))
        throw ConfigError("cover_to_matching: input is not a fractional edge cover");
    Rational c = frac_vertex_cover_number(h, caps).value;
    if (wp.total() != Rational(h.v()) - c)
        throw ConfigError("cover_to_matching: input total " + to_string(wp.total()) + " is not minimum (v - c = " +
                          to_string(Rational(h.v()) - c) + ")");
    auto sums = vertex_sums(h, wp);
    EdgeWeightVector out;
    out.role = EdgeWeightVector::Role::matching;
    for (auto & e : h.edges) {
        Rational x = wp.at(e);
        if (sums[e.first] > 1)
            x /= sums[e.first];
        if (sums[e.second] > 1)
            x /= sums[e.second];
        out.weights[e] = x;
    }
    if (!is_fractional_matching(h, out) || out.total() != c)
        throw std::logic_error("cover_to_matching produced a non-maximum matching");
    return out;
}

// e0 is bad iff the best matching with w_e0 <= 1/2 falls short of c(h).
inline std::vector<Edge> bad_edges(const Graph & h, const Caps & caps = {})
{
    detail::check_matching_cap(h, caps);
    std::vector<Edge> out;
    if (h.empty())
        return out;
    int c2 = static_cast<int>((frac_vertex_cover_number(h, caps).value * 2).numerator());
    for (int i = 0; i < h.e(); ++i) {
        std::vector<int> maxw(h.e(), 2);
        maxw[i] = 1;
        if (detail::max_matching_halves(h, maxw) < c2)
            out.push_back(h.edges[i]);
    }
    return out;
}

// A maximum matching with w_e0 <= 1/2, if one exists.
inline std::optional<EdgeWeightVector> max_matching_avoiding(const Graph & h, const Edge & e0, const Caps & caps = {})
{
    detail::check_matching_cap(h, caps);
    detail::Compact g(h);
    std::vector<int> maxw(h.e(), 2);
    for (int i = 0; i < h.e(); ++i)
        if (h.edges[i] == e0)
            maxw[i] = 1;
    int best = -1;
    std::vector<int> bv;
    detail::matching_search(g, maxw, -1, {}, best, bv);
    if (from_halves(best) != frac_vertex_cover_number(h, caps).value)
        return std::nullopt;
    return detail::to_edge_weights(h, bv, EdgeWeightVector::Role::matching);
}

inline std::vector<std::vector<int>> valid_subsets(const Graph & h, const Caps & caps = {})
{
    std::set<std::vector<int>> found;
    for (auto & cov : all_min_covers(h, caps)) {
        std::vector<int> a;
        for (auto & [v, x] : cov.weights)
            if (x == Rational(1))
                a.push_back(v);
        found.insert(a);
    }
    std::vector<std::vector<int>> out(found.begin(), found.end());
    std::stable_sort(out.begin(), out.end(), [](auto & x, auto & y) { return x.size() < y.size(); });
    return out;
}

// For h without bad edges: average over edges of a maximum matching with w_e <= 1/2.
inline EdgeWeightVector averaged_matching(const Graph & h, const Caps & caps = {})
{
    EdgeWeightVector avg;
    avg.role = EdgeWeightVector::Role::matching;
    for (auto & e : h.edges)
        avg.weights[e] = 0;
    for (auto & e0 : h.edges) {
        auto m = max_matching_avoiding(h, e0, caps);
        if (!m)
            throw ConfigError("averaged_matching: edge " + h.edge_label(e0) + " is bad");
        for (auto & [e, x] : m->weights)
            avg.weights[e] += x / h.e();
    }
    return avg;
}

}
