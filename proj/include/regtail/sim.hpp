#pragma once

#include "regtail/common.hpp"
#include "regtail/graph.hpp"
#include "regtail/graphon.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <vector>

namespace regtail {

using Int128 = __int128;

inline std::string int128_to_string(Int128 x)
{
    if (x == 0)
        return "0";
    bool neg = x < 0;
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(x) : static_cast<unsigned __int128>(x);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg)
        s.push_back('-');
    return {s.rbegin(), s.rend()};
}

struct Provenance {
    std::string sampler;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

struct SimGraph {
    int n = 0;
    int words = 0;
    int regular_degree = -1;
    std::vector<std::uint64_t> bits;
    Provenance provenance;

    SimGraph() = default;
    explicit SimGraph(int n_) : n(n_), words((n_ + 63) / 64), bits(static_cast<std::size_t>(n_) * words, 0) {}

    const std::uint64_t * row(int u) const { return bits.data() + static_cast<std::size_t>(u) * words; }
    bool has(int u, int v) const { return (row(u)[v >> 6] >> (v & 63)) & 1; }
    void set(int u, int v, bool on)
    {
        std::uint64_t m = std::uint64_t{1} << (v & 63), mu = std::uint64_t{1} << (u & 63);
        std::size_t iu = static_cast<std::size_t>(u) * words + (v >> 6);
        std::size_t iv = static_cast<std::size_t>(v) * words + (u >> 6);
        if (on) {
            bits[iu] |= m;
            bits[iv] |= mu;
        }
        else {
            bits[iu] &= ~m;
            bits[iv] &= ~mu;
        }
    }
    int degree(int u) const
    {
        int d = 0;
        for (int w = 0; w < words; ++w)
            d += std::popcount(row(u)[w]);
        return d;
    }
    long long edge_count() const
    {
        long long s = 0;
        for (auto x : bits)
            s += std::popcount(x);
        return s / 2;
    }
    bool symmetric_loopless() const
    {
        for (int u = 0; u < n; ++u) {
            if (has(u, u))
                return false;
            for (int v = u + 1; v < n; ++v)
                if (has(u, v) != has(v, u))
                    return false;
        }
        return true;
    }
};

inline Graph to_graph(const SimGraph & g)
{
    std::vector<Edge> ed;
    for (int u = 0; u < g.n; ++u)
        for (int v = u + 1; v < g.n; ++v)
            if (g.has(u, v))
                ed.push_back(make_edge(u, v));
    return make_graph(ed);
}

inline SimGraph from_graph(const Graph & h)
{
    int n = h.vertices.empty() ? 0 : h.vertices.back() + 1;
    SimGraph g(n);
    for (auto & [a, b] : h.edges)
        g.set(a, b, true);
    return g;
}

// per-trial stream keyed by (master seed, trial index)
inline std::mt19937_64 trial_rng(std::uint64_t seed, std::uint64_t trial)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    return std::mt19937_64(seq);
}

inline int worker_count()
{
    if (const char * s = std::getenv("REGTAIL_THREADS")) {
        int k = std::atoi(s);
        if (k >= 1)
            return k;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// out[t] = fn(t); the result does not depend on the worker count
template <class T>
std::vector<T> run_trials(std::size_t trials, const std::function<T(std::size_t)> & fn, int workers = worker_count())
{
    std::vector<T> out(trials);
    workers = std::max(1, std::min<int>(workers, static_cast<int>(trials)));
    if (workers <= 1) {
        for (std::size_t t = 0; t < trials; ++t)
            out[t] = fn(t);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t t; !failed && (t = next++) < trials;) {
                try {
                    out[t] = fn(t);
                }
                catch (...) {
                    if (!failed.exchange(true))
                        err = std::current_exception();
                }
            }
        });
    for (auto & th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
    return out;
}

struct RegularOptions {
    long long budget = 1'000'000;
    int pure_attempts = 2000;
    double swap_factor = 10;
};

// Pairing model with rejection; if pure rejection keeps failing, a greedy pairing that
// avoids loops and repeated pairs. Both are followed by double-edge swaps.
inline SimGraph sample_regular(int n, int d, std::uint64_t seed, std::uint64_t trial = 0,
                               const RegularOptions & opt = {})
{
    if (n < 1 || d < 0)
        throw ConfigError("sample_regular: need n >= 1, d >= 0");
    if (d >= n)
        throw ConfigError("sample_regular: need d < n");
    if ((static_cast<long long>(n) * d) % 2 != 0)
        throw ConfigError("sample_regular: n*d must be even");
    auto rng = trial_rng(seed, trial);
    int np = n * d;
    std::vector<int> pts(np);
    SimGraph g(n);
    std::string tag = "pairing";
    long long attempts = 0;
    bool ok = false;
    for (; !ok && attempts < std::min<long long>(opt.pure_attempts, opt.budget); ++attempts) {
        for (int i = 0; i < np; ++i)
            pts[i] = i / d;
        std::shuffle(pts.begin(), pts.end(), rng);
        std::fill(g.bits.begin(), g.bits.end(), 0);
        ok = true;
        for (int i = 0; i < np && ok; i += 2) {
            int a = pts[i], b = pts[i + 1];
            if (a == b || g.has(a, b))
                ok = false;
            else
                g.set(a, b, true);
        }
    }
    if (!ok) {
        tag = "pairing-greedy";
        std::vector<int> left, cand;
        for (; !ok && attempts < opt.budget; ++attempts) {
            left.resize(np);
            for (int i = 0; i < np; ++i)
                left[i] = i / d;
            std::shuffle(left.begin(), left.end(), rng);
            std::fill(g.bits.begin(), g.bits.end(), 0);
            ok = true;
            while (!left.empty() && ok) {
                int a = left.back();
                left.pop_back();
                cand.clear();
                for (int i = 0; i < static_cast<int>(left.size()); ++i)
                    if (left[i] != a && !g.has(a, left[i]))
                        cand.push_back(i);
                if (cand.empty()) {
                    ok = false;
                    break;
                }
                int pick = cand[std::uniform_int_distribution<int>(0, static_cast<int>(cand.size()) - 1)(rng)];
                g.set(a, left[pick], true);
                left[pick] = left.back();
                left.pop_back();
            }
        }
    }
    if (!ok)
        throw CapExceeded("sample_regular: rejection budget of " + std::to_string(opt.budget) + " exhausted");
    std::vector<std::pair<int, int>> ed;
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (g.has(u, v))
                ed.push_back({u, v});
    long long T = static_cast<long long>(opt.swap_factor * n * d);
    if (ed.size() >= 2) {
        std::uniform_int_distribution<std::size_t> pick(0, ed.size() - 1);
        for (long long s = 0; s < T; ++s) {
            std::size_t i = pick(rng), j = pick(rng);
            bool flip = rng() & 1;
            if (i == j)
                continue;
            auto [a, b] = ed[i];
            auto [c, e] = ed[j];
            if (flip)
                std::swap(c, e);
            if (a == c || b == e || a == e || b == c || g.has(a, c) || g.has(b, e))
                continue;
            g.set(a, b, false);
            g.set(c, e, false);
            g.set(a, c, true);
            g.set(b, e, true);
            ed[i] = {std::min(a, c), std::max(a, c)};
            ed[j] = {std::min(b, e), std::max(b, e)};
        }
    }
    g.regular_degree = d;
    g.provenance = {tag, seed, trial};
    return g;
}

namespace detail {

struct HomPlan {
    int v = 0;
    std::vector<int> order;                   // cover vertices in assignment order
    std::vector<std::vector<int>> back;       // earlier cover neighbours, by position in order
    std::vector<std::vector<int>> groups;     // positions in order adjacent to a group of outside vertices
    std::vector<int> group_size;
    int isolated = 0;
};

inline HomPlan make_plan(const Graph & K)
{
    HomPlan plan;
    int v = K.v();
    plan.v = v;
    auto ied = K.index_edges();
    std::vector<std::uint32_t> nb(v, 0);
    for (auto & [a, b] : ied) {
        nb[a] |= 1u << b;
        nb[b] |= 1u << a;
    }
    std::uint32_t best = (1u << v) - 1;
    for (std::uint32_t s = 0; s < (1u << v); ++s) {
        if (std::popcount(s) >= std::popcount(best))
            continue;
        bool cover = true;
        for (auto & [a, b] : ied)
            cover = cover && (((s >> a) & 1) || ((s >> b) & 1));
        if (cover)
            best = s;
    }
    // order: most already-placed neighbours first
    std::uint32_t placed = 0;
    while (placed != best) {
        int pick = -1, score = -1;
        for (int x = 0; x < v; ++x)
            if (((best >> x) & 1) && !((placed >> x) & 1)) {
                int sc = std::popcount(nb[x] & placed) * 16 + std::popcount(nb[x]);
                if (sc > score) {
                    score = sc;
                    pick = x;
                }
            }
        plan.order.push_back(pick);
        placed |= 1u << pick;
    }
    std::vector<int> pos(v, -1);
    for (int i = 0; i < static_cast<int>(plan.order.size()); ++i)
        pos[plan.order[i]] = i;
    for (int i = 0; i < static_cast<int>(plan.order.size()); ++i) {
        std::vector<int> b;
        for (int j = 0; j < i; ++j)
            if ((nb[plan.order[i]] >> plan.order[j]) & 1)
                b.push_back(j);
        plan.back.push_back(b);
    }
    std::map<std::uint32_t, int> grp;
    for (int x = 0; x < v; ++x) {
        if ((best >> x) & 1)
            continue;
        if (nb[x] == 0)
            ++plan.isolated;
        else
            ++grp[nb[x]];
    }
    for (auto & [m, c] : grp) {
        std::vector<int> ps;
        for (int x = 0; x < v; ++x)
            if ((m >> x) & 1)
                ps.push_back(pos[x]);
        plan.groups.push_back(ps);
        plan.group_size.push_back(c);
    }
    return plan;
}

inline Int128 ipow128(Int128 b, int e)
{
    Int128 r = 1;
    while (e-- > 0)
        r *= b;
    return r;
}

// Plans sharing one skeleton (cover order and back edges) ride a single traversal;
// each distinct neighbourhood intersection is counted once per leaf.
inline std::vector<Int128> hom_count_skeleton(const std::vector<const HomPlan *> & plans, const SimGraph & G)
{
    const HomPlan & base = *plans[0];
    int n = G.n, W = G.words, depth = static_cast<int>(base.order.size());
    std::vector<Int128> total(plans.size(), 0);
    if (depth == 0) {
        for (std::size_t q = 0; q < plans.size(); ++q)
            total[q] = ipow128(n, plans[q]->isolated);
        return total;
    }
    std::vector<std::vector<int>> sets;
    std::vector<std::vector<int>> set_of(plans.size());
    for (std::size_t q = 0; q < plans.size(); ++q)
        for (auto & ps : plans[q]->groups) {
            auto it = std::find(sets.begin(), sets.end(), ps);
            set_of[q].push_back(static_cast<int>(it - sets.begin()));
            if (it == sets.end())
                sets.push_back(ps);
        }
    std::vector<Int128> iso(plans.size());
    for (std::size_t q = 0; q < plans.size(); ++q)
        iso[q] = ipow128(n, plans[q]->isolated);
    std::vector<int> deg(n);
    for (int u = 0; u < n; ++u)
        deg[u] = G.degree(u);
    std::vector<long long> cnt(sets.size());
    std::vector<int> img(depth);
    std::vector<std::vector<std::uint64_t>> cand(depth, std::vector<std::uint64_t>(W));
    std::uint64_t tail = n % 64 == 0 ? ~std::uint64_t{0} : (std::uint64_t{1} << (n % 64)) - 1;
    std::function<void(int)> rec = [&](int i) {
        if (i == depth) {
            for (std::size_t k = 0; k < sets.size(); ++k) {
                const auto & ps = sets[k];
                if (ps.size() == 1) {
                    cnt[k] = deg[img[ps[0]]];
                    continue;
                }
                const std::uint64_t * r0 = G.row(img[ps[0]]);
                const std::uint64_t * r1 = G.row(img[ps[1]]);
                long long c = 0;
                if (ps.size() == 2) {
                    for (int w = 0; w < W; ++w)
                        c += std::popcount(r0[w] & r1[w]);
                }
                else {
                    for (int w = 0; w < W; ++w) {
                        std::uint64_t x = r0[w] & r1[w];
                        for (std::size_t t = 2; t < ps.size() && x; ++t)
                            x &= G.row(img[ps[t]])[w];
                        c += std::popcount(x);
                    }
                }
                cnt[k] = c;
            }
            for (std::size_t q = 0; q < plans.size(); ++q) {
                Int128 prod = iso[q];
                for (std::size_t g = 0; g < set_of[q].size() && prod != 0; ++g)
                    prod *= ipow128(cnt[set_of[q][g]], plans[q]->group_size[g]);
                total[q] += prod;
            }
            return;
        }
        auto & cs = cand[i];
        if (base.back[i].empty()) {
            std::fill(cs.begin(), cs.end(), ~std::uint64_t{0});
            cs[W - 1] = tail;
        }
        else {
            const std::uint64_t * r0 = G.row(img[base.back[i][0]]);
            std::copy(r0, r0 + W, cs.begin());
            for (std::size_t t = 1; t < base.back[i].size(); ++t) {
                const std::uint64_t * r = G.row(img[base.back[i][t]]);
                for (int w = 0; w < W; ++w)
                    cs[w] &= r[w];
            }
        }
        for (int w = 0; w < W; ++w) {
            std::uint64_t x = cs[w];
            while (x) {
                int b = std::countr_zero(x);
                x &= x - 1;
                img[i] = w * 64 + b;
                rec(i + 1);
            }
        }
    };
    rec(0);
    return total;
}

inline std::vector<Int128> hom_count_plans(const std::vector<HomPlan> & plans, const SimGraph & G)
{
    std::vector<Int128> out(plans.size(), 0);
    std::map<std::pair<std::size_t, std::vector<std::vector<int>>>, std::vector<std::size_t>> buckets;
    for (std::size_t q = 0; q < plans.size(); ++q)
        buckets[{plans[q].order.size(), plans[q].back}].push_back(q);
    for (auto & [key, idx] : buckets) {
        std::vector<const HomPlan *> ps;
        for (auto q : idx)
            ps.push_back(&plans[q]);
        auto r = hom_count_skeleton(ps, G);
        for (std::size_t t = 0; t < idx.size(); ++t)
            out[idx[t]] = r[t];
    }
    return out;
}

inline Int128 hom_count_plan(const HomPlan & plan, const SimGraph & G)
{
    return hom_count_skeleton({&plan}, G)[0];
}

inline void check_hom_caps(const Graph & K, const SimGraph & G, const Caps & caps)
{
    if (K.v() > caps.hom_pattern_vertices)
        throw CapExceeded("hom_count: pattern has " + std::to_string(K.v()) + " vertices, cap " +
                          std::to_string(caps.hom_pattern_vertices));
    if (G.n > caps.hom_host_vertices)
        throw CapExceeded("hom_count: host has " + std::to_string(G.n) + " vertices, cap " +
                          std::to_string(caps.hom_host_vertices));
}

// restricted growth strings
inline void for_each_partition(int v, const std::function<void(const std::vector<int> &, int)> & fn)
{
    std::vector<int> a(v, 0);
    std::function<void(int, int)> rec = [&](int i, int blocks) {
        if (i == v) {
            fn(a, blocks);
            return;
        }
        for (int b = 0; b <= blocks; ++b) {
            a[i] = b;
            rec(i + 1, std::max(blocks, b + 1));
        }
    };
    if (v == 0)
        fn(a, 0);
    else
        rec(0, 0);
}

struct Quotient {
    Graph graph;
    int blocks = 0;
    long long mobius = 0;
};

// quotients of K without loops, each with its Mobius coefficient mu(0, pi)
inline std::vector<Quotient> loopless_quotients(const Graph & K)
{
    std::vector<Quotient> out;
    auto ied = K.index_edges();
    for_each_partition(K.v(), [&](const std::vector<int> & a, int blocks) {
        for (auto & [x, y] : ied)
            if (a[x] == a[y])
                return;
        std::vector<int> size(blocks, 0);
        for (int b : a)
            ++size[b];
        long long mu = 1;
        for (int s : size)
            for (int t = 1; t < s; ++t)
                mu *= -t;
        std::vector<Edge> ed;
        for (auto & [x, y] : ied)
            ed.push_back(make_edge(a[x], a[y]));
        Quotient q;
        q.graph = make_graph(ed);
        q.blocks = blocks;
        q.mobius = mu;
        out.push_back(q);
    });
    return out;
}

}

inline Int128 hom_count(const Graph & K, const SimGraph & G, const Caps & caps = {})
{
    detail::check_hom_caps(K, G, caps);
    return detail::hom_count_plan(detail::make_plan(K), G);
}

// injective homomorphisms, by inclusion-exclusion over vertex partitions
inline Int128 injective_count(const Graph & K, const SimGraph & G, const Caps & caps = {})
{
    detail::check_hom_caps(K, G, caps);
    auto qs = detail::loopless_quotients(K);
    std::vector<detail::HomPlan> plans;
    for (auto & q : qs)
        plans.push_back(detail::make_plan(q.graph));
    auto h = detail::hom_count_plans(plans, G);
    Int128 s = 0;
    for (std::size_t i = 0; i < qs.size(); ++i)
        s += qs[i].mobius * h[i];
    return s;
}

inline Int128 cycle_hom_oracle(int k, const SimGraph & G)
{
    if (k < 3 || k > 12)
        throw ConfigError("cycle_hom_oracle: need 3 <= k <= 12");
    int n = G.n;
    std::vector<Int128> A(static_cast<std::size_t>(n) * n), P, Q(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            A[static_cast<std::size_t>(i) * n + j] = G.has(i, j);
    P = A;
    for (int step = 1; step < k; ++step) {
        std::fill(Q.begin(), Q.end(), 0);
        for (int i = 0; i < n; ++i)
            for (int l = 0; l < n; ++l) {
                Int128 x = P[static_cast<std::size_t>(i) * n + l];
                if (x == 0)
                    continue;
                for (int j = 0; j < n; ++j)
                    Q[static_cast<std::size_t>(i) * n + j] += x * A[static_cast<std::size_t>(l) * n + j];
            }
        std::swap(P, Q);
    }
    Int128 tr = 0;
    for (int i = 0; i < n; ++i)
        tr += P[static_cast<std::size_t>(i) * n + i];
    return tr;
}

// exact E Hom(K, G(n,p)): sum over loopless quotients of (n)_blocks p^{e(quotient)}
inline double expected_hom_gnp(const Graph & K, int n, double p)
{
    double s = 0;
    detail::for_each_partition(K.v(), [&](const std::vector<int> & a, int blocks) {
        std::set<Edge> ed;
        for (auto & [x, y] : K.index_edges()) {
            if (a[x] == a[y])
                return;
            ed.insert(make_edge(a[x], a[y]));
        }
        double f = 1;
        for (int i = 0; i < blocks; ++i)
            f *= n - i;
        s += f * std::pow(p, static_cast<double>(ed.size()));
    });
    return s;
}

inline double expected_injective_gnp(const Graph & K, int n, double p)
{
    double f = 1;
    for (int i = 0; i < K.v(); ++i)
        f *= n - i;
    return f * std::pow(p, K.e());
}

struct PStarSpec {
    BlockGraphon W;
    int n = 0;
    double p = 0;
    std::vector<std::vector<char>> mask;
    std::vector<int> bounds;                 // V_i = [bounds[i], bounds[i+1])
    std::vector<std::vector<long long>> a;   // target counts; diagonal counts ordered pairs

    int k() const { return W.k(); }
    int class_size(int i) const { return bounds[i + 1] - bounds[i]; }
    double prob(int i, int j) const { return mask[i][j] ? W.values[i][j] : p; }
};

inline std::vector<std::vector<char>> default_mask(const BlockGraphon & W, double p, double tol = 1e-12)
{
    int k = W.k();
    std::vector<std::vector<char>> m(k, std::vector<char>(k, 0));
    for (int i = 0; i + 1 < k; ++i)
        for (int j = 0; j + 1 < k; ++j)
            m[i][j] = std::fabs(W.values[i][j] - p) > tol * p;
    return m;
}

inline PStarSpec make_pstar(const BlockGraphon & W, int n, double p, std::vector<std::vector<char>> mask = {})
{
    validate_graphon(W);
    if (n < 1)
        throw ConfigError("make_pstar: need n >= 1");
    if (!(p > 0 && p < 1))
        throw ConfigError("make_pstar: need 0 < p < 1");
    PStarSpec s;
    s.W = W;
    s.n = n;
    s.p = p;
    int k = W.k();
    s.mask = mask.empty() ? default_mask(W, p) : mask;
    if (static_cast<int>(s.mask.size()) != k)
        throw ConfigError("make_pstar: mask shape does not match the graphon");
    for (int i = 0; i < k; ++i) {
        if (static_cast<int>(s.mask[i].size()) != k)
            throw ConfigError("make_pstar: mask shape does not match the graphon");
        for (int j = 0; j < k; ++j) {
            if (s.mask[i][j] != s.mask[j][i])
                throw ConfigError("make_pstar: mask must be symmetric");
            if (s.mask[i][j] && (i == k - 1 || j == k - 1))
                throw ConfigError("make_pstar: mask may only mark pairs among the first k-1 blocks");
        }
    }
    double cum = 0;
    s.bounds.push_back(0);
    for (int i = 0; i < k; ++i) {
        cum += W.sizes[i];
        s.bounds.push_back(i == k - 1 ? n : static_cast<int>(std::llround(cum * n)));
    }
    for (int i = 0; i < k; ++i)
        s.bounds[i + 1] = std::max(s.bounds[i + 1], s.bounds[i]);
    s.a.assign(k, std::vector<long long>(k, 0));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double ni = s.class_size(i), nj = s.class_size(j);
            if (i == j)
                s.a[i][j] = 2 * std::llround(W.values[i][j] * ni * (ni - 1) / 2);
            else
                s.a[i][j] = std::llround(W.values[i][j] * ni * nj);
        }
    return s;
}

namespace detail {

// independent pairs with probability q, by geometric skipping over the pair index
template <class Visit>
void bernoulli_pairs(long long total, double q, std::mt19937_64 & rng, Visit && visit)
{
    if (q <= 0 || total <= 0)
        return;
    if (q >= 1) {
        for (long long t = 0; t < total; ++t)
            visit(t);
        return;
    }
    std::geometric_distribution<long long> skip(q);
    for (long long t = skip(rng); t < total; t += 1 + skip(rng))
        visit(t);
}

}

inline SimGraph sample_pstar(const PStarSpec & s, std::uint64_t seed, std::uint64_t trial = 0)
{
    auto rng = trial_rng(seed, trial);
    SimGraph g(s.n);
    for (int i = 0; i < s.k(); ++i)
        for (int j = i; j < s.k(); ++j) {
            int lo_i = s.bounds[i], ni = s.class_size(i), lo_j = s.bounds[j], nj = s.class_size(j);
            double q = s.prob(i, j);
            if (i == j) {
                // pair index t enumerates u < v inside the class row by row
                long long total = static_cast<long long>(ni) * (ni - 1) / 2;
                int u = 0;
                long long row_start = 0;
                detail::bernoulli_pairs(total, q, rng, [&](long long t) {
                    while (t >= row_start + (ni - 1 - u)) {
                        row_start += ni - 1 - u;
                        ++u;
                    }
                    int v = u + 1 + static_cast<int>(t - row_start);
                    g.set(lo_i + u, lo_i + v, true);
                });
            }
            else {
                detail::bernoulli_pairs(static_cast<long long>(ni) * nj, q, rng, [&](long long t) {
                    g.set(lo_i + static_cast<int>(t / nj), lo_j + static_cast<int>(t % nj), true);
                });
            }
        }
    g.provenance = {"pstar", seed, trial};
    return g;
}

// edges between classes i and j, counted as ordered pairs on the diagonal
inline long long block_pair_count(const PStarSpec & s, const SimGraph & g, int i, int j)
{
    long long c = 0;
    for (int u = s.bounds[i]; u < s.bounds[i + 1]; ++u)
        for (int v = s.bounds[j]; v < s.bounds[j + 1]; ++v)
            c += g.has(u, v);
    return c;
}

inline bool meets_targets(const PStarSpec & s, const SimGraph & g)
{
    for (int i = 0; i < s.k(); ++i)
        for (int j = i; j < s.k(); ++j)
            if (s.mask[i][j] && block_pair_count(s, g, i, j) != s.a[i][j])
                return false;
    return true;
}

// resample until every masked block carries exactly a_ij pairs
inline SimGraph sample_pstar_conditioned(const PStarSpec & s, std::uint64_t seed, std::uint64_t trial,
                                         long long budget = 100'000)
{
    for (long long attempt = 0; attempt < budget; ++attempt) {
        SimGraph g = sample_pstar(s, seed, trial * static_cast<std::uint64_t>(budget) + attempt);
        if (meets_targets(s, g)) {
            g.provenance = {"pstar-conditioned", seed, trial};
            return g;
        }
    }
    throw CapExceeded("sample_pstar_conditioned: budget of " + std::to_string(budget) + " resamples exhausted");
}

struct Interval {
    double lo = 0;
    double hi = 1;
};

inline Interval wilson95(long long hits, long long trials)
{
    if (trials <= 0)
        return {0, 1};
    const double z = 1.959963984540054;
    double n = static_cast<double>(trials), ph = hits / n;
    double den = 1 + z * z / n;
    double mid = (ph + z * z / (2 * n)) / den;
    double half = z * std::sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den;
    return {std::max(0.0, std::min(mid - half, ph)), std::min(1.0, std::max(mid + half, ph))};
}

struct TailEstimate {
    long long trials = 0;
    long long hits = 0;
    double estimate = 0;
    Interval wilson;
    double threshold = 0;
    std::uint64_t seed = 0;
    double mean_hom = 0;
    double min_hom = 0;
    double max_hom = 0;
};

inline TailEstimate tail_estimate(const Graph & K, int n, int d, double delta, long long trials, std::uint64_t seed,
                                  const Caps & caps = {}, const RegularOptions & opt = {})
{
    if (trials < 1)
        throw ConfigError("tail_estimate: need trials >= 1");
    if (delta < -1)
        throw ConfigError("tail_estimate: need delta >= -1");
    double p = static_cast<double>(d) / n;
    TailEstimate t;
    t.trials = trials;
    t.seed = seed;
    t.threshold = (1 + delta) * std::pow(p, K.e()) * std::pow(static_cast<double>(n), K.v());
    if (K.v() > caps.hom_pattern_vertices || n > caps.hom_host_vertices)
        detail::check_hom_caps(K, SimGraph(n), caps);
    auto plan = detail::make_plan(K);
    auto homs = run_trials<double>(static_cast<std::size_t>(trials), [&](std::size_t i) {
        return static_cast<double>(detail::hom_count_plan(plan, sample_regular(n, d, seed, i, opt)));
    });
    t.min_hom = *std::min_element(homs.begin(), homs.end());
    t.max_hom = *std::max_element(homs.begin(), homs.end());
    double s = 0;
    for (double h : homs) {
        s += h;
        t.hits += h >= t.threshold * (1 - 1e-15);
    }
    t.mean_hom = s / trials;
    t.estimate = static_cast<double>(t.hits) / trials;
    t.wilson = wilson95(t.hits, t.trials);
    return t;
}

struct MeanStat {
    double mean = 0;
    double stderr_ = 0;
};

inline MeanStat mean_stat(const std::vector<double> & xs)
{
    MeanStat m;
    if (xs.empty())
        return m;
    double s = 0;
    for (double x : xs)
        s += x;
    m.mean = s / xs.size();
    if (xs.size() > 1) {
        double v = 0;
        for (double x : xs)
            v += (x - m.mean) * (x - m.mean);
        m.stderr_ = std::sqrt(v / (xs.size() - 1) / xs.size());
    }
    return m;
}

struct PlantedReport {
    long long trials = 0;
    std::uint64_t seed = 0;
    int n = 0;
    double p = 0;
    double predicted_ratio = 0;
    MeanStat hom;
    MeanStat injective;
    double baseline_hom = 0;
    double baseline_injective = 0;
    double hom_ratio = 0;
    double injective_ratio = 0;
    double injective_ratio_stderr = 0;
    double relative_error = 0;
    std::vector<int> class_sizes;
};

// Mean Hom(K, .) under P_star built from W against the exact G(n,p) expectation.
inline PlantedReport planted_comparison(const Graph & K, const BlockGraphon & W, int n, double p, long long trials,
                                        std::uint64_t seed, Caps caps = {}, std::vector<std::vector<char>> mask = {})
{
    if (trials < 1)
        throw ConfigError("planted_comparison: need trials >= 1");
    auto spec = make_pstar(W, n, p, std::move(mask));
    detail::check_hom_caps(K, SimGraph(0), caps);
    if (n > caps.hom_host_vertices)
        throw CapExceeded("planted_comparison: host has " + std::to_string(n) + " vertices, cap " +
                          std::to_string(caps.hom_host_vertices));
    PlantedReport r;
    r.trials = trials;
    r.seed = seed;
    r.n = n;
    r.p = p;
    for (int i = 0; i < spec.k(); ++i)
        r.class_sizes.push_back(spec.class_size(i));
    r.predicted_ratio = hom_density(K, W) / std::pow(p, K.e());
    auto qs = detail::loopless_quotients(K);
    std::vector<detail::HomPlan> plans;
    std::size_t identity = 0;
    for (std::size_t i = 0; i < qs.size(); ++i) {
        plans.push_back(detail::make_plan(qs[i].graph));
        if (qs[i].blocks == K.v())
            identity = i;
    }
    struct Pair {
        double hom = 0, inj = 0;
    };
    auto res = run_trials<Pair>(static_cast<std::size_t>(trials), [&](std::size_t t) {
        SimGraph g = sample_pstar(spec, seed, t);
        Pair x;
        auto h = detail::hom_count_plans(plans, g);
        Int128 inj = 0;
        for (std::size_t i = 0; i < qs.size(); ++i)
            inj += qs[i].mobius * h[i];
        x.hom = static_cast<double>(h[identity]);
        x.inj = static_cast<double>(inj);
        return x;
    });
    std::vector<double> hs, is;
    for (auto & x : res) {
        hs.push_back(x.hom);
        is.push_back(x.inj);
    }
    r.hom = mean_stat(hs);
    r.injective = mean_stat(is);
    r.baseline_hom = expected_hom_gnp(K, n, p);
    r.baseline_injective = expected_injective_gnp(K, n, p);
    r.hom_ratio = r.hom.mean / r.baseline_hom;
    r.injective_ratio = r.injective.mean / r.baseline_injective;
    r.injective_ratio_stderr = r.injective.stderr_ / r.baseline_injective;
    r.relative_error = std::fabs(r.injective_ratio - r.predicted_ratio) / r.predicted_ratio;
    return r;
}

}
