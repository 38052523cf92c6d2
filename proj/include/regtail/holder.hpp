#pragma once

#include "regtail/common.hpp"
#include "regtail/graph.hpp"
#include "regtail/graphon.hpp"
#include "regtail/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace regtail {

struct Box {
    double lo = 0;
    double hi = 1;
    double width() const { return hi - lo; }
};

// f_e on B_v x B_v' as an r x r grid; row index is the cell of the edge's first endpoint.
struct StepKernel {
    int r = 1;
    std::vector<double> vals;

    double at(int i, int j) const { return vals[static_cast<std::size_t>(i) * r + j]; }
    double & at(int i, int j) { return vals[static_cast<std::size_t>(i) * r + j]; }
    double bound() const
    {
        double b = 0;
        for (double x : vals)
            b = std::max(b, std::fabs(x));
        return b;
    }
};

// One kernel per edge of H (in H.edges order), one box per vertex (in H.vertices order).
struct HolderInstance {
    Graph h;
    int r = 1;
    std::vector<StepKernel> kernels;
    std::vector<Box> boxes;
};

struct WeightPair {
    std::vector<Rational> w;
    std::vector<Rational> wp;
};

inline void check_instance(const HolderInstance & in)
{
    if (in.h.v() > 7)
        throw CapExceeded("holder instance: v(H) = " + std::to_string(in.h.v()) + " exceeds cap 7");
    if (in.r < 1 || in.r > 24)
        throw CapExceeded("holder instance: grid resolution r = " + std::to_string(in.r) + " outside [1,24]");
    if (static_cast<int>(in.kernels.size()) != in.h.e() || static_cast<int>(in.boxes.size()) != in.h.v())
        throw ConfigError("holder instance: kernel or box count mismatch");
    for (auto & k : in.kernels) {
        if (k.r != in.r || static_cast<int>(k.vals.size()) != in.r * in.r)
            throw ConfigError("holder instance: inconsistent kernel grid");
        for (double x : k.vals)
            if (!std::isfinite(x))
                throw ConfigError("holder instance: non-finite kernel value");
    }
    for (auto & b : in.boxes)
        if (!(b.lo >= 0 && b.hi <= 1 && b.lo < b.hi))
            throw ConfigError("holder instance: box must be a nonempty sub-interval of [0,1]");
}

namespace detail {

struct Factor {
    std::vector<int> vars;
    std::vector<double> table;
};

inline std::size_t ipow(int r, std::size_t k)
{
    std::size_t x = 1;
    for (std::size_t i = 0; i < k; ++i)
        x *= r;
    return x;
}

}

// Riemann sum over the product grid, by eliminating vertices one at a time.
inline double lhs_integral(const HolderInstance & in, std::size_t table_cap = 20'000'000)
{
    check_instance(in);
    using detail::Factor;
    int r = in.r, n = in.h.v();
    std::vector<Factor> factors;
    auto ied = in.h.index_edges();
    for (int e = 0; e < in.h.e(); ++e) {
        auto [a, b] = ied[e];
        factors.push_back({{a, b}, in.kernels[e].vals});
    }
    double scale = 1;
    for (int v = 0; v < n; ++v)
        scale *= in.boxes[v].width() / r;
    std::vector<char> alive(n, 1);
    for (int step = 0; step < n; ++step) {
        int pick = -1;
        std::size_t pick_size = 0;
        for (int v = 0; v < n; ++v) {
            if (!alive[v])
                continue;
            std::vector<int> u;
            for (auto & f : factors)
                if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end())
                    for (int x : f.vars)
                        if (std::find(u.begin(), u.end(), x) == u.end())
                            u.push_back(x);
            if (pick < 0 || u.size() < pick_size) {
                pick = v;
                pick_size = u.size();
            }
        }
        int v = pick;
        alive[v] = 0;
        std::vector<Factor> touching, rest;
        for (auto & f : factors)
            (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end() ? touching : rest).push_back(std::move(f));
        std::vector<int> uni{v};
        for (auto & f : touching)
            for (int x : f.vars)
                if (std::find(uni.begin(), uni.end(), x) == uni.end())
                    uni.push_back(x);
        std::size_t usize = detail::ipow(r, uni.size());
        if (usize > table_cap)
            throw CapExceeded("lhs_integral: intermediate table exceeds cap");
        // result over uni minus v (v is uni[0])
        Factor out;
        out.vars.assign(uni.begin() + 1, uni.end());
        out.table.assign(detail::ipow(r, out.vars.size()), 0.0);
        std::vector<std::vector<std::size_t>> stride(touching.size());
        for (std::size_t t = 0; t < touching.size(); ++t) {
            auto & f = touching[t];
            stride[t].assign(uni.size(), 0);
            std::size_t s = 1;
            for (int q = static_cast<int>(f.vars.size()) - 1; q >= 0; --q) {
                auto pos = std::find(uni.begin(), uni.end(), f.vars[q]) - uni.begin();
                stride[t][pos] = s;
                s *= r;
            }
        }
        std::vector<int> idx(uni.size(), 0);
        for (std::size_t lin = 0; lin < usize; ++lin) {
            // idx[0] (v) varies slowest
            std::size_t rem = lin;
            for (int q = static_cast<int>(uni.size()) - 1; q >= 0; --q) {
                idx[q] = static_cast<int>(rem % r);
                rem /= r;
            }
            double prod = 1;
            for (std::size_t t = 0; t < touching.size(); ++t) {
                std::size_t off = 0;
                for (std::size_t q = 0; q < uni.size(); ++q)
                    off += stride[t][q] * idx[q];
                prod *= touching[t].table[off];
            }
            out.table[lin % out.table.size()] += prod;
        }
        rest.push_back(std::move(out));
        factors = std::move(rest);
    }
    double total = 1;
    for (auto & f : factors)
        total *= f.table[0];
    return total * scale;
}

namespace detail {

// (int over the partner coordinate |f|^a)^{1/a}, maximized over the own coordinate
inline double column_norm(const StepKernel & k, bool own_is_row, double partner_width, double a_inv)
{
    int r = k.r;
    double mu = partner_width / r;
    double best = 0;
    for (int i = 0; i < r; ++i) {
        double s = 0;
        if (a_inv == 0) {
            for (int j = 0; j < r; ++j)
                s = std::max(s, std::fabs(own_is_row ? k.at(i, j) : k.at(j, i)));
        }
        else {
            double a = 1 / a_inv;
            for (int j = 0; j < r; ++j)
                s += mu * std::pow(std::fabs(own_is_row ? k.at(i, j) : k.at(j, i)), a);
            s = std::pow(s, a_inv);
        }
        best = std::max(best, s);
    }
    return best;
}

inline double full_norm(const StepKernel & k, double cell, double a_inv)
{
    if (a_inv == 0)
        return k.bound();
    double a = 1 / a_inv, s = 0;
    for (double x : k.vals)
        s += cell * std::pow(std::fabs(x), a);
    return std::pow(s, a_inv);
}

}

inline double rhs_bound(const HolderInstance & in, const WeightPair & wp)
{
    check_instance(in);
    int m = in.h.e();
    if (static_cast<int>(wp.w.size()) != m || static_cast<int>(wp.wp.size()) != m)
        throw ConfigError("rhs_bound: weight vectors do not match the edge count");
    for (int e = 0; e < m; ++e)
        if (wp.w[e] < 0 || wp.wp[e] < 0)
            throw ConfigError("rhs_bound: negative weight");
    auto ied = in.h.index_edges();
    std::vector<Rational> vsum(in.h.v(), 0);
    for (int e = 0; e < m; ++e) {
        vsum[ied[e].first] += wp.wp[e];
        vsum[ied[e].second] += wp.wp[e];
    }
    double result = 1;
    for (int e = 0; e < m; ++e) {
        auto [a, b] = ied[e];
        const StepKernel & k = in.kernels[e];
        bool zero = wp.wp[e] == Rational(0);
        double ainv = to_double(wp.wp[e]);
        // second product: ||f_e||_{1/w'}^{w/w'}, with exponent 1 when w = w' = 0
        double cell = in.boxes[a].width() / in.r * in.boxes[b].width() / in.r;
        double ex2 = zero ? 1.0 : to_double(wp.w[e] / wp.wp[e]);
        result *= std::pow(detail::full_norm(k, cell, ainv), ex2);
        if (zero)
            continue;
        double ex1 = to_double((wp.wp[e] - wp.w[e]) / wp.wp[e]);
        if (ex1 == 0)
            continue;
        if (vsum[a] > Rational(1))
            result *= std::pow(detail::column_norm(k, true, in.boxes[b].width(), ainv), ex1);
        if (vsum[b] > Rational(1))
            result *= std::pow(detail::column_norm(k, false, in.boxes[a].width(), ainv), ex1);
    }
    return result;
}

struct Verdict {
    double lhs = 0;
    double rhs = 0;
    double margin = 0;
    bool pass = false;
};

inline Verdict verify_instance(const HolderInstance & in, const WeightPair & wp)
{
    Verdict v;
    v.lhs = lhs_integral(in);
    v.rhs = rhs_bound(in, wp);
    v.margin = v.rhs - v.lhs;
    v.pass = v.margin >= -1e-9 * std::max(1.0, std::fabs(v.rhs));
    return v;
}

inline WeightPair to_weight_pair(const Graph & h, const EdgeWeightVector & w, const EdgeWeightVector & wp)
{
    WeightPair r;
    for (auto & e : h.edges) {
        r.w.push_back(w.at(e));
        r.wp.push_back(wp.at(e));
    }
    return r;
}

// Checks the hypotheses: w a maximum matching, w' a minimum edge cover, w <= w'.
inline void validate_weight_pair(const Graph & h, const WeightPair & p, const Rational & c)
{
    EdgeWeightVector w, wp;
    for (int e = 0; e < h.e(); ++e) {
        if (p.w[e] > p.wp[e])
            throw ConfigError("weight pair: w_e > w'_e on " + h.edge_label(h.edges[e]));
        w.weights[h.edges[e]] = p.w[e];
        wp.weights[h.edges[e]] = p.wp[e];
    }
    if (!is_fractional_matching(h, w) || w.total() != c)
        throw ConfigError("weight pair: w is not a maximum fractional matching");
    if (!is_fractional_edge_cover(h, wp) || wp.total() != Rational(h.v()) - c)
        throw ConfigError("weight pair: w' is not a minimum fractional edge cover");
}

// Admissible pairs built from the lp conversions: each enumerated maximum matching
// with its repaired cover, the averaged matching of pairs, and the scaled-down
// minimum edge cover.
inline std::vector<WeightPair> generate_weight_pairs(const Graph & h, const Caps & caps = {}, std::size_t limit = 64)
{
    std::vector<WeightPair> out;
    Rational c = frac_vertex_cover_number(h, caps).value;
    auto ms = all_max_matchings(h, caps, limit);
    for (auto & m : ms)
        out.push_back(to_weight_pair(h, m, matching_to_cover(h, m, caps)));
    for (std::size_t i = 0; i + 1 < ms.size() && i < 8; ++i) {
        EdgeWeightVector avg;
        for (auto & e : h.edges)
            avg.weights[e] = (ms[i].at(e) + ms[ms.size() - 1 - i].at(e)) / 2;
        out.push_back(to_weight_pair(h, avg, matching_to_cover(h, avg, caps)));
    }
    auto ec = min_frac_edge_cover(h, caps).witness;
    out.push_back(to_weight_pair(h, cover_to_matching(h, ec, caps), ec));
    for (auto & p : out)
        validate_weight_pair(h, p, c);
    return out;
}

enum class KernelStyle { uniform_signed, uniform_positive, spike, sparse, lipschitz };

inline HolderInstance random_instance(const Graph & h, int r, std::mt19937_64 & rng, KernelStyle style,
                                      bool random_boxes = true)
{
    HolderInstance in;
    in.h = h;
    in.r = r;
    std::uniform_real_distribution<double> U(0, 1);
    for (int v = 0; v < h.v(); ++v) {
        Box b;
        if (random_boxes) {
            double a = U(rng), c = U(rng);
            b.lo = std::min(a, c);
            b.hi = std::max(a, c);
            if (b.hi - b.lo < 0.05) {
                b.lo = std::max(0.0, b.lo - 0.05);
                b.hi = std::min(1.0, b.lo + 0.1);
            }
        }
        in.boxes.push_back(b);
    }
    for (int e = 0; e < h.e(); ++e) {
        StepKernel k;
        k.r = r;
        k.vals.resize(static_cast<std::size_t>(r) * r);
        double fx = U(rng) * 3, fy = U(rng) * 3, ph = U(rng) * 6;
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < r; ++j) {
                double x;
                switch (style) {
                case KernelStyle::uniform_signed: x = 2 * U(rng) - 1; break;
                case KernelStyle::uniform_positive: x = U(rng); break;
                case KernelStyle::spike: x = 0.01 * U(rng); break;
                case KernelStyle::sparse: x = U(rng) < 0.2 ? U(rng) : 0; break;
                default: x = std::sin(fx * (i + 0.5) / r + fy * (j + 0.5) / r + ph); break;
                }
                k.at(i, j) = x;
            }
        if (style == KernelStyle::spike) {
            std::uniform_int_distribution<int> cell(0, r - 1);
            k.at(cell(rng), cell(rng)) = 10 + 90 * U(rng);
        }
        in.kernels.push_back(std::move(k));
    }
    return in;
}

struct SimpleBound {
    double hom_abs_u = 0;
    double bound = 0;
    double margin = 0;
    bool pass = false;
};

// Hom(H,|U|) <= ((2+eps)p)^{v-2c} E(|U|)^c with U = W - p.
inline SimpleBound simple_bound_check(const Graph & h, const BlockGraphon & W, double p, double eps,
                                      const Caps & caps = {})
{
    validate_graphon(W);
    if (!(eps > 0 && eps <= 1))
        throw ConfigError("simple_bound_check: need 0 < eps <= 1");
    for (int i = 0; i < W.k(); ++i) {
        double row = 0;
        for (int j = 0; j < W.k(); ++j)
            row += W.sizes[j] * W.values[i][j];
        if (row < (1 - eps) * p - 1e-15 || row > (1 + eps) * p + 1e-15)
            throw ConfigError("simple_bound_check: row " + std::to_string(i) + " integrates to " +
                              std::to_string(row) + ", outside [(1-eps)p, (1+eps)p]");
    }
    BlockGraphon absU = W;
    double mean = 0;
    for (int i = 0; i < W.k(); ++i)
        for (int j = 0; j < W.k(); ++j) {
            absU.values[i][j] = std::fabs(W.values[i][j] - p);
            mean += W.sizes[i] * W.sizes[j] * absU.values[i][j];
        }
    double c = to_double(frac_vertex_cover_number(h, caps).value);
    SimpleBound s;
    s.hom_abs_u = hom_density(h, absU, caps.block_terms);
    s.bound = std::pow((2 + eps) * p, h.v() - 2 * c) * std::pow(mean, c);
    s.margin = s.bound - s.hom_abs_u;
    s.pass = s.margin >= -1e-9 * std::max(s.bound, 1e-300);
    return s;
}

// Cell averages of a block graphon on a uniform r-grid; row integrals are preserved.
inline BlockGraphon discretize(const BlockGraphon & W, int r)
{
    std::vector<double> cuts{0};
    for (double m : W.sizes)
        cuts.push_back(cuts.back() + m);
    cuts.back() = 1;
    std::vector<std::vector<double>> overlap(r, std::vector<double>(W.k(), 0));
    for (int c = 0; c < r; ++c) {
        double lo = static_cast<double>(c) / r, hi = static_cast<double>(c + 1) / r;
        for (int b = 0; b < W.k(); ++b)
            overlap[c][b] = std::max(0.0, std::min(hi, cuts[b + 1]) - std::max(lo, cuts[b])) * r;
    }
    BlockGraphon G;
    G.sizes.assign(r, 1.0 / r);
    G.values.assign(r, std::vector<double>(r, 0));
    for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d) {
            double s = 0;
            for (int a = 0; a < W.k(); ++a)
                for (int b = 0; b < W.k(); ++b)
                    s += overlap[c][a] * overlap[d][b] * W.values[a][b];
            G.values[c][d] = s;
        }
    for (int c = 0; c < r; ++c)
        for (int d = c + 1; d < r; ++d)
            G.values[d][c] = G.values[c][d];
    return G;
}

}
