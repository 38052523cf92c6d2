#pragma once

#include "regtail/common.hpp"
#include "regtail/entropy.hpp"
#include "regtail/graph.hpp"
#include "regtail/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace regtail {

// Sum of coef * z^a * w^(b2/2); the w exponent is stored doubled.
struct HalfExpPolynomial {
    std::map<std::pair<int, int>, long long> terms;

    void add(int a, int b2, long long coef = 1) { terms[{a, b2}] += coef; }

    double eval(double z, double w) const
    {
        double s = 0;
        for (auto & [k, coef] : terms)
            s += coef * std::pow(z, k.first) * std::pow(w, 0.5 * k.second);
        return s;
    }

    long long constant_term() const
    {
        auto it = terms.find({0, 0});
        return it == terms.end() ? 0 : it->second;
    }

    bool is_constant() const
    {
        for (auto & [k, coef] : terms)
            if (k.first != 0 || k.second != 0)
                return false;
        return true;
    }

    bool has_z() const
    {
        for (auto & [k, coef] : terms)
            if (k.first > 0)
                return true;
        return false;
    }

    bool has_w() const
    {
        for (auto & [k, coef] : terms)
            if (k.second > 0)
                return true;
        return false;
    }

    // smallest a + b over nonconstant terms
    Rational min_nonconstant_degree() const
    {
        Rational best = -1;
        for (auto & [k, coef] : terms) {
            if (k.first == 0 && k.second == 0)
                continue;
            Rational d = Rational(k.first) + Rational(k.second, 2);
            if (best < 0 || d < best)
                best = d;
        }
        return best;
    }

    std::string str() const
    {
        std::vector<std::pair<std::pair<int, int>, long long>> v(terms.begin(), terms.end());
        std::stable_sort(v.begin(), v.end(), [](auto & x, auto & y) {
            int dx = 2 * x.first.first + x.first.second, dy = 2 * y.first.first + y.first.second;
            if (dx != dy)
                return dx < dy;
            return x.first.first > y.first.first;
        });
        std::string out;
        for (auto & [k, coef] : v) {
            std::vector<std::string> parts;
            if (coef != 1 || (k.first == 0 && k.second == 0))
                parts.push_back(std::to_string(coef));
            if (k.first == 1)
                parts.push_back("z");
            else if (k.first > 1)
                parts.push_back("z^" + std::to_string(k.first));
            if (k.second == 2)
                parts.push_back("w");
            else if (k.second > 0 && k.second % 2 == 0)
                parts.push_back("w^" + std::to_string(k.second / 2));
            else if (k.second % 2 == 1)
                parts.push_back("w^{" + std::to_string(k.second) + "/2}");
            std::string t;
            for (std::size_t i = 0; i < parts.size(); ++i)
                t += (i ? " " : "") + parts[i];
            out += (out.empty() ? "" : " + ") + t;
        }
        return out.empty() ? "0" : out;
    }
};

struct GammaResult {
    Rational value;
    Graph witness;
    bool forest = false;
};

struct ContributingSubgraph {
    Graph graph;
    Rational c;
};

struct TailInvariants {
    GammaResult gamma;
    std::vector<ContributingSubgraph> contributing;
};

// One pass over edge subsets computing gamma and the contributing subgraphs.
inline TailInvariants analyze(const Graph & k, const Caps & caps = {})
{
    if (k.empty())
        throw ConfigError("pattern graph has no edges");
    check_subgraph_cap(k, caps.subgraph_edges);
    bool forest = is_forest(k);
    std::uint64_t total = std::uint64_t{1} << k.e();
    Rational best = 0;
    bool have = false;
    std::uint64_t best_mask = 0;
    std::map<std::uint64_t, Rational> cover_of;
    for (std::uint64_t m = 1; m < total; ++m) {
        Graph h = subgraph_from_mask(k, m);
        int ev = h.e() - h.v();
        if (!forest && ev <= 0) {
            if (ev == 0 && (!have || best < 0)) {
                best = 0;
                have = true;
                best_mask = m;
            }
            continue;
        }
        Rational c = frac_vertex_cover_number(h, caps).value;
        cover_of[m] = c;
        Rational r = Rational(ev) / c;
        if (!have || r > best) {
            best = r;
            have = true;
            best_mask = m;
        }
    }
    TailInvariants out;
    out.gamma.value = best;
    out.gamma.forest = forest;
    Graph maximizer = subgraph_from_mask(k, best_mask);
    out.gamma.witness = forest ? maximizer : two_core(maximizer);
    out.contributing.push_back({Graph{}, Rational(0)});
    if (forest)
        return out;
    for (std::uint64_t m = 1; m < total; ++m) {
        Graph h = subgraph_from_mask(k, m);
        if (h.min_degree() < 2)
            continue;
        int ev = h.e() - h.v();
        Rational c;
        auto it = cover_of.find(m);
        c = it != cover_of.end() ? it->second : frac_vertex_cover_number(h, caps).value;
        if (Rational(ev) == c * best)
            out.contributing.push_back({h, c});
    }
    return out;
}

inline GammaResult gamma(const Graph & k, const Caps & caps = {})
{
    return analyze(k, caps).gamma;
}

inline std::vector<Graph> contributing_subgraphs(const Graph & k, const Caps & caps = {})
{
    std::vector<Graph> out;
    for (auto & c : analyze(k, caps).contributing)
        out.push_back(c.graph);
    return out;
}

inline HalfExpPolynomial p_polynomial(const TailInvariants & inv, const Caps & caps = {})
{
    HalfExpPolynomial poly;
    for (auto & [h, c] : inv.contributing) {
        if (h.empty()) {
            poly.add(0, 0);
            continue;
        }
        for (auto & a : valid_subsets(h, caps)) {
            Rational rest = c - Rational(static_cast<long long>(a.size()));
            poly.add(static_cast<int>(a.size()), static_cast<int>((rest * 2).numerator()));
        }
    }
    return poly;
}

inline HalfExpPolynomial p_polynomial(const Graph & k, const Caps & caps = {})
{
    return p_polynomial(analyze(k, caps), caps);
}

namespace detail {

// smallest x in [0, hi] with f(x) >= target, f increasing; hi must be feasible
template <typename F>
double bisect_increasing(F f, double target, double hi)
{
    double lo = 0;
    if (f(lo) >= target)
        return 0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (f(mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

template <typename F>
double golden_min(F f, double a, double b, double tol = 1e-13)
{
    const double g = (std::sqrt(5.0) - 1) / 2;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 300 && b - a > tol * (1 + std::fabs(a) + std::fabs(b)); ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        }
        else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    return fc <= fd ? c : d;
}

// Minimizes obj(t) = t + scale * s*(t) where s*(t) is the least feasible value of the
// other coordinate given t. Grid over t in [0, hi] then golden-section refinement.
template <typename Obj>
std::pair<double, double> line_search_min(Obj obj, double hi)
{
    std::vector<double> grid{0.0};
    const int geo = 400, lin = 400;
    for (int i = 0; i <= geo; ++i)
        grid.push_back(hi * std::pow(10.0, -12.0 + 12.0 * i / geo));
    for (int i = 1; i <= lin; ++i)
        grid.push_back(hi * i / lin);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    std::size_t bi = 0;
    double bv = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double v = obj(grid[i]);
        if (v < bv) {
            bv = v;
            bi = i;
        }
    }
    double a = grid[bi == 0 ? 0 : bi - 1], b = grid[std::min(bi + 1, grid.size() - 1)];
    double t = golden_min(obj, a, b);
    double vt = obj(t);
    if (vt < bv)
        return {t, vt};
    return {grid[bi], bv};
}

}

struct RhoResult {
    double value = std::numeric_limits<double>::infinity();
    double z = 0;
    double w = 0;
};

// min z + w/2 subject to P(z,w) >= 1 + delta, z, w >= 0
inline RhoResult rho(const HalfExpPolynomial & poly, double delta)
{
    if (!(delta > 0))
        throw ConfigError("rho: delta must be positive");
    RhoResult r;
    double target = 1 + delta;
    if (poly.is_constant())
        return poly.constant_term() >= target ? RhoResult{0, 0, 0} : r;
    double t = 1;
    while (poly.eval(t, t) < target)
        t *= 2;
    double zhi = 1.5 * t + 1e-12, whi = 3 * t + 1e-12;
    auto P = [&](double z, double w) { return poly.eval(z, w); };
    const double inf = std::numeric_limits<double>::infinity();
    // w-parametrized boundary
    if (poly.has_z()) {
        auto zstar = [&](double w) {
            if (P(0, w) >= target)
                return 0.0;
            if (P(zhi, w) < target)
                return inf;
            return detail::bisect_increasing([&](double z) { return P(z, w); }, target, zhi);
        };
        auto obj = [&](double w) { return zstar(w) + w / 2; };
        auto [w, v] = detail::line_search_min(obj, whi);
        if (v < r.value)
            r = {v, zstar(w), w};
    }
    // z-parametrized boundary
    if (poly.has_w()) {
        auto wstar = [&](double z) {
            if (P(z, 0) >= target)
                return 0.0;
            if (P(z, whi) < target)
                return inf;
            return detail::bisect_increasing([&](double w) { return P(z, w); }, target, whi);
        };
        auto obj = [&](double z) { return z + wstar(z) / 2; };
        auto [z, v] = detail::line_search_min(obj, zhi);
        if (v < r.value)
            r = {v, z, wstar(z)};
    }
    return r;
}

inline RhoResult rho(const Graph & k, double delta, const Caps & caps = {})
{
    return rho(p_polynomial(k, caps), delta);
}

inline double cycle_product(const std::vector<int> & lengths, double c)
{
    double fl = std::floor(c), fr = c - fl, prod = 1;
    for (int i : lengths)
        prod *= 1 + fl + std::pow(fr, i / 2.0);
    return prod;
}

// The c > 0 with prod_j (1 + floor(c) + {c}^{i_j/2}) = 1 + delta.
inline double cycle_constant(const std::vector<int> & lengths, double delta)
{
    if (lengths.empty())
        throw ConfigError("cycle_constant: empty length list");
    for (int i : lengths)
        if (i < 3)
            throw ConfigError("cycle_constant: cycle length must be >= 3");
    if (!(delta > 0))
        throw ConfigError("cycle_constant: delta must be positive");
    double target = 1 + delta;
    double lo = 0, hi = delta + 1;
    for (int it = 0; it < 300; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (cycle_product(lengths, mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    double c = std::fabs(cycle_product(lengths, lo) - target) < std::fabs(cycle_product(lengths, hi) - target) ? lo : hi;
    double r = std::round(c);
    if (r > 0 && cycle_product(lengths, r) == target)
        return r;
    return c;
}

struct K0Min {
    double value;
    double c1;
    double c2;
};

// min over c1^2 c2 >= delta of 2 p^3 log(1/p) c1 + p^2 I_p(p + p c2), with c2 = delta / c1^2
inline K0Min k0_variational_min(double delta, double p)
{
    if (!(p > 0 && p < std::exp(-1.0)))
        throw ConfigError("k0_variational_min: need 0 < p < 1/e");
    if (!(delta > 0))
        throw ConfigError("k0_variational_min: delta must be positive");
    double L = std::log(1 / p);
    double c1min = std::sqrt(delta * p / (1 - p));
    auto f = [&](double c1) {
        double c2 = delta / (c1 * c1);
        double x = std::min(1.0, p + p * c2);
        return 2 * p * p * p * L * c1 + p * p * ip_scalar(x, p);
    };
    double c1max = std::max(1e3, 100 * c1min);
    const int N = 4000;
    double best = std::numeric_limits<double>::infinity(), bc = c1min;
    std::vector<double> grid(N + 1);
    for (int i = 0; i <= N; ++i)
        grid[i] = c1min * std::pow(c1max / c1min, static_cast<double>(i) / N);
    int bi = 0;
    for (int i = 0; i <= N; ++i) {
        double v = f(grid[i]);
        if (v < best) {
            best = v;
            bi = i;
        }
    }
    double a = grid[std::max(0, bi - 1)], b = grid[std::min(N, bi + 1)];
    double c1 = detail::golden_min(f, a, b, 1e-15);
    if (f(c1) < best)
        bc = c1, best = f(c1);
    else
        bc = grid[bi];
    return {best, bc, delta / (bc * bc)};
}

struct RateReport {
    std::string classification;
    Rational gamma;
    bool forest = false;
    std::string constant_name;
    double constant = 0;
    std::string exponent;
    double rate = 0;
    bool order_only = false;
    double lower_rate = 0;
    std::string lower_constant_note;
    double window_lower = 0;
    bool in_window = false;
    std::string validity;
    std::string polynomial;
    std::vector<std::string> notes;
};

inline std::string p_power(const Rational & e)
{
    if (e.denominator() == 1)
        return e.numerator() == 1 ? "p" : "p^" + to_string(e);
    return "p^{" + to_string(e) + "}";
}

inline RateReport classify_and_rate(const Graph & k, double delta, double n, double p, const Caps & caps = {})
{
    if (!(n >= 3))
        throw ConfigError("classify_and_rate: n must be >= 3");
    if (!(p > 0 && p < 1))
        throw ConfigError("classify_and_rate: need 0 < p < 1");
    if (!(delta > 0))
        throw ConfigError("classify_and_rate: delta must be positive");
    RateReport r;
    double L = std::log(1 / p);
    if (k.empty() || is_forest(k)) {
        r.classification = "forest";
        r.forest = true;
        r.gamma = k.empty() ? Rational(0) : gamma(k, caps).value;
        r.rate = std::numeric_limits<double>::infinity();
        r.exponent = "none";
        r.validity = "all n, p";
        r.in_window = true;
        r.notes.push_back("trivial: zero probability, since a forest has the same number of homomorphisms into "
                          "every regular graph");
        return r;
    }
    Graph core = two_core(k);
    if (auto lengths = cycle_union_lengths(k)) {
        double c = cycle_constant(*lengths, delta);
        r.classification = "cycle-union";
        r.gamma = 0;
        r.constant_name = "cycle-constant";
        r.constant = c;
        r.exponent = "n^2 p^2 log(1/p)";
        r.rate = c / 2 * n * n * p * p * L;
        r.window_lower = std::pow(n, -1.0 / 3);
        r.in_window = p > r.window_lower;
        r.validity = "n^{-1/3} << p << 1";
        std::string ls;
        for (int i : *lengths)
            ls += (ls.empty() ? "" : ",") + std::to_string(i);
        r.notes.push_back("2-core is a disjoint union of cycles of lengths {" + ls + "}; rate = (c/2) n^2 p^2 log(1/p)");
        return r;
    }
    TailInvariants inv = analyze(k, caps);
    r.gamma = inv.gamma.value;
    double g = to_double(r.gamma);
    HalfExpPolynomial poly = p_polynomial(inv, caps);
    r.polynomial = poly.str();
    Rational two_e = Rational(2 * k.e() - 2) - r.gamma;
    r.window_lower = std::pow(std::log(n) / n, 1 / to_double(two_e));
    r.in_window = p > r.window_lower;
    r.validity = "(n^{-1} log n)^{1/(" + to_string(two_e) + ")} << p << 1";
    if (core.v() == 6 && core.e() == 9 && is_isomorphic(core, make_named("k0"))) {
        double LL = std::log(L);
        r.classification = "k0-special";
        r.constant_name = "k0-constant";
        r.constant = std::cbrt(18 * delta) / 2;
        r.exponent = "n^2 p^3 (log(1/p))^{2/3} (log log(1/p))^{1/3}";
        r.rate = LL > 0 ? r.constant * n * n * std::pow(p, 3) * std::pow(L, 2.0 / 3) * std::cbrt(LL)
                        : std::numeric_limits<double>::quiet_NaN();
        if (!(LL > 0))
            r.notes.push_back("log log(1/p) <= 0: formula needs p < 1/e");
        return r;
    }
    RhoResult rh = rho(poly, delta);
    r.constant_name = "rho";
    r.constant = rh.value;
    r.exponent = "n^2 " + p_power(Rational(2) + r.gamma) + " log(1/p)";
    r.rate = rh.value * n * n * std::pow(p, 2 + g) * L;
    bool any_bad = false;
    for (auto & [h, c] : inv.contributing)
        if (!h.empty() && !bad_edges(h, caps).empty())
            any_bad = true;
    if (!any_bad) {
        r.classification = "rho-exact";
        return r;
    }
    r.classification = "log-bracket";
    r.order_only = true;
    r.lower_rate = n * n * std::pow(p, 2 + g);
    r.lower_constant_note = "constant not determined; reported as 1 (order-only)";
    r.notes.push_back("some contributing subgraph has a bad edge; rate lies in [Theta(n^2 " +
                      p_power(Rational(2) + r.gamma) + "), rho n^2 " + p_power(Rational(2) + r.gamma) + " log(1/p)]");
    return r;
}

}
