#pragma once

#include "regtail/common.hpp"
#include "regtail/entropy.hpp"
#include "regtail/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace regtail {

// Block kernel: sizes m(S_i) of consecutive intervals and a symmetric value matrix.
// Used both for graphons (values in [0,1]) and signed kernels such as W - p.
struct BlockGraphon {
    std::vector<double> sizes;
    std::vector<std::vector<double>> values;
    std::vector<std::string> names;

    int k() const { return static_cast<int>(sizes.size()); }

    std::string name(int i) const { return i < static_cast<int>(names.size()) ? names[i] : std::to_string(i + 1); }
};

inline void validate_kernel(const BlockGraphon & W)
{
    int k = W.k();
    if (k == 0)
        throw ConfigError("graphon has no blocks");
    if (static_cast<int>(W.values.size()) != k)
        throw ConfigError("graphon value matrix has wrong shape");
    double s = 0;
    for (double m : W.sizes) {
        if (!(m > 0))
            throw ConfigError("graphon block sizes must be positive");
        s += m;
    }
    if (std::fabs(s - 1) > 1e-12)
        throw ConfigError("graphon block sizes sum to " + std::to_string(s) + ", not 1");
    for (int i = 0; i < k; ++i) {
        if (static_cast<int>(W.values[i].size()) != k)
            throw ConfigError("graphon value matrix has wrong shape");
        for (int j = 0; j < k; ++j)
            if (W.values[i][j] != W.values[j][i])
                throw ConfigError("graphon value matrix is not symmetric");
    }
}

inline void validate_graphon(const BlockGraphon & W)
{
    validate_kernel(W);
    for (auto & row : W.values)
        for (double x : row)
            if (!(x >= 0 && x <= 1))
                throw ConfigError("graphon value outside [0,1]");
}

inline BlockGraphon constant_graphon(double p)
{
    return BlockGraphon{{1.0}, {{p}}, {}};
}

// W + s entrywise (a kernel, not necessarily a graphon)
inline BlockGraphon shifted(const BlockGraphon & W, double s)
{
    BlockGraphon r = W;
    for (auto & row : r.values)
        for (double & x : row)
            x += s;
    return r;
}

inline double ip_total(const BlockGraphon & W, double p)
{
    double s = 0;
    for (int i = 0; i < W.k(); ++i)
        for (int j = 0; j < W.k(); ++j)
            s += W.sizes[i] * W.sizes[j] * ip_scalar(W.values[i][j], p);
    return s;
}

inline double regularity_residual(const BlockGraphon & W, double p)
{
    double worst = 0;
    for (int i = 0; i < W.k(); ++i) {
        double row = 0;
        for (int j = 0; j < W.k(); ++j)
            row += W.sizes[j] * W.values[i][j];
        worst = std::max(worst, std::fabs(row - p));
    }
    return worst;
}

// B maps vertex index of K (position in K.vertices) to a block index.
using KBlock = std::vector<int>;

inline double hom_block(const Graph & K, const BlockGraphon & W, const KBlock & B)
{
    double r = 1;
    for (int i = 0; i < K.v(); ++i)
        r *= W.sizes[B[i]];
    for (auto & [a, b] : K.index_edges())
        r *= W.values[B[a]][B[b]];
    return r;
}

inline void check_block_cap(const Graph & K, const BlockGraphon & W, long long cap)
{
    double terms = std::pow(static_cast<double>(W.k()), K.v());
    if (terms > static_cast<double>(cap))
        throw CapExceeded("K-block enumeration refused: k^v = " + std::to_string(static_cast<long long>(terms)) +
                          " exceeds cap " + std::to_string(cap));
}

// Calls fn(B, Hom_B) for every assignment, last vertex varying fastest.
inline void for_each_kblock(const Graph & K, const BlockGraphon & W,
                            const std::function<void(const KBlock &, double)> & fn, long long cap = Caps{}.block_terms)
{
    check_block_cap(K, W, cap);
    int v = K.v(), k = W.k();
    std::vector<std::vector<int>> back(v);
    for (auto & [a, b] : K.index_edges())
        back[std::max(a, b)].push_back(std::min(a, b));
    KBlock B(v, 0);
    std::function<void(int, double)> rec = [&](int i, double acc) {
        if (i == v) {
            fn(B, acc);
            return;
        }
        for (int b = 0; b < k; ++b) {
            double x = acc * W.sizes[b];
            for (int j : back[i])
                x *= W.values[b][B[j]];
            B[i] = b;
            rec(i + 1, x);
        }
    };
    rec(0, 1.0);
}

inline double hom_density(const Graph & K, const BlockGraphon & W, long long cap = Caps{}.block_terms)
{
    if (K.v() == 0)
        return 1;
    double s = 0;
    for_each_kblock(K, W, [&](const KBlock &, double h) { s += h; }, cap);
    return s;
}

struct W0Parts {
    double mA, mB, mC, mD;
};

// Hub A of size z p^{1+g}, clique part B of size sqrt(w) p^{1+g/2}, C the rest of
// [0,p], D = [p,1]. D-row entries solved from p-regularity.
inline BlockGraphon build_w0(const Rational & g, double z, double w, double p)
{
    if (!(g > 0))
        throw ConfigError("build_w0: gamma must be positive");
    if (!(z >= 0 && w >= 0))
        throw ConfigError("build_w0: z, w must be nonnegative");
    if (!(p > 0 && p < 1))
        throw ConfigError("build_w0: need 0 < p < 1");
    double gd = to_double(g);
    double mA = z * std::pow(p, 1 + gd);
    double mB = std::sqrt(w) * std::pow(p, 1 + gd / 2);
    double mC = p - mA - mB;
    double mD = 1 - p;
    if (mC < -1e-15 * p)
        throw Infeasible("build_w0: hub and clique blocks exceed p (m_A + m_B = " + std::to_string(mA + mB) + ")");
    mC = std::max(mC, 0.0);
    double wBD = (p - mA - mB - mC * p) / mD;
    double wCD = (p - mA - mB * p - mC * p) / mD;
    double wDD = (p - mB * wBD - mC * wCD) / mD;
    auto check = [&](const char * name, double x, bool used) {
        if (used && !(x >= 0 && x <= 1))
            throw Infeasible(std::string("build_w0: solved entry ") + name + " = " + std::to_string(x) +
                             " outside [0,1]");
    };
    check("w_BD", wBD, mB > 0);
    check("w_CD", wCD, mC > 0);
    check("w_DD", wDD, true);
    //            A    B    C    D
    double full[4][4] = {{1, 1, 1, 0}, {1, 1, p, wBD}, {1, p, p, wCD}, {0, wBD, wCD, wDD}};
    double sz[4] = {mA, mB, mC, mD};
    const char * nm[4] = {"A", "B", "C", "D"};
    std::vector<int> keep;
    for (int i = 0; i < 4; ++i)
        if (sz[i] > 0)
            keep.push_back(i);
    BlockGraphon W;
    for (int i : keep) {
        W.sizes.push_back(sz[i]);
        W.names.push_back(nm[i]);
        std::vector<double> row;
        for (int j : keep)
            row.push_back(full[i][j]);
        W.values.push_back(row);
    }
    double res = regularity_residual(W, p);
    if (res > 1e-12)
        throw std::logic_error("build_w0: regularity check failed, residual " + std::to_string(res));
    return W;
}

inline double w1_a(double d1, double p)
{
    double L = std::log(1 / p);
    return d1 * p * p * std::pow(L, -1.0 / 3) * std::cbrt(std::log(L));
}

inline double w1_b(double d2, double p)
{
    double L = std::log(1 / p);
    return d2 * p * std::pow(L, 2.0 / 3) * std::pow(std::log(L), -2.0 / 3);
}

// Hub of size a(p) joined to all of [0,p], mid block [a,p] with density b(p), rest solved.
inline BlockGraphon build_w1(double d1, double d2, double p)
{
    if (!(d1 > 0 && d2 > 0))
        throw ConfigError("build_w1: d1, d2 must be positive");
    if (!(p > 0 && p < std::exp(-1.0)))
        throw ConfigError("build_w1: need 0 < p < 1/e");
    double a = w1_a(d1, p), b = w1_b(d2, p);
    if (!(a < p))
        throw Infeasible("build_w1: hub size a(p) = " + std::to_string(a) + " is not below p");
    if (!(b < 1))
        throw Infeasible("build_w1: mid density b(p) = " + std::to_string(b) + " is not below 1");
    double mM = p - a, mR = 1 - p;
    double wMR = (p - a - mM * b) / mR;
    double wRR = (p - mM * wMR) / mR;
    if (!(wMR >= 0 && wMR <= 1))
        throw Infeasible("build_w1: solved entry w_MR = " + std::to_string(wMR) + " outside [0,1]");
    if (!(wRR >= 0 && wRR <= 1))
        throw Infeasible("build_w1: solved entry w_RR = " + std::to_string(wRR) + " outside [0,1]");
    BlockGraphon W;
    W.sizes = {a, mM, mR};
    W.names = {"hub", "mid", "rest"};
    W.values = {{1, 1, 0}, {1, b, wMR}, {0, wMR, wRR}};
    double res = regularity_residual(W, p);
    if (res > 1e-12)
        throw std::logic_error("build_w1: regularity check failed, residual " + std::to_string(res));
    return W;
}

struct Thresholds {
    double regularity_tol = 1e-12;
    double negligible_fraction = 0.01;
    double importance_cutoff = 0.5;
    double small_ratio = 0.1;
    double min_excess = 0.05;
    double bounded_constant = 1e3;
    double size_slack = 0.1;
    double equal_tol = 1e-12;
};

struct ConditionResult {
    int number = 0;
    std::string name;
    std::string status;
    std::map<std::string, double> ratios;
    std::map<std::string, double> thresholds;
    std::string detail;
};

struct BlockClass {
    int i = 0;
    int j = 0;
    std::string cls;
    double ratio = 0;
};

struct ConditionReport {
    std::vector<ConditionResult> conditions;
    std::vector<BlockClass> blocks;

    const ConditionResult & at(int number) const { return conditions.at(number - 1); }
    std::string cls(int i, int j) const
    {
        for (auto & b : blocks)
            if (b.i == i && b.j == j)
                return b.cls;
        return "";
    }
};

inline double logloglog_inv(double p)
{
    double L = std::log(1 / p);
    if (!(L > 1))
        return std::numeric_limits<double>::quiet_NaN();
    double LL = std::log(L);
    if (!(LL > 1))
        return std::numeric_limits<double>::quiet_NaN();
    return std::log(LL);
}

inline ConditionReport check_conditions(const BlockGraphon & W, const Graph & K, double n, double p,
                                        const Thresholds & th = {}, long long cap = Caps{}.block_terms)
{
    validate_graphon(W);
    if (K.empty())
        throw ConfigError("check_conditions: pattern has no edges");
    ConditionReport rep;
    int k = W.k(), e = K.e();
    double pe = std::pow(p, e);
    double Ip = ip_total(W, p);
    double hom = hom_density(K, W, cap);
    double big = 1 / th.small_ratio;
    auto status = [](bool ok) { return std::string(ok ? "pass" : "fail"); };
    auto add = [&](int num, const std::string & name) -> ConditionResult & {
        rep.conditions.push_back({});
        auto & c = rep.conditions.back();
        c.number = num;
        c.name = name;
        return c;
    };
    double lll = logloglog_inv(p);
    bool classified = !std::isnan(lll);
    auto near_p = [&](double x) { return std::fabs(x - p) <= th.equal_tol * p; };
    // block classification per the dichotomy
    std::vector<std::vector<std::string>> cls(k, std::vector<std::string>(k, "unimportant"));
    std::vector<std::vector<double>> R(k, std::vector<double>(k, std::numeric_limits<double>::quiet_NaN()));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            if (classified)
                R[i][j] = W.sizes[i] * W.sizes[j] * W.values[i][j] * lll / Ip;
            if (!classified)
                cls[i][j] = "unknown";
            else if (i < k - 1 && j < k - 1 && !near_p(W.values[i][j]) && R[i][j] <= th.importance_cutoff)
                cls[i][j] = W.values[i][j] >= 1 ? "very important" : "somewhat important";
            rep.blocks.push_back({i, j, cls[i][j], R[i][j]});
        }

    {
        auto & c = add(1, "Regularity");
        double r = regularity_residual(W, p);
        c.ratios["residual"] = r;
        c.thresholds["tolerance"] = th.regularity_tol;
        c.status = status(r <= th.regularity_tol);
    }
    {
        auto & c = add(2, "One Block Dominates in Size");
        double r = W.sizes[k - 1] / (1 - p);
        c.ratios["m_k/(1-p)"] = r;
        c.thresholds["min"] = 1 - 1e-12;
        c.status = status(r >= 1 - 1e-12);
    }
    {
        auto & c = add(3, "Many Copies of K");
        double r = hom / pe;
        c.ratios["Hom/p^e"] = r;
        c.thresholds["min"] = 1 + th.min_excess;
        c.status = status(r >= 1 + th.min_excess);
    }
    {
        auto & c = add(4, "Bounded Entropy");
        double lo = Ip * n / std::log(n);
        double hi = Ip / (std::pow(p, 2 * e) * n);
        c.ratios["I_p n/log n"] = lo;
        c.ratios["I_p/(p^{2e} n)"] = hi;
        c.thresholds["lower ratio min"] = big;
        c.thresholds["upper ratio max"] = th.small_ratio;
        c.status = status(lo >= big && hi <= th.small_ratio);
    }
    {
        auto & c = add(5, "Blocks Are Not Too Small");
        double r = *std::min_element(W.sizes.begin(), W.sizes.end()) * n;
        c.ratios["min m n"] = r;
        c.thresholds["min"] = big;
        c.status = status(r >= big);
    }
    {
        auto & c = add(6, "Dichotomy on Small Blocks");
        c.thresholds["importance cutoff"] = th.importance_cutoff;
        if (!classified) {
            c.status = "indeterminate";
            c.detail = "log log log(1/p) undefined or nonpositive (needs p < exp(-e))";
        }
        else {
            bool ok = true;
            double worst = 0;
            for (int i = 0; i + 1 < k; ++i)
                for (int j = 0; j + 1 < k; ++j) {
                    double x = W.values[i][j];
                    if (x < p * (1 - th.equal_tol))
                        ok = false;
                    if (!near_p(x)) {
                        worst = std::max(worst, R[i][j]);
                        if (R[i][j] > th.importance_cutoff)
                            ok = false;
                    }
                }
            c.ratios["max importance ratio"] = worst;
            c.status = status(ok);
        }
    }
    // non-negligible K-blocks drive conditions 7 and 8
    auto iedges = K.index_edges();
    int nonneg = 0, matching_viol = 0;
    double worst_size = std::numeric_limits<double>::infinity(), worst_dev = 0;
    bool unimportant_hit = false;
    for_each_kblock(
        K, W,
        [&](const KBlock & B, double h) {
            if (h < th.negligible_fraction * pe)
                return;
            ++nonneg;
            std::vector<int> used(K.v(), 0);
            bool clash = false;
            for (auto & [a, b] : iedges) {
                const std::string & cl = cls[B[a]][B[b]];
                if (cl == "somewhat important") {
                    if (used[a] || used[b])
                        clash = true;
                    used[a] = used[b] = 1;
                }
                else if (cl == "unimportant") {
                    int i = B[a], j = B[b];
                    unimportant_hit = true;
                    worst_size = std::min(worst_size, W.sizes[i] * W.sizes[j] * p / Ip);
                    worst_dev = std::max(worst_dev, std::fabs(W.values[i][j] - p) / p);
                }
            }
            matching_viol += clash;
        },
        cap);
    {
        auto & c = add(7, "Somewhat Important Blocks");
        c.ratios["non-negligible K-blocks"] = nonneg;
        c.ratios["matching violations"] = matching_viol;
        c.thresholds["negligible fraction"] = th.negligible_fraction;
        if (!classified) {
            c.status = "indeterminate";
            c.detail = "block importance unavailable";
        }
        else
            c.status = status(matching_viol == 0);
    }
    {
        auto & c = add(8, "Unimportant Blocks are Large");
        c.thresholds["size ratio min"] = 1 - th.size_slack;
        c.thresholds["relative deviation max"] = th.small_ratio;
        if (!classified) {
            c.status = "indeterminate";
            c.detail = "block importance unavailable";
        }
        else if (!unimportant_hit) {
            c.status = "pass";
            c.detail = "no non-negligible K-block uses an unimportant block";
        }
        else {
            c.ratios["min m_i m_j p / I_p"] = worst_size;
            c.ratios["max |w_ij - p|/p"] = worst_dev;
            c.status = status(worst_size >= 1 - th.size_slack && worst_dev <= th.small_ratio);
        }
    }
    {
        auto & c = add(9, "High Degrees within Important Blocks");
        c.thresholds["min"] = big;
        if (!classified) {
            c.status = "indeterminate";
            c.detail = "block importance unavailable";
        }
        else {
            double worst = std::numeric_limits<double>::infinity();
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j)
                    if (cls[i][j] != "unimportant")
                        worst = std::min(worst, W.values[i][j] * W.sizes[i] * n / std::log(n));
            if (std::isinf(worst)) {
                c.status = "pass";
                c.detail = "no important blocks";
            }
            else {
                c.ratios["min w_ij m_i n/log n"] = worst;
                c.status = status(worst >= big);
            }
        }
    }
    {
        auto & c = add(10, "Not Too Many Copies of K");
        double r = hom_density(K, shifted(W, p), cap) / pe;
        c.ratios["Hom(K,W+p)/p^e"] = r;
        c.thresholds["max"] = th.bounded_constant;
        c.status = status(r <= th.bounded_constant);
    }
    return rep;
}

struct ExpansionTerm {
    std::uint64_t mask = 0;
    Graph h;
    double hom_u = 0;
    double term = 0;
};

struct ExpansionTable {
    std::vector<ExpansionTerm> terms;
    double sum = 0;
    double hom_k = 0;
    double residual = 0;
    bool ok = false;
};

// Hom(K,W) = sum over H of p^{e(K)-e(H)} Hom(H, W - p)
inline ExpansionTable subgraph_expansion(const Graph & K, const BlockGraphon & W, double p, const Caps & caps = {})
{
    ExpansionTable t;
    BlockGraphon U = shifted(W, -p);
    for_each_edge_subgraph(
        K,
        [&](std::uint64_t m, const Graph & h) {
            ExpansionTerm x;
            x.mask = m;
            x.h = h;
            x.hom_u = hom_density(h, U, caps.block_terms);
            x.term = std::pow(p, K.e() - h.e()) * x.hom_u;
            t.terms.push_back(x);
        },
        caps.subgraph_edges);
    for (auto & x : t.terms)
        t.sum += x.term;
    t.hom_k = hom_density(K, W, caps.block_terms);
    t.residual = std::fabs(t.sum - t.hom_k) / std::max(std::fabs(t.hom_k), std::numeric_limits<double>::min());
    t.ok = t.residual <= 1e-9;
    return t;
}

}
