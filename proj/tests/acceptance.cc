#include "regtail/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>

using namespace regtail;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string & what)
    {
        if (!ok) {
            pass = false;
            detail << " [fail: " << what << "]";
        }
    }
};

int failures = 0;

void criterion(int id, const char * name, double budget_s, const std::function<void(Outcome &)> & fn)
{
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
        fn(o);
    } catch (const std::exception & e) {
        o.pass = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0 && secs > budget_s) {
        o.pass = false;
        o.detail << " [fail: runtime " << secs << " s over " << budget_s << " s]";
    }
    failures += !o.pass;
    std::printf("criterion %d %s %s (%.2f s)%s\n", id, o.pass ? "PASS" : "FAIL", name, secs, o.detail.str().c_str());
    std::fflush(stdout);
}

std::set<std::string> shapes(const std::vector<Graph> & gs)
{
    std::set<std::string> s;
    for (auto & g : gs)
        s.insert(shape_name(g));
    return s;
}

std::set<std::string> edge_labels(const Graph & g, const std::vector<Edge> & es)
{
    std::set<std::string> s;
    for (auto & e : es)
        s.insert(g.edge_label(e));
    return s;
}

// dense 2-D grid with repeated zoom around the best feasible point
double rho_grid(const HalfExpPolynomial & P, double delta)
{
    double target = 1 + delta;
    double z0 = 0, z1 = 4 * std::sqrt(delta) + 4, w0 = 0, w1 = 2 * z1;
    double best = 1e300, bz = 0, bw = 0;
    const int N = 240;
    for (int round = 0; round < 40; ++round) {
        double dz = (z1 - z0) / N, dw = (w1 - w0) / N;
        for (int i = 0; i <= N; ++i)
            for (int j = 0; j <= N; ++j) {
                double z = z0 + i * dz, w = w0 + j * dw;
                if (P.eval(z, w) >= target && z + w / 2 < best) {
                    best = z + w / 2;
                    bz = z;
                    bw = w;
                }
            }
        z0 = std::max(0.0, bz - 3 * dz);
        z1 = bz + 3 * dz;
        w0 = std::max(0.0, bw - 3 * dw);
        w1 = bw + 3 * dw;
    }
    return best;
}

bool approaching(const std::vector<double> & xs, double target)
{
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(std::fabs(xs[i] - target) < std::fabs(xs[i - 1] - target)))
            return false;
    return true;
}

std::string list(const std::vector<double> & xs)
{
    std::ostringstream s;
    for (std::size_t i = 0; i < xs.size(); ++i)
        s << (i ? "," : "") << xs[i];
    return s.str();
}

void exact_invariants(Outcome & o)
{
    Graph k23 = make_named("complete-bipartite:2,3");
    Graph bf = make_named("butterfly");
    Graph k24 = make_named("complete-bipartite:2,4");
    Graph k0 = make_named("k0");
    o.require(frac_vertex_cover_number(k23).value == Rational(2), "c(K23)");
    o.require(frac_vertex_cover_number(bf).value == Rational(5, 2), "c(butterfly)");
    o.require(frac_vertex_cover_number(k24).value == Rational(2), "c(K24)");
    o.require(frac_vertex_cover_number(k0).value == Rational(3), "c(K0)");
    o.require(gamma(k23).value == Rational(1, 2), "gamma(K23)");
    o.require(gamma(k0).value == Rational(1), "gamma(K0)");
    o.require(shapes(contributing_subgraphs(k0)) == std::set<std::string>{"empty", "K24", "K0"}, "contributing(K0)");
    o.require(shapes(contributing_subgraphs(k23)) == std::set<std::string>{"empty", "K23"}, "contributing(K23)");
    o.require(edge_labels(k0, bad_edges(k0)) == std::set<std::string>{"w1-w2"}, "bad_edges(K0)");
    o.require(bad_edges(bf).empty(), "bad_edges(butterfly)");
    o.require(p_polynomial(k23).str() == "1 + z^2", "P(K23)");
    o.detail << " P(K23)=" << p_polynomial(k23).str();
}

void duality_sweep(Outcome & o)
{
    std::set<std::vector<Edge>> seen;
    long long graphs = 0, bad = 0;
    for (auto f : {"complete:5", "complete-bipartite:3,3", "k0"}) {
        Graph base = make_named(f);
        for_each_edge_subgraph(base, [&](std::uint64_t, const Graph & h) {
            if (!seen.insert(h.edges).second)
                return;
            ++graphs;
            Rational c = frac_vertex_cover_number(h).value;
            Rational m = max_frac_matching(h).value;
            Rational ec = min_frac_edge_cover(h).value;
            if (m != c || ec != Rational(h.v()) - c)
                ++bad;
        });
    }
    o.detail << " graphs=" << graphs << " mismatches=" << bad;
    o.require(bad == 0, "duality or edge-cover identity");
}

void no_bad_edges(Outcome & o)
{
    long long checked = 0, exceptions = 0;
    for_each_edge_subgraph(make_named("complete:5"), [&](std::uint64_t, const Graph & k) {
        if (k.empty() || is_forest(k))
            return;
        ++checked;
        for (auto & [h, c] : analyze(k).contributing)
            if (!h.empty() && !bad_edges(h).empty())
                ++exceptions;
    });
    Caps caps;
    caps.matching_edges = 16;
    Graph k6 = make_named("complete:6");
    auto minus = [&](std::vector<Edge> drop) {
        auto ed = k6.edges;
        for (auto & e : drop)
            ed.erase(std::find(ed.begin(), ed.end(), e));
        return make_graph(ed);
    };
    std::vector<Graph> corpus{k6,
                              minus({make_edge(0, 1)}),
                              minus({make_edge(0, 1), make_edge(2, 3)}),
                              minus({make_edge(0, 1), make_edge(2, 3), make_edge(4, 5)}),
                              make_named("complete-bipartite:3,3"),
                              make_named("complete-bipartite:3,4"),
                              make_named("complete-bipartite:3,5"),
                              make_named("complete-bipartite:4,4"),
                              make_named("complete:5"),
                              make_named("k0"),
                              make_named("butterfly"),
                              make_named("complete-bipartite:2,3")};
    int above = 0;
    for (auto & k : corpus) {
        auto inv = analyze(k, caps);
        if (!(inv.gamma.value > Rational(2)))
            continue;
        ++above;
        for (auto & [h, c] : inv.contributing)
            if (!h.empty() && !bad_edges(h, caps).empty())
                ++exceptions;
    }
    o.detail << " small_nonforest=" << checked << " gamma_above_2=" << above << " exceptions=" << exceptions;
    o.require(above > 0, "corpus has graphs with gamma > 2");
    o.require(exceptions == 0, "bad edge in a contributing subgraph");
}

void rho_solver(Outcome & o)
{
    Graph k23 = make_named("complete-bipartite:2,3");
    double worst = 0;
    for (double d : {0.25, 1.0, 4.0})
        worst = std::max(worst, std::fabs(rho(k23, d).value - std::sqrt(d)));
    o.require(worst <= 1e-8, "rho(K23) vs sqrt(delta)");
    double worst_grid = 0;
    for (auto f : {"k0", "complete:5"}) {
        auto P = p_polynomial(make_named(f));
        for (double d : {0.25, 1.0, 4.0})
            worst_grid = std::max(worst_grid, std::fabs(rho(P, d).value - rho_grid(P, d)));
    }
    o.require(worst_grid <= 1e-5, "rho vs grid oracle");
    o.detail << " K23_err=" << worst << " grid_err=" << worst_grid;
}

void cycle_constants(Outcome & o)
{
    o.require(cycle_constant({3}, 1.0) == 1.0, "c({3},1) == 1");
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(3, 9), cnt(1, 4);
    std::uniform_real_distribution<double> dd(0.01, 20.0);
    double worst = 0;
    for (int t = 0; t < 50; ++t) {
        std::vector<int> ls(cnt(rng));
        for (int & l : ls)
            l = len(rng);
        double d = dd(rng);
        worst = std::max(worst, std::fabs(cycle_product(ls, cycle_constant(ls, d)) - (1 + d)));
    }
    o.require(worst < 1e-12, "defining-product residual");
    bool mono = true;
    for (auto ls : {std::vector<int>{3}, std::vector<int>{3, 4}, std::vector<int>{5, 5, 7}}) {
        double prev = 0;
        for (double d = 0.05; d < 10; d += 0.05) {
            double c = cycle_constant(ls, d);
            mono = mono && c > prev;
            prev = c;
        }
    }
    o.require(mono, "monotone in delta");
    o.detail << " max_residual=" << worst;
}

void k0_optimization(Outcome & o)
{
    std::vector<double> rs;
    for (double p : {1e-3, 1e-5, 1e-8}) {
        double L = std::log(1 / p);
        double scale = std::cbrt(18.0) * std::pow(p, 3) * std::pow(L, 2.0 / 3) * std::cbrt(std::log(L));
        rs.push_back(k0_variational_min(1, p).value / scale);
    }
    o.detail << " ratios=" << list(rs);
    o.require(rs[1] >= 0.8 && rs[1] <= 1.2, "band at p=1e-5");
    o.require(approaching(rs, 1), "monotone approach to 1");
}

void construction(Outcome & o)
{
    Graph k23 = make_named("complete-bipartite:2,3");
    std::vector<double> homs, ips;
    for (double p : {1e-2, 1e-3, 1e-4})
        homs.push_back(hom_density(k23, build_w0(Rational(1, 2), 1, 0, p)) / std::pow(p, 6));
    for (double p : {1e-3, 1e-4, 1e-5, 1e-6}) {
        auto W = build_w0(Rational(1, 2), 1, 0, p);
        ips.push_back(ip_total(W, p) / (2 * std::pow(p, 2.5) * std::log(1 / p)));
    }
    o.detail << " hom/p^6=" << list(homs) << " ip_ratio=" << list(ips);
    o.require(std::fabs(homs.back() - 2) <= 0.1 * 2, "Hom/p^6 band at p=1e-4");
    o.require(approaching(homs, 2), "Hom/p^6 trend");
    o.require(std::fabs(ips.back() - 1) <= 0.15, "I_p band at p=1e-6");
    o.require(approaching(ips, 1), "I_p trend");
}

void holder_suite(Outcome & o)
{
    const KernelStyle styles[] = {KernelStyle::uniform_signed, KernelStyle::uniform_positive, KernelStyle::spike,
                                  KernelStyle::sparse, KernelStyle::lipschitz};
    long long checks = 0, violations = 0;
    for (auto f : {"path:3", "cycle:4", "cycle:5", "complete-bipartite:2,3", "butterfly", "k0"}) {
        Graph h = make_named(f);
        auto pairs = generate_weight_pairs(h);
        Rational c = frac_vertex_cover_number(h).value;
        for (auto & wp : pairs)
            validate_weight_pair(h, wp, c);
        for (std::uint64_t t = 0; t < 1000; ++t) {
            std::mt19937_64 rng = trial_rng(8, t);
            auto in = random_instance(h, 2 + static_cast<int>(t % 3), rng, styles[t % 5], t % 2 == 0);
            for (auto & wp : pairs) {
                ++checks;
                violations += !verify_instance(in, wp).pass;
            }
        }
    }
    double worst_eq = 0;
    int eq_cases = 0;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> U(0.1, 2);
    for (auto f : {"path:2", "path:4", "cycle:4", "butterfly", "k0", "cycle:6"}) {
        Graph h = make_named(f);
        for (auto & m : all_max_matchings(h, {}, 200)) {
            bool perfect = true;
            for (auto & [v, x] : vertex_sums(h, m))
                perfect = perfect && x == Rational(1);
            if (!perfect)
                continue;
            HolderInstance in;
            in.h = h;
            in.r = 2;
            for (int e = 0; e < h.e(); ++e)
                in.kernels.push_back(StepKernel{2, std::vector<double>(4, U(rng))});
            for (int v = 0; v < h.v(); ++v)
                in.boxes.push_back({0.1 * (v % 3), 0.5 + 0.1 * (v % 4)});
            auto v = verify_instance(in, to_weight_pair(h, m, m));
            worst_eq = std::max(worst_eq, std::fabs(v.margin) / v.rhs);
            ++eq_cases;
        }
    }
    o.detail << " checks=" << checks << " violations=" << violations << " equality_cases=" << eq_cases
             << " max_equality_gap=" << worst_eq;
    o.require(violations == 0, "Holder violations");
    o.require(eq_cases > 0 && worst_eq <= 1e-12, "perfect-matching equality");
}

void simulator(Outcome & o)
{
    const int n = 20, d = 4;
    std::vector<Graph> trees{make_named("path:4"), make_named("star:3"),
                             make_graph({{0, 1}, {1, 2}, {2, 3}, {1, 4}, {4, 5}})};
    std::vector<Graph> cycles;
    for (int k = 3; k <= 6; ++k)
        cycles.push_back(make_named("cycle:" + std::to_string(k)));
    long long degree_bad = 0, tree_bad = 0, oracle_bad = 0;
    for (std::uint64_t t = 0; t < 10000; ++t) {
        SimGraph g = sample_regular(n, d, 9, t);
        bool ok = g.symmetric_loopless();
        for (int v = 0; v < n; ++v)
            ok = ok && g.degree(v) == d;
        degree_bad += !ok;
        for (auto & T : trees)
            tree_bad += hom_count(T, g) != static_cast<Int128>(n * std::pow(d, T.e()));
        for (int k = 3; k <= 6; ++k)
            oracle_bad += hom_count(cycles[k - 3], g) != cycle_hom_oracle(k, g);
    }
    const int m = 30;
    const double p = 0.2;
    auto spec = make_pstar(constant_graphon(p), m, p);
    Graph c3 = make_named("cycle:3");
    std::vector<double> xs;
    for (std::uint64_t t = 0; t < 10000; ++t)
        xs.push_back(static_cast<double>(hom_count(c3, sample_pstar(spec, 77, t))));
    auto ms = mean_stat(xs);
    double expect = expected_hom_gnp(c3, m, p);
    double z = (ms.mean - expect) / ms.stderr_;
    o.detail << " degree_failures=" << degree_bad << " tree_failures=" << tree_bad << " oracle_failures=" << oracle_bad
             << " C3_mean=" << ms.mean << " exact=" << expect << " z=" << z;
    o.require(degree_bad == 0, "degree checks");
    o.require(tree_bad == 0, "forest invariance");
    o.require(oracle_bad == 0, "cycle oracle");
    o.require(std::fabs(z) < 3, "C3 Monte Carlo within 3 sigma");
}

void planted(Outcome & o)
{
    const int n = 2000;
    const double p = 0.05;
    Caps caps;
    caps.hom_host_vertices = n;
    Graph k23 = make_named("complete-bipartite:2,3");
    auto r = planted_comparison(k23, build_w0(Rational(1, 2), 1, 0, p), n, p, 200, 2024, caps);
    o.detail << " predicted=" << r.predicted_ratio << " injective_ratio=" << r.injective_ratio << " (+-"
             << r.injective_ratio_stderr << ") hom_ratio=" << r.hom_ratio << " relative_error=" << r.relative_error;
    o.require(r.relative_error <= 0.25, "within 25% of prediction");
}

}

int main()
{
    criterion(1, "exact invariants", 1, exact_invariants);
    criterion(2, "duality sweep", 60, duality_sweep);
    criterion(3, "no bad edges in contributing subgraphs", 0, no_bad_edges);
    criterion(4, "rho solver", 10, rho_solver);
    criterion(5, "cycle constant", 0, cycle_constants);
    criterion(6, "K0 optimization", 5, k0_optimization);
    criterion(7, "construction convergence", 0, construction);
    criterion(8, "Holder suite", 300, holder_suite);
    criterion(9, "simulator", 300, simulator);
    criterion(10, "planted comparison", 0, planted);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures ? 1 : 0;
}
