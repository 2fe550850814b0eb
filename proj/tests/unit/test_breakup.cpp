#include "doctest.h"
#include "helpers.hpp"

#include "spinlab/breakup.hpp"
#include "spinlab/error.hpp"
#include "spinlab/gibbs.hpp"

#include <random>

using namespace spinlab;
using namespace helpers;

namespace {

// Even vertices take `even`; odd vertices alternate between two values by the
// parity of their first coordinate, so every vertex sees both.
Configuration stripes(const Lattice& g, int even, int odd_a, int odd_b) {
    Configuration f(static_cast<std::size_t>(g.size()));
    for (int v = 0; v < g.size(); ++v) {
        int x = g.coords(v)[0];
        f[static_cast<std::size_t>(v)] = g.is_even(v) ? even : ((x % 2 + 2) % 2 == 0 ? odd_a : odd_b);
    }
    return f;
}

Configuration ordered_hard_core(const Lattice& g) {
    Configuration f(static_cast<std::size_t>(g.size()));
    for (int v = 0; v < g.size(); ++v) f[static_cast<std::size_t>(v)] = g.is_even(v) ? 0 : 1;
    return f;
}

// Sphere of radius r around v in the lattice metric.
VertexSet ball(const Lattice& g, int v, int r) {
    VertexSet s = g.empty_set();
    s[static_cast<std::size_t>(v)] = 1;
    return plus(g, s, r);
}

std::vector<Configuration> random_admissible(const SpinSystem& sys, const Lattice& g, const Pattern& P0, int n,
                                             std::uint64_t seed) {
    McmcOptions opt;
    opt.sweeps = static_cast<std::int64_t>(n) * 3;
    opt.seed = seed;
    opt.thin = 3;
    opt.waiver = true;
    std::vector<Configuration> out;
    Philox rng(seed, 99);
    mcmc_sample(sys, g, P0, opt, [&](std::int64_t, const Configuration& f) {
        Configuration h = f;
        extend_outside(sys, g, h, P0, rng);
        out.push_back(std::move(h));
    });
    return out;
}

}  // namespace

TEST_SUITE("breakup") {

TEST_CASE("dominant frame orients patterns against P0") {
    auto col = coloring(3);
    auto fr = dominant_frame(col, pattern(col, {"1"}, {"2", "3"}));
    CHECK(fr.size() == 6);
    int direct = 0;
    for (int P = 0; P < fr.size(); ++P) {
        direct += fr.direct_to_p0[static_cast<std::size_t>(P)];
        CHECK(popcount(fr.bdry[static_cast<std::size_t>(P)]) == 1);
        CHECK(popcount(fr.inner[static_cast<std::size_t>(P)]) == 2);
    }
    CHECK(direct == 3);
    CHECK_THROWS_AS(dominant_frame(col, pattern(col, {"1"}, {"2"})), Error);
    auto b = beach(Num(1));
    try {
        dominant_frame(b, analyze_patterns(b).dominant.front());
        FAIL("expected DominantPatternsNotEquivalent");
    } catch (const Error& e) {
        CHECK(e.kind() == "DominantPatternsNotEquivalent");
    }
}

TEST_CASE("a fully ordered configuration has no defects") {
    auto col = coloring(3);
    auto g = Lattice::box({6, 6}, true);
    auto P0 = pattern(col, {"1"}, {"2", "3"});
    auto f = stripes(g, 0, 1, 2);
    auto r = compute_regions(col, g, f, P0);
    CHECK(count(r.star) == 0);
    CHECK(count(r.Z[static_cast<std::size_t>(r.frame.p0)]) == g.size());
    auto b = construct_breakup(col, g, f, P0, {g.index({2, 2})});
    CHECK(count(b.derived.star) == 0);
    CHECK(count(b.atlas.X[static_cast<std::size_t>(r.frame.p0)]) == g.size());
    for (int P = 0; P < r.frame.size(); ++P)
        if (P != r.frame.p0) CHECK(count(b.atlas.X[static_cast<std::size_t>(P)]) == 0);
    CHECK(verify_breakup(col, g, b.atlas, f, P0).empty());
}

TEST_CASE("an all-equal odd neighbourhood already creates an overlap") {
    // With every odd neighbour of an even vertex equal to 2, that vertex is
    // also ordered by the reversed pattern ({1,3},{2}).
    auto col = coloring(3);
    auto g = Lattice::box({4, 4}, true);
    auto f = stripes(g, 0, 1, 1);
    auto r = compute_regions(col, g, f, pattern(col, {"1"}, {"2", "3"}));
    CHECK(count(r.overlap) > 0);
}

TEST_CASE("a single flipped vertex stays local") {
    auto col = coloring(3);
    auto g = Lattice::box({10, 10}, true);
    auto P0 = pattern(col, {"1"}, {"2", "3"});
    auto f = stripes(g, 0, 1, 2);
    const int v = g.index({4, 4});
    f[static_cast<std::size_t>(v)] = 1;
    for (int u : g.neighbors(v)) f[static_cast<std::size_t>(u)] = 2;
    auto r = compute_regions(col, g, f, P0);
    CHECK(count(r.star) > 0);
    CHECK(subset_of(r.star, ball(g, v, 2)));
    auto seen = seen_from(g, r.star, {v});
    CHECK(seen == plus(g, r.star, 5));
    auto b = construct_breakup(col, g, f, P0, {v});
    CHECK(b.matches_regions);
    CHECK(b.derived.star5 == seen);
    CHECK(verify_breakup(col, g, b.atlas, f, P0).empty());
    CHECK(b.derived.N + b.derived.M + b.derived.L > 0);
}

TEST_CASE("components far from the seen-from set are dropped") {
    auto col = coloring(3);
    auto g = Lattice::box({24, 24}, true);
    auto P0 = pattern(col, {"1"}, {"2", "3"});
    auto f = stripes(g, 0, 1, 2);
    const int v = g.index({8, 8});
    f[static_cast<std::size_t>(v)] = 1;
    for (int u : g.neighbors(v)) f[static_cast<std::size_t>(u)] = 2;
    auto b = construct_breakup(col, g, f, P0, {g.index({18, 18})});
    CHECK(count(b.derived.star) == 0);
    CHECK(verify_breakup(col, g, b.atlas, f, P0).empty());
    auto near = construct_breakup(col, g, f, P0, {g.index({9, 8})});
    CHECK(count(near.derived.star) > 0);
}

TEST_CASE("breakups of random admissible configurations verify") {
    auto g = Lattice::box({6, 6}, true);
    auto col = coloring(3);
    auto P0 = pattern(col, {"1"}, {"2", "3"});
    int nontrivial = 0;
    for (const auto& f : random_admissible(col, g, P0, 30, 3)) {
        auto b = construct_breakup(col, g, f, P0, {g.index({2, 2}), g.index({3, 4})});
        CHECK(verify_breakup(col, g, b.atlas, f, P0).empty());
        CHECK(b.matches_regions);
        auto again = derive(g, b.atlas);
        CHECK(again.L == b.derived.L);
        CHECK(again.M == b.derived.M);
        CHECK(again.N == b.derived.N);
        nontrivial += count(b.derived.star) > 0 ? 1 : 0;
    }
    CHECK(nontrivial > 0);
    auto hc = hard_core(Num(1));
    auto H0 = pattern(hc, {"0"}, {"0", "1"});
    for (const auto& f : random_admissible(hc, g, H0, 30, 4)) {
        auto b = construct_breakup(hc, g, f, H0, {g.index({2, 3})});
        CHECK(verify_breakup(hc, g, b.atlas, f, H0).empty());
        CHECK(b.matches_regions);
    }
}

TEST_CASE("boundary outside the pattern is rejected") {
    auto hc = hard_core(Num(1));
    auto g = Lattice::box({4, 4}, true);
    auto f = ordered_hard_core(g);
    f[static_cast<std::size_t>(g.index({0, 0}))] = 1;
    try {
        construct_breakup(hc, g, f, pattern(hc, {"0"}, {"0", "1"}), {g.index({1, 1})});
        FAIL("expected BoundaryNotInPattern");
    } catch (const Error& e) {
        CHECK(e.kind() == "BoundaryNotInPattern");
    }
}

TEST_CASE("verification localises corruption") {
    auto col = coloring(3);
    auto g = Lattice::box({8, 8}, true);
    auto P0 = pattern(col, {"1"}, {"2", "3"});
    auto f = stripes(g, 0, 1, 2);
    const int v = g.index({3, 3});
    f[static_cast<std::size_t>(v)] = 1;
    for (int u : g.neighbors(v)) f[static_cast<std::size_t>(u)] = 2;
    auto b = construct_breakup(col, g, f, P0, {v});
    REQUIRE(verify_breakup(col, g, b.atlas, f, P0).empty());

    SUBCASE("atlas invariant") {
        auto X = b.atlas;
        const int P = b.regions.frame.p0 == 0 ? 1 : 0;
        X.Xprime[static_cast<std::size_t>(P)][static_cast<std::size_t>(g.index({1, 1}))] = 1;
        bool found = false;
        for (const auto& w : verify_breakup(col, g, X, f, P0)) found = found || w.rule == "atlas";
        CHECK(found);
    }
    SUBCASE("odd membership") {
        auto X = b.atlas;
        const int p0 = b.regions.frame.p0;
        const int w = g.index({3, 6});  // odd, inside X_*^{+5}
        REQUIRE(g.is_odd(w));
        REQUIRE(b.derived.star5[static_cast<std::size_t>(w)]);
        X.X[static_cast<std::size_t>(p0)][static_cast<std::size_t>(w)] ^= 1;
        bool at_w = false;
        for (const auto& x : verify_breakup(col, g, X, f, P0))
            if (x.rule == "odd-iff") at_w = at_w || x.vertex == w;
        CHECK(at_w);
    }
}

TEST_CASE("classification of vertices and edges") {
    auto g = Lattice::box({3, 3}, true);
    const int v = g.index({1, 1});  // even
    const int u = g.index({1, 2});

    SUBCASE("non-dominant vertices restrict every edge") {
        auto col = coloring(3);
        auto fr = dominant_frame(col, pattern(col, {"1"}, {"2", "3"}));
        auto f = stripes(g, 0, 1, 2);
        for (int w : g.neighbors(v)) f[static_cast<std::size_t>(w)] = 0;
        f[static_cast<std::size_t>(g.neighbors(v)[0])] = 1;
        f[static_cast<std::size_t>(g.neighbors(v)[1])] = 2;  // neighbours see all three colours
        auto d = classify(col, g, fr, f, {f}, v, u, 0.125, 0.125);
        CHECK(d.non_dominant);
        CHECK(d.all_restricted);
        CHECK(*d.restricted);
    }
    SUBCASE("ordered hard-core vertex with a single witness") {
        auto hc = hard_core(Num(1));
        auto fr = dominant_frame(hc, pattern(hc, {"0"}, {"0", "1"}));
        auto f = ordered_hard_core(g);
        auto d = classify(hc, g, fr, f, {f}, v, u, 0.125, 0.125);
        CHECK(!d.non_dominant);
        CHECK(!*d.restricted);
        CHECK(!d.unbalanced);
        CHECK(!d.highly_energetic);
        CHECK(d.unique_pattern);
        auto s = scenario_checks(hc, g, fr, f, {f}, v, u);
        CHECK(!(s.s1 || s.s2 || s.s3 || s.s4));
        CHECK(!s.restricted);
    }
    SUBCASE("unbalanced neighbourhood") {
        auto potts = af_potts(4, Num(mpq_class(1, 2)));
        auto fr = dominant_frame(potts, pattern(potts, {"1", "2"}, {"3", "4"}));
        Configuration f(static_cast<std::size_t>(g.size()), 0);
        const auto& nb = g.neighbors(v);
        for (int w : nb) f[static_cast<std::size_t>(w)] = 2;
        f[static_cast<std::size_t>(nb[0])] = 3;  // three 3s and one 4
        auto d = classify(potts, g, fr, f, {f}, v, std::nullopt, 0.2, 0.2);
        CHECK(d.unbalanced);  // three neighbours take 3, and 3 > 4 - 1.6
        auto e = classify(potts, g, fr, f, {f}, v, std::nullopt, 0.05, 0.05);
        CHECK(!e.unbalanced);  // 3 > 4 - 0.4 fails
    }
    SUBCASE("highly energetic vertex") {
        auto potts = af_potts(4, Num(mpq_class(1, 2)));
        auto fr = dominant_frame(potts, pattern(potts, {"1", "2"}, {"3", "4"}));
        Configuration f(static_cast<std::size_t>(g.size()), 0);
        const auto& nb = g.neighbors(v);
        for (std::size_t k = 0; k < nb.size(); ++k) f[static_cast<std::size_t>(nb[k])] = k % 2 ? 2 : 3;
        f[static_cast<std::size_t>(v)] = 2;  // not in R({3,4}) = {1,2}
        auto d = classify(potts, g, fr, f, {f}, v, std::nullopt, 0.125, 0.125);
        CHECK(!d.unbalanced);
        CHECK(d.B == 0);
        CHECK(d.highly_energetic);
    }
}

TEST_CASE("each scenario has a witness") {
    auto g = Lattice::box({3, 3}, true);
    const int even = g.index({1, 1});
    const int odd = g.index({1, 2});
    const int u_of_odd = g.index({1, 1});

    SUBCASE("scenario 1") {
        auto col = coloring(3);
        auto fr = dominant_frame(col, pattern(col, {"1"}, {"2", "3"}));
        auto f = stripes(g, 0, 1, 2);
        for (int w : g.neighbors(odd)) f[static_cast<std::size_t>(w)] = 0;
        f[static_cast<std::size_t>(g.neighbors(odd)[1])] = 1;  // N(v) sees {1,2}
        f[static_cast<std::size_t>(odd)] = 2;
        auto h = f;
        h[static_cast<std::size_t>(odd)] = 0;  // the witness puts P_bdry at v
        auto s = scenario_checks(col, g, fr, f, {h}, odd, g.neighbors(odd)[0]);
        CHECK(s.s1);
        CHECK(s.restricted);
        CHECK(s.implication_holds);
    }
    SUBCASE("scenario 2") {
        auto col = coloring(4);
        auto fr = dominant_frame(col, pattern(col, {"1", "2"}, {"3", "4"}));
        Configuration f(static_cast<std::size_t>(g.size()), 0);
        const auto& nb = g.neighbors(even);
        for (std::size_t k = 0; k < nb.size(); ++k) f[static_cast<std::size_t>(nb[k])] = k % 2 ? 2 : 3;
        f[static_cast<std::size_t>(even)] = 0;  // value 1 lies in ({1,2} ∩ {1,3})
        auto s = scenario_checks(col, g, fr, f, {f}, even, nb[0]);
        CHECK(s.s2);
        CHECK(s.restricted);
        CHECK(s.implication_holds);
    }
    SUBCASE("scenario 3") {
        auto col = coloring(3);
        auto fr = dominant_frame(col, pattern(col, {"1"}, {"2", "3"}));
        auto f = stripes(g, 0, 1, 2);
        for (int w : g.neighbors(odd)) f[static_cast<std::size_t>(w)] = 0;
        for (int w : g.neighbors(odd))
            if (w != u_of_odd) {
                f[static_cast<std::size_t>(w)] = 1;
                break;
            }
        f[static_cast<std::size_t>(odd)] = 2;
        REQUIRE(f[static_cast<std::size_t>(u_of_odd)] == 0);
        auto s = scenario_checks(col, g, fr, f, {f}, odd, u_of_odd);
        CHECK(s.s3);
        CHECK(s.restricted);
        CHECK(s.implication_holds);
    }
    SUBCASE("scenario 4") {
        auto col = coloring(4);
        auto fr = dominant_frame(col, pattern(col, {"1", "2"}, {"3", "4"}));
        Configuration f(static_cast<std::size_t>(g.size()), 0);
        const auto& nb = g.neighbors(even);
        for (std::size_t k = 0; k < nb.size(); ++k) f[static_cast<std::size_t>(nb[k])] = k % 2 ? 2 : 3;
        const int u = nb[0];  // value 4 lies in ({3,4} ∩ {2,4})
        auto s = scenario_checks(col, g, fr, f, {f}, even, u);
        CHECK(s.s4);
        CHECK(s.restricted);
        CHECK(s.implication_holds);
    }
}

TEST_CASE("firing scenarios always restrict (random tuples)") {
    auto g = Lattice::box({2, 2}, true);
    std::mt19937_64 rng(2024);
    std::vector<SpinSystem> systems = {coloring(3), coloring(4), af_potts(4, Num(mpq_class(1, 2))), hard_core(Num(1))};
    std::vector<Pattern> refs = {pattern(systems[0], {"1"}, {"2", "3"}), pattern(systems[1], {"1", "2"}, {"3", "4"}),
                                 pattern(systems[2], {"1", "2"}, {"3", "4"}), pattern(systems[3], {"0"}, {"0", "1"})};
    int fired = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t k = static_cast<std::size_t>(t) % systems.size();
        const auto& sys = systems[k];
        auto fr = dominant_frame(sys, refs[k]);
        std::uniform_int_distribution<int> val(0, sys.size() - 1);
        auto rand_config = [&] {
            Configuration f(static_cast<std::size_t>(g.size()));
            for (auto& x : f) x = val(rng);
            return f;
        };
        auto f = rand_config();
        std::vector<Configuration> omega;
        const int n = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) {
            auto h = f;
            for (auto& x : h)
                if (rng() % 3 == 0) x = val(rng);
            omega.push_back(h);
        }
        const int v = g.index({static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)});
        const auto& nb = g.neighbors(v);
        const int u = nb[rng() % nb.size()];
        auto s = scenario_checks(sys, g, fr, f, omega, v, u);
        CHECK(s.implication_holds);
        fired += (s.s1 || s.s2 || s.s3 || s.s4) ? 1 : 0;
    }
    CHECK(fired > 20);
}

}
