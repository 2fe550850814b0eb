#include "doctest.h"
#include "helpers.hpp"
#include "oracles.hpp"

#include "spinlab/error.hpp"
#include "spinlab/gibbs.hpp"

#include <cmath>

using namespace spinlab;
using namespace helpers;

namespace {

void expect_same_measure(const SpinSystem& sys, const Lattice& g, const std::optional<Pattern>& P) {
    auto ref = oracle::measure(sys, g, P);
    auto got = exact_measure(sys, g, P);
    if (sys.exact()) {
        CHECK(got.Z == ref.Z);
    } else {
        CHECK(std::abs(got.log_Z - ref.Z.log()) < 1e-10);
    }
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        for (int i = 0; i < sys.size(); ++i) {
            const auto& a = got.marginals[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
            const auto& b = ref.marginal[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)];
            if (sys.exact()) CHECK(a == b);
            else CHECK(std::abs(a.d() - b.d()) < 1e-12);
        }
    }
}

}  // namespace

TEST_SUITE("gibbs") {

TEST_CASE("domain boundary of a haloed box is its outer ring") {
    auto g = Lattice::box({4, 4}, true);
    auto b = domain_boundary(g);
    CHECK(count(b) == 12);
    CHECK(!b[static_cast<std::size_t>(g.index({1, 1}))]);
    CHECK(b[static_cast<std::size_t>(g.index({0, 2}))]);
    CHECK(count(domain_boundary(Lattice::torus({4, 4}))) == 0);
}

TEST_CASE("transfer matrix matches enumeration on small boxes") {
    auto potts = af_potts(3, Num(mpq_class(1, 2)));
    expect_same_measure(potts, Lattice::box({3, 3}, true), pattern(potts, {"1"}, {"2", "3"}));
    expect_same_measure(potts, Lattice::box({2, 3}, false), std::nullopt);
    expect_same_measure(potts, Lattice::box({5}, true), pattern(potts, {"2"}, {"1", "3"}));
    auto hc = hard_core(Num(mpq_class(3, 2)));
    expect_same_measure(hc, Lattice::box({3, 4}, true), pattern(hc, {"0"}, {"0", "1"}));
    expect_same_measure(hc, Lattice::box({2, 2, 2}, false), std::nullopt);
}

TEST_CASE("float systems agree with enumeration") {
    auto potts = af_potts_beta(3, 1.0);
    expect_same_measure(potts, Lattice::box({3, 3}, true), pattern(potts, {"1"}, {"2", "3"}));
}

TEST_CASE("torus partition function matches enumeration") {
    auto hc = hard_core(Num(1));
    auto g = Lattice::torus({4, 4});
    expect_same_measure(hc, g, std::nullopt);
    auto ref = oracle::measure(hc, g, std::nullopt);
    CHECK(Num(torus_partition_function(hc, g)) == ref.Z);
    CHECK(std::abs(log_z_per_vertex(hc, g) - ref.Z.log() / 16.0) < 1e-12);
    auto potts = af_potts(3, Num(mpq_class(1, 3)));
    expect_same_measure(potts, Lattice::torus({6}), std::nullopt);
}

TEST_CASE("proper 3-colourings of a cycle") {
    // Proper q-colourings of the n-cycle number (q-1)^n + (-1)^n (q-1).
    auto col = coloring(3);
    CHECK(exact_measure(col, Lattice::torus({6}), std::nullopt).Z == Num(66));
    CHECK(exact_measure(col, Lattice::torus({8}), std::nullopt).Z == Num(258));
}

TEST_CASE("marginals sum to one and respect the boundary pattern") {
    auto potts = af_potts(4, Num(mpq_class(1, 5)));
    auto g = Lattice::box({4, 4}, true);
    auto P = pattern(potts, {"1", "2"}, {"3", "4"});
    auto m = exact_measure(potts, g, P);
    auto bd = domain_boundary(g);
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        Num s(0);
        for (const auto& x : m.marginals[static_cast<std::size_t>(v)]) s += x;
        CHECK(s == Num(1));
        if (bd[static_cast<std::size_t>(v)]) CHECK(m.not_in_pattern[static_cast<std::size_t>(v)].is_zero());
    }
}

TEST_CASE("empty support and oversized slices are reported") {
    auto col = coloring(2);
    auto g = Lattice::box({2, 2}, false);
    Pattern clash{bit(0), bit(0), Num(0)};
    CHECK_THROWS_WITH_AS(exact_measure(col, g, clash), doctest::Contains("boundary"), Error);
    try {
        exact_measure(col, g, clash);
    } catch (const Error& e) {
        CHECK(e.kind() == "EmptySupport");
    }
    auto potts = af_potts_beta(3, 1.0);
    try {
        exact_measure(potts, Lattice::box({40, 40}, false), std::nullopt);
        FAIL("expected a resource error");
    } catch (const ResourceError& e) {
        CHECK(e.kind() == "StateSpaceTooLarge");
    }
}

TEST_CASE("heat-bath kernel is the conditional law") {
    auto hc = hard_core(Num(2));
    auto g = Lattice::box({3, 3}, false);
    auto allowed = allowed_values(hc, g, std::nullopt);
    Configuration f(9, 0);
    f[1] = 1;
    auto p = heat_bath_kernel(hc, g, allowed, f, 4);
    CHECK(p[1] == doctest::Approx(0.0));
    auto q = heat_bath_kernel(hc, g, allowed, f, 8);
    CHECK(q[1] == doctest::Approx(2.0 / 3.0));
    CHECK(q[0] + q[1] == doctest::Approx(1.0));
}

TEST_CASE("irreducibility probe") {
    auto g = Lattice::box({4, 4}, true);
    auto hc = hard_core(Num(1));
    CHECK(local_irreducibility_probe(hc, g, allowed_values(hc, g, pattern(hc, {"0"}, {"0", "1"}))));
    auto col = coloring(3);
    auto P = pattern(col, {"1"}, {"2", "3"});
    CHECK(!local_irreducibility_probe(col, g, allowed_values(col, g, P)));
    McmcOptions opt;
    opt.sweeps = 10;
    try {
        mcmc_sample(col, g, P, opt);
        FAIL("expected IrreducibilityUnknown");
    } catch (const Error& e) {
        CHECK(e.kind() == "IrreducibilityUnknown");
    }
    opt.waiver = true;
    auto r = mcmc_sample(col, g, P, opt);
    CHECK(!r.irreducibility_proven);
    CHECK(!r.caveat.empty());
    CHECK(admissible(col, g, r.final_state));
}

TEST_CASE("MCMC marginals agree with the exact measure") {
    auto hc = hard_core(Num(1));
    auto g = Lattice::box({4, 4}, true);
    auto P = pattern(hc, {"0"}, {"0", "1"});
    auto exact = exact_measure(hc, g, P);
    McmcOptions opt;
    opt.sweeps = 40000;
    opt.burn_in = 1000;
    opt.seed = 7;
    opt.sites = {g.index({1, 1}), g.index({2, 1})};
    auto r = mcmc_sample(hc, g, P, opt);
    CHECK(r.irreducibility_proven);
    for (const auto& e : r.estimates) {
        double want = exact.marginals[static_cast<std::size_t>(e.site)][1].d();
        CHECK(std::abs(e.mean[1] - want) < 5 * e.std_error[1] + 1e-3);
        double off = exact.not_in_pattern[static_cast<std::size_t>(e.site)].d();
        CHECK(std::abs(e.not_in_pattern - off) < 5 * e.not_in_pattern_se + 1e-3);
    }
}

TEST_CASE("MCMC is reproducible per seed and records samples") {
    auto potts = af_potts_beta(3, 1.0);
    auto g = Lattice::box({3, 3}, true);
    McmcOptions opt;
    opt.sweeps = 50;
    opt.seed = 11;
    opt.thin = 10;
    int seen = 0;
    auto a = mcmc_sample(potts, g, std::nullopt, opt, [&](std::int64_t, const Configuration&) { ++seen; });
    auto b = mcmc_sample(potts, g, std::nullopt, opt);
    CHECK(seen == 5);
    CHECK(a.final_state == b.final_state);
    opt.random_site = true;
    auto c = mcmc_sample(potts, g, std::nullopt, opt);
    CHECK(c.updates == a.updates);
}

TEST_CASE("extension outside the domain stays in the pattern") {
    auto hc = hard_core(Num(3));
    auto g = Lattice::box({3, 3}, true);
    auto P = pattern(hc, {"0"}, {"0", "1"});
    Configuration f = pattern_tiling(hc, g, P);
    Philox rng(5, 1);
    extend_outside(hc, g, f, P, rng);
    int occupied = 0;
    for (int v = 0; v < g.size(); ++v) {
        CHECK(f[static_cast<std::size_t>(v)] >= 0);
        if (g.exterior(v)) {
            CHECK(in_pattern(g, v, f[static_cast<std::size_t>(v)], P));
            occupied += f[static_cast<std::size_t>(v)];
        }
    }
    CHECK(occupied > 0);
}

}
