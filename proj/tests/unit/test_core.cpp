#include "doctest.h"
#include "helpers.hpp"

#include "spinlab/error.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/system.hpp"

#include <cmath>
#include <random>

using namespace spinlab;
using namespace helpers;

namespace {

std::string kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

SpinSystem raw(std::vector<std::string> states, std::vector<Num> act, std::vector<std::vector<Num>> inter,
               Mode mode = Mode::Rational) {
    return SpinSystem(std::move(states), std::move(act), std::move(inter), mode);
}

WeightedGraph random_graph(std::mt19937_64& rng, int n) {
    WeightedGraph g;
    g.n = n;
    std::bernoulli_distribution coin(0.45);
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            if (coin(rng)) g.edges.emplace_back(u, v);
    return g;
}

Num q(long p, long r) { return Num(mpq_class(p, r)); }

SpinSystem random_system(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> num(1, 5), den(1, 4), zero(0, 3);
    std::vector<std::string> labels;
    std::vector<Num> act;
    std::vector<std::vector<Num>> inter(static_cast<std::size_t>(n), std::vector<Num>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        labels.push_back("s" + std::to_string(i));
        act.push_back(q(num(rng), den(rng)));
        for (int j = i; j < n; ++j) {
            Num x = zero(rng) == 0 ? Num(0) : q(num(rng), den(rng));
            inter[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x;
            inter[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = x;
        }
    }
    inter[0][0] = Num(1);
    return raw(labels, act, inter);
}

Configuration random_config(std::mt19937_64& rng, int n, int states) {
    std::uniform_int_distribution<int> pick(0, states - 1);
    Configuration f(static_cast<std::size_t>(n));
    for (auto& x : f) x = pick(rng);
    return f;
}

// The n-cycle as a homomorphism target.
SpinSystem cycle(int n) {
    std::vector<std::string> s;
    std::vector<Num> act(static_cast<std::size_t>(n), Num(1));
    std::vector<std::vector<Num>> inter(static_cast<std::size_t>(n), std::vector<Num>(static_cast<std::size_t>(n), Num(0)));
    for (int i = 0; i < n; ++i) {
        s.push_back(std::to_string(i));
        inter[static_cast<std::size_t>(i)][static_cast<std::size_t>((i + 1) % n)] = Num(1);
        inter[static_cast<std::size_t>((i + 1) % n)][static_cast<std::size_t>(i)] = Num(1);
    }
    return SpinSystem(s, act, inter, Mode::Rational);
}

}  // namespace

TEST_SUITE("core") {

TEST_CASE("rational parsing and printing") {
    CHECK(Num::parse("3/6", true) == q(1, 2));
    CHECK(Num::parse("3/6", true).str() == "1/2");
    CHECK(Num::parse("0.25", true) == q(1, 4));
    CHECK(Num::parse("-7", true).str() == "-7");
    CHECK(!Num::parse("0.25", false).exact());
    CHECK(kind_of([] { Num::parse("1/0", true); }) == "SchemaError");
    CHECK(kind_of([] { Num::parse("abc", true); }) == "SchemaError");
    CHECK((q(1, 3) + q(1, 6)) == q(1, 2));
    CHECK(!(q(1, 3) + Num(0.5)).exact());
    CHECK(q(2, 3).pow(-2) == q(9, 4));
    CHECK(std::isinf(Num(0).log()));
    CHECK(rationalize(0.333333333333, 1000) == mpq_class(1, 3));
}

TEST_CASE("logs of huge rationals stay finite") {
    mpz_class big = 1;
    big <<= 5000;
    CHECK(log_z(big) == doctest::Approx(5000 * std::log(2.0)));
    CHECK(log_q(mpq_class(1, 1) / mpq_class(big)) == doctest::Approx(-5000 * std::log(2.0)));
}

TEST_CASE("validation rejects malformed systems") {
    const std::vector<std::string> ab = {"a", "b"};
    CHECK(kind_of([&] { raw(ab, {Num(1), Num(1)}, {{Num(1), Num(2)}, {Num(1), Num(1)}}); }) ==
          "NonSymmetricInteractions");
    CHECK(kind_of([&] { raw(ab, {Num(0), Num(1)}, {{Num(1), Num(1)}, {Num(1), Num(1)}}); }) == "NonPositiveActivity");
    CHECK(kind_of([&] { raw(ab, {Num(1), Num(1)}, {{Num(0), Num(0)}, {Num(0), Num(0)}}); }) == "AllZeroInteractions");
    CHECK(kind_of([&] { raw(ab, {Num(1), Num(1)}, {{Num(1), Num(-1)}, {Num(-1), Num(1)}}); }) ==
          "NegativeInteraction");
    CHECK(kind_of([&] { raw({"a", "a"}, {Num(1), Num(1)}, {{Num(1), Num(1)}, {Num(1), Num(1)}}); }) == "SchemaError");
    CHECK(kind_of([&] { raw(ab, {Num(1), Num(1.5)}, {{Num(1), Num(1)}, {Num(1), Num(1)}}); }) == "SchemaError");
    CHECK(kind_of([&] { raw(ab, {Num(1)}, {{Num(1), Num(1)}, {Num(1), Num(1)}}); }) == "SchemaError");
}

TEST_CASE("hard-core system shape") {
    auto hc = hard_core(q(3, 2));
    CHECK(hc.size() == 2);
    CHECK(hc.activity(hc.index_of("1")) == q(3, 2));
    CHECK(hc.interaction(1, 1).is_zero());
    CHECK(hc.is_homomorphism());
    CHECK(hc.max_neighbors(0) == 3);
    CHECK(hc.max_neighbors(1) == 1);
    CHECK(kind_of([&] { hc.index_of("2"); }) == "UnknownState");
}

TEST_CASE("configuration weight and domain errors") {
    auto hc = hard_core(Num(2));
    WeightedGraph path{3, {{0, 1}, {1, 2}}, {}};
    CHECK(config_weight(hc, path, {1, 0, 1}) == Num(4));
    CHECK(config_weight(hc, path, {1, 1, 0}) == Num(0));
    CHECK(kind_of([&] { config_weight(hc, path, {1, 0}); }) == "DomainMismatch");
    WeightedGraph loop{2, {{0, 0}}, {}};
    CHECK(kind_of([&] { loop.validate(); }) == "SchemaError");
}

TEST_CASE("reweighting preserves weights on 2d-regular graphs") {
    std::mt19937_64 rng(3);
    auto potts = af_potts(3, q(1, 3));
    const std::vector<Num> m = {Num(2), q(1, 3), Num(5)};
    auto rw = reweight(potts, m, 2);
    CHECK(!rw.exact());
    std::vector<Num> inv;
    for (const auto& x : m) inv.push_back(Num(1) / x);
    auto back = reweight(rw, inv, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(near_equal(back.interaction(i, j), potts.interaction(i, j), 1e-12));
    const WeightedGraph g = Lattice::torus({4, 4}).graph();
    for (int t = 0; t < 20; ++t) {
        auto f = random_config(rng, g.n, 3);
        CHECK(near_equal(config_weight(rw, g, f), config_weight(potts, g, f), 1e-10));
    }
    CHECK(kind_of([&] { reweight(potts, {Num(1), Num(0), Num(1)}, 2); }) == "NonPositiveMultiplier");
}

TEST_CASE("product weights factor exactly") {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        auto a = random_system(rng, 2);
        auto b = random_system(rng, 3);
        auto ab = product(a, b);
        CHECK(ab.size() == 6);
        auto g = random_graph(rng, 5);
        auto fa = random_config(rng, 5, 2);
        auto fb = random_config(rng, 5, 3);
        Configuration fab;
        for (int v = 0; v < 5; ++v) fab.push_back(fa[static_cast<std::size_t>(v)] * 3 + fb[static_cast<std::size_t>(v)]);
        CHECK(config_weight(ab, g, fab) == config_weight(a, g, fa) * config_weight(b, g, fb));
    }
}

TEST_CASE("hard-core squared matches the four-state product model") {
    // States (-1, 0, 1, 2) with the pairs (0,1), (0,0), (1,0), (1,1).
    auto hc = hard_core(q(2, 3));
    auto sq = product(hc, hc);
    const Num l = q(2, 3), o(1), z(0);
    auto ref = raw({"-1", "0", "1", "2"}, {l, o, l, l * l},
                   {{z, o, o, z}, {o, o, o, o}, {o, o, z, z}, {z, o, z, z}});
    CHECK(find_isomorphism(sq, ref).has_value());
}

TEST_CASE("projection from the doubled graph") {
    auto hc = hard_core(Num(3));
    auto p = project_from_doubled(hc);
    CHECK(p.size() == 3);
    CatalogParams cp;
    cp.q = 2;
    cp.lambda = Num(3);
    CHECK(find_isomorphism(p, build({Model::anti_wr, cp})).has_value());

    // Weight identity on G x {0,1} for random graphs.
    std::mt19937_64 rng(9);
    auto sys = random_system(rng, 3);
    auto proj = project_from_doubled(sys);
    for (int t = 0; t < 20; ++t) {
        const int n = 3;
        auto g = random_graph(rng, n);
        WeightedGraph doubled{2 * n, {}, {}};
        for (auto [u, v] : g.edges) {
            doubled.edges.emplace_back(u, v);
            doubled.edges.emplace_back(n + u, n + v);
        }
        for (int v = 0; v < n; ++v) doubled.edges.emplace_back(v, n + v);
        auto f = random_config(rng, 2 * n, 3);
        const Num w = config_weight(sys, doubled, f);
        if (w.is_zero()) continue;
        Configuration pf;
        for (int v = 0; v < n; ++v) {
            const std::string label = "(" + sys.label(f[static_cast<std::size_t>(v)]) + "," +
                                      sys.label(f[static_cast<std::size_t>(n + v)]) + ")";
            pf.push_back(proj.index_of(label));
        }
        CHECK(config_weight(proj, g, pf) == w);
    }
}

TEST_CASE("bipartite covers") {
    auto hc = hard_core(Num(2));
    auto c = bipartite_cover(hc);
    // The 4-path a - b - c - d with activities (lambda, 1, 1, lambda).
    const Num o(1), z(0), l(2);
    auto path = raw({"a", "b", "c", "d"}, {l, o, o, l}, {{z, o, z, z}, {o, z, o, z}, {z, o, z, o}, {z, z, o, z}});
    CHECK(find_isomorphism(c.system, path).has_value());

    auto col = coloring(3);
    CHECK(find_isomorphism(bipartite_cover(col).system, cycle(6)).has_value());
}

TEST_CASE("lift-permitting covers of cycles") {
    auto mod_cover = [](int n, int k) {
        std::vector<std::pair<int, int>> e;
        std::vector<int> phi;
        for (int i = 0; i < n * k; ++i) {
            e.emplace_back(i, (i + 1) % (n * k));
            phi.push_back(i % n);
        }
        return std::make_pair(e, phi);
    };
    auto [e4, p4] = mod_cover(4, 3);
    CHECK(check_lift_permitting(cycle(4), 12, e4, p4).status == LiftStatus::NotLiftPermitting);
    for (int n : {3, 5, 6}) {
        auto [e, p] = mod_cover(n, 3);
        CHECK(check_lift_permitting(cycle(n), 3 * n, e, p).ok());
    }
    // Dropping an edge breaks the local bijection.
    e4.pop_back();
    CHECK(check_lift_permitting(cycle(4), 12, e4, p4).status == LiftStatus::NotACover);
}

TEST_CASE("normalization and ties") {
    auto potts = af_potts(3, q(1, 2));
    auto n = potts.normalized();
    CHECK(n.lambda_max() == Num(1));
    CHECK(*potts.second_interaction() == q(1, 2));
    CHECK(!potts.is_homomorphism());
    auto fl = raw({"a", "b"}, {Num(1.0), Num(1.0)}, {{Num(1.0), Num(1.0 - 1e-10)}, {Num(1.0 - 1e-10), Num(0.5)}},
                  Mode::Float);
    CHECK(fl.near_tie());
}

}
