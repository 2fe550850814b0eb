#include "doctest.h"

#include "spinlab/error.hpp"
#include "spinlab/lattice.hpp"

#include <deque>
#include <random>

using namespace spinlab;

namespace {

std::string kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

// Odd vertices W plus every even vertex whose neighbours all lie in W.
VertexSet odd_set_from(const Lattice& g, const std::vector<int>& W) {
    VertexSet U = from_list(g, W);
    for (int v = 0; v < g.size(); ++v) {
        if (!g.is_even(v)) continue;
        bool all = true;
        for (int w : g.neighbors(v)) all = all && U[static_cast<std::size_t>(w)];
        if (all) U[static_cast<std::size_t>(v)] = 1;
    }
    return U;
}

std::vector<int> bfs(const Lattice& g, const std::vector<int>& src, const VertexSet& allowed) {
    std::vector<int> dist(static_cast<std::size_t>(g.size()), -1);
    std::deque<int> q;
    for (int s : src) {
        dist[static_cast<std::size_t>(s)] = 0;
        q.push_back(s);
    }
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int w : g.neighbors(v))
            if (allowed[static_cast<std::size_t>(w)] && dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                q.push_back(w);
            }
    }
    return dist;
}

VertexSet random_set(const Lattice& g, std::mt19937_64& rng, double p) {
    std::bernoulli_distribution coin(p);
    VertexSet U = g.empty_set();
    for (auto& x : U) x = coin(rng) ? 1 : 0;
    return U;
}

}  // namespace

TEST_SUITE("lattice") {

TEST_CASE("construction and text form") {
    auto g = Lattice::parse("box:3x4");
    CHECK(g.size() == 12);
    CHECK(g.edges().size() == 17);
    CHECK(g.spec() == "box:3x4");
    auto h = Lattice::parse("box:3x3+halo");
    CHECK(h.size() == 25);
    CHECK(h.spec() == "box:3x3+halo");
    int ext = 0;
    for (int v = 0; v < h.size(); ++v) ext += h.exterior(v) ? 1 : 0;
    CHECK(ext == 16);
    auto t = Lattice::torus({4, 6});
    CHECK(t.size() == 24);
    for (int v = 0; v < t.size(); ++v) CHECK(t.neighbors(v).size() == 4);
    for (auto [u, w] : t.edges()) CHECK(t.parity(u) != t.parity(w));
    CHECK(t.index(t.coords(7)) == 7);
    CHECK(kind_of([] { Lattice::torus({5, 4}); }) == "InvalidLattice");
    CHECK(kind_of([] { Lattice::parse("torus:4x4+halo"); }) == "InvalidLattice");
    CHECK(kind_of([] { Lattice::parse("grid:4"); }) == "InvalidLattice");
}

TEST_CASE("odd sets satisfy the boundary identity") {
    std::mt19937_64 rng(5);
    std::vector<Lattice> gs = {Lattice::box({10, 10}, false), Lattice::box({6, 6, 6}, false)};
    for (const auto& g : gs) {
        for (int t = 0; t < 30; ++t) {
            std::vector<int> W;
            std::bernoulli_distribution coin(0.35);
            for (int v = 0; v < g.size(); ++v) {
                auto c = g.coords(v);
                bool inner = true;
                for (std::size_t a = 0; a < c.size(); ++a) inner = inner && c[a] >= 2 && c[a] <= g.sides()[a] - 3;
                if (inner && g.is_odd(v) && coin(rng)) W.push_back(v);
            }
            const VertexSet U = odd_set_from(g, W);
            CHECK(is_odd_set(g, U));
            long cut = 0;
            for (auto [u, w] : g.edges()) cut += U[static_cast<std::size_t>(u)] != U[static_cast<std::size_t>(w)] ? 1 : 0;
            long odd = 0, even = 0;
            for (int v : to_list(U)) (g.is_odd(v) ? odd : even) += 1;
            auto id = odd_boundary_identity(g, U);
            CHECK(id.edge_boundary == cut);
            CHECK(id.odd_minus_even == odd - even);
            CHECK(id.holds);
            CHECK(static_cast<double>(cut) / (2.0 * g.dim()) == doctest::Approx(static_cast<double>(odd - even)));
        }
    }
    auto g = Lattice::box({6, 6}, false);
    CHECK(kind_of([&] { odd_boundary_identity(g, from_list(g, {0})); }) == "NotOddSet");
    CHECK(kind_of([&] { odd_boundary_identity(g, from_list(g, {1})); }) == "NotInterior");
}

TEST_CASE("balls and thresholds") {
    std::mt19937_64 rng(9);
    auto g = Lattice::box({7, 7}, false);
    for (int t = 0; t < 10; ++t) {
        VertexSet U = random_set(g, rng, 0.1);
        auto src = to_list(U);
        if (src.empty()) continue;
        auto dist = bfs(g, src, g.full_set());
        for (int r : {1, 2, 3}) {
            VertexSet P = plus(g, U, r);
            for (int v = 0; v < g.size(); ++v) CHECK((P[static_cast<std::size_t>(v)] != 0) == (dist[static_cast<std::size_t>(v)] <= r));
        }
        VertexSet N2 = n_t(g, U, 2);
        for (int v = 0; v < g.size(); ++v) {
            int k = 0;
            for (int w : g.neighbors(v)) k += U[static_cast<std::size_t>(w)];
            CHECK((N2[static_cast<std::size_t>(v)] != 0) == (k >= 2));
        }
        CHECK(count(boundary_both(g, U)) == count(internal_boundary(g, U)) + count(external_boundary(g, U)));
    }
}

TEST_CASE("co-connected closure") {
    std::mt19937_64 rng(11);
    auto g = Lattice::box({8, 8}, true);
    for (int t = 0; t < 25; ++t) {
        VertexSet U = random_set(g, rng, 0.3);
        for (int v = 0; v < g.size(); ++v)
            if (g.exterior(v)) U[static_cast<std::size_t>(v)] = 0;
        std::vector<int> halo;
        for (int v = 0; v < g.size(); ++v)
            if (g.exterior(v)) halo.push_back(v);
        const VertexSet C = co_connected_closure(g, U, kInfinity);
        auto reach = bfs(g, halo, complement(U));
        for (int v = 0; v < g.size(); ++v) CHECK((C[static_cast<std::size_t>(v)] != 0) == (reach[static_cast<std::size_t>(v)] < 0));
        CHECK(subset_of(U, C));
        CHECK(is_co_connected(g, C));
        CHECK(co_connected_closure(g, C, kInfinity) == C);
    }
    auto plain = Lattice::box({4, 4}, false);
    CHECK(kind_of([&] { co_connected_closure(plain, plain.empty_set(), kInfinity); }) == "NoInfinity");
}

TEST_CASE("components and diameters") {
    auto g = Lattice::box({9, 9}, false);
    auto at = [&](int x, int y) { return g.index({x, y}); };
    VertexSet U = from_list(g, {at(0, 0), at(0, 2), at(5, 5), at(5, 6), at(8, 8)});
    CHECK(components(g, U, 1).size() == 4);
    CHECK(components(g, U, 2).size() == 3);
    CHECK(diameter(g, {at(0, 0), at(3, 4)}) == 7);
    CHECK(diameter(g, {}) == -1);
    // r=2 components: {(0,0),(0,2)} diam 2, {(5,5),(5,6)} diam 1, {(8,8)} diam 0.
    CHECK(diam_star(g, U) == 2 * 3 + 2 + 1 + 0);
    CHECK(is_connected(g, from_list(g, {at(5, 5), at(5, 6)})));
    CHECK(!is_connected(g, U));
}

}
