#include "doctest.h"
#include "helpers.hpp"

#include "spinlab/error.hpp"
#include "spinlab/kbipartite.hpp"
#include "spinlab/parameters.hpp"
#include "spinlab/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace spinlab;
using namespace helpers;

namespace {

using Fn = std::vector<int>;

void for_each_function(int len, int states, const std::function<void(const Fn&)>& fn) {
    Fn f(static_cast<std::size_t>(len), 0);
    while (true) {
        fn(f);
        int k = 0;
        while (k < len && ++f[static_cast<std::size_t>(k)] == states) f[static_cast<std::size_t>(k++)] = 0;
        if (k == len) return;
    }
}

// Z(Psi, I) term by term from its definition.
Num z_direct(const SpinSystem& sys, int d, const std::vector<Fn>& psis, Mask I) {
    Num total(0);
    for (const auto& psi : psis) {
        Num left(1);
        for (int x : psi) left *= sys.activity(x);
        Num inner(0);
        for (int i : members(I)) {
            Num t = sys.activity(i);
            for (int x : psi) t *= sys.interaction(i, x);
            inner += t;
        }
        total += left * inner.pow(2 * d);
    }
    return total;
}

// Partition function of K_{2d,2d} by enumerating both sides.
Num z_k22(const SpinSystem& sys) {
    Num total(0);
    const int n = sys.size();
    for_each_function(4, n, [&](const Fn& f) {
        Num w = sys.activity(f[0]) * sys.activity(f[1]) * sys.activity(f[2]) * sys.activity(f[3]);
        for (int a = 0; a < 2; ++a)
            for (int b = 2; b < 4; ++b) w *= sys.interaction(f[static_cast<std::size_t>(a)], f[static_cast<std::size_t>(b)]);
        total += w;
    });
    return total;
}

Mask image(const Fn& psi) {
    Mask m = 0;
    for (int x : psi) m |= bit(x);
    return m;
}

// Class membership straight from the definitions of Psi_J, Psi^1 and Psi^2.
bool oracle_member(const SpinSystem& sys, const std::vector<Mask>& dom_sides, int d, const ClassSpec& c, const Fn& psi) {
    const SpinSystem norm = sys.normalized();
    const Mask RJ = r_closure(norm, c.J);
    if (r_closure(norm, image(psi)) != RJ) return false;
    auto hits = [&](Mask I) {
        int k = 0;
        for (int x : psi) k += contains(I, x) ? 1 : 0;
        return k;
    };
    bool one = false, two = false;
    for_each_subset(c.J, [&](Mask I) {
        if (I == c.J) return;
        bool side = false;
        for (Mask s : dom_sides) side = side || s == I;
        if (side && hits(I) > 2 * d - 4 * c.eps * d) one = true;
        if (r_closure(norm, I) != RJ && hits(I) > 2 * d - 4 * c.eps_bar * d) two = true;
    });
    switch (c.kind) {
        case ClassSpec::Kind::full: return true;
        case ClassSpec::Kind::one: return one;
        case ClassSpec::Kind::two: return two;
        case ClassSpec::Kind::balanced: return !one && !two;
    }
    return false;
}

SpinSystem random_system(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> num(1, 4), den(1, 3), zero(0, 2);
    std::vector<std::string> labels;
    std::vector<Num> act;
    std::vector<std::vector<Num>> inter(static_cast<std::size_t>(n), std::vector<Num>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        labels.push_back(std::to_string(i));
        act.push_back(Num(mpq_class(num(rng), den(rng))));
        for (int j = i; j < n; ++j) {
            Num x = zero(rng) == 0 ? Num(0) : Num(mpq_class(num(rng), den(rng)));
            inter[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = x;
            inter[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = x;
        }
    }
    inter[0][1] = inter[1][0] = Num(5);
    return SpinSystem(labels, act, inter, Mode::Rational);
}

}  // namespace

TEST_SUITE("kbipartite") {

TEST_CASE("small closed forms") {
    auto hc = hard_core(Num(1));
    CHECK(z_compositions(hc, 1, PsiSpec::full_product(hc, 1), hc.all()) == Num(7));
    CHECK(z_k22(hc) == Num(7));
    // K_{4,4}: 2 * 2^4 - 1 independent sets.
    CHECK(shearer_global_bound(hc, 2) == doctest::Approx(std::log(31.0) / 8.0));
    auto col = coloring(4);
    const Mask A = labels(col, {"1", "2"}), B = labels(col, {"3", "4"});
    for (int d : {1, 2, 3}) {
        const Num want = Num(4).pow(2 * d);
        CHECK(z_compositions(col, d, PsiSpec::product_of(std::vector<Mask>(static_cast<std::size_t>(2 * d), A)), B) == want);
    }
}

TEST_CASE("the three evaluators agree") {
    std::mt19937_64 rng(17);
    for (int t = 0; t < 12; ++t) {
        auto sys = random_system(rng, 3);
        CHECK(z_k22(sys) == z_direct(sys, 1, expand_psi(sys, 1, PsiSpec::full_product(sys, 1)), sys.all()));
        for (int d : {1, 2}) {
            std::vector<Mask> coords;
            std::uniform_int_distribution<Mask> pick(1, sys.all());
            for (int k = 0; k < 2 * d; ++k) coords.push_back(pick(rng));
            const Mask I = pick(rng);
            auto spec = PsiSpec::product_of(coords);
            auto fs = expand_psi(sys, d, spec);
            const Num direct = z_direct(sys, d, fs, I);
            CHECK(z_bruteforce(sys, d, fs, I) == direct);
            CHECK(z_compositions(sys, d, spec, I) == direct);
        }
    }
}

TEST_CASE("class members match their definitions") {
    std::vector<SpinSystem> systems = {coloring(3), hard_core(Num(2)), coloring(4)};
    for (const auto& sys : systems) {
        auto cat = analyze_patterns(sys);
        std::vector<Mask> dom_sides;
        for (const auto& P : cat.dominant) dom_sides.push_back(P.A);
        for (int d : {1, 2}) {
            if (sys.size() == 4 && d == 2) continue;
            for (Mask J : dom_sides)
                for (auto kind : {ClassSpec::Kind::full, ClassSpec::Kind::one, ClassSpec::Kind::two, ClassSpec::Kind::balanced}) {
                    ClassSpec c{kind, J, 0.25, 1.0 / (4 * d)};
                    std::set<Fn> want;
                    for_each_function(2 * d, sys.size(), [&](const Fn& f) {
                        if (oracle_member(sys, dom_sides, d, c, f)) want.insert(f);
                    });
                    auto got = expand_psi(sys, d, PsiSpec::class_of(c));
                    CHECK(std::set<Fn>(got.begin(), got.end()) == want);
                    CHECK(z_compositions(sys, d, PsiSpec::class_of(c), sys.all()) ==
                          z_direct(sys, d, std::vector<Fn>(want.begin(), want.end()), sys.all()));
                }
        }
    }
}

TEST_CASE("restricted activity powers") {
    auto col = coloring(4);
    const Mask A = labels(col, {"1", "2", "3"});
    // Every subset is an R-set for the 4-colouring, so this counts onto maps.
    for (int n : {1, 2, 3, 5}) {
        long count = 0;
        auto rs = r_sets(col);
        for_each_function(n, 3, [&](const Fn& f) {
            Mask img = image(f);
            bool inside = false;
            for (Mask r : rs)
                if (r != A && is_subset(r, A) && is_subset(img, r)) inside = true;
            if (!inside) ++count;
        });
        CHECK(lambda_restricted_power(col, A, n) == Num(count));
        CHECK(count == static_cast<long>(std::pow(3, n) - 3 * std::pow(2, n) + 3));
    }
}

TEST_CASE("text forms of function families") {
    auto col = coloring(3);
    auto spec = parse_psi(col, 1, "class:J=1:balanced:eps=0.25:epsbar=0.25");
    CHECK(spec.kind == PsiSpec::Kind::class_);
    CHECK(parse_psi(col, 1, psi_to_string(col, spec)).cls.J == spec.cls.J);
    CHECK(expand_psi(col, 1, parse_psi(col, 1, "explicit:1,2;2,1")).size() == 2);
    CHECK(expand_psi(col, 1, parse_psi(col, 1, "product:1;2,3")).size() == 2);
    CHECK(parse_state_set(col, "all") == col.all());
    // {1} is not an R-set of the hard-core system.
    auto hc = hard_core(Num(1));
    CHECK_THROWS_AS(expand_psi(hc, 1, parse_psi(hc, 1, "class:J=1:full")), Error);
    CHECK_THROWS_AS(parse_psi(col, 1, "nonsense"), Error);
}

TEST_CASE("size guards") {
    auto col = coloring(5);
    try {
        expand_psi(col, 4, PsiSpec::full_product(col, 4));
        FAIL("expected a resource error");
    } catch (const Error& e) {
        CHECK(!e.kind().empty());
    }
}

TEST_CASE("general condition with default parameters") {
    auto hc = hard_core(Num(1));
    for (std::int64_t d : {2, 10}) {
        auto p = default_cond_params(hc, d);
        CHECK(p.eps >= 1.0 / (4.0 * d));
        CHECK(p.eps <= 0.125);
        CHECK(p.eps_bar >= 1.0 / (4.0 * d));
        auto rep = verify_main_condition(hc, d, p.alpha, p.gamma, p.eps, p.eps_bar);
        CHECK(!rep.lines.empty());
        CHECK(rep.pass == std::all_of(rep.lines.begin(), rep.lines.end(),
                                      [](const ConditionLine& l) { return l.holds; }));
        for (const auto& l : rep.lines)
            if (l.holds) CHECK(l.tight_alpha >= p.alpha - 1e-12);
    }
    CHECK_THROWS_AS(verify_main_condition(hc, 2, 0.1, 0, 0.01, 0.125), Error);
    CHECK_THROWS_AS(verify_main_condition(hc, 65, 0.1, 0, 0.125, 0.125), ResourceError);
}

}
