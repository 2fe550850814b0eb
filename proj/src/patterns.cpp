#include "spinlab/patterns.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace spinlab {

Mask r_closure(const SpinSystem& sys, Mask I) {
    Mask r = sys.all();
    for (int i : members(I)) r &= sys.max_neighbors(i);
    return r;
}

std::vector<Mask> r_sets(const SpinSystem& sys) {
    std::set<Mask> family{sys.all()};
    std::vector<Mask> frontier{sys.all()};
    while (!frontier.empty()) {
        std::vector<Mask> next;
        for (Mask x : frontier)
            for (int i = 0; i < sys.size(); ++i) {
                Mask y = x & sys.max_neighbors(i);
                if (family.insert(y).second) next.push_back(y);
            }
        frontier = std::move(next);
    }
    return {family.begin(), family.end()};
}

bool is_pattern(const SpinSystem& sys, Mask A, Mask B) { return is_subset(A, r_closure(sys, B)); }

std::vector<Pattern> maximal_patterns(const SpinSystem& sys) {
    std::vector<Pattern> out;
    for (Mask A : r_sets(sys)) {
        Mask B = r_closure(sys, A);
        out.push_back({A, B, sys.activity_sum(A) * sys.activity_sum(B)});
    }
    return out;
}

Dominance dominant_patterns(const SpinSystem& sys) { return dominant_patterns(sys, maximal_patterns(sys)); }

Dominance dominant_patterns(const SpinSystem& sys, const std::vector<Pattern>& maximal) {
    Dominance d;
    Num best = maximal.front().weight;
    for (const auto& p : maximal)
        if (p.weight > best) best = p.weight;
    d.omega_dom = best;
    for (const auto& p : maximal) {
        if (near_equal(p.weight, best)) {
            d.dominant.push_back(p);
        } else if (!sys.exact() && near_equal(p.weight, best, 1e-9)) {
            d.near_tie = true;
        }
    }
    return d;
}

namespace {

bool verify_equivalence(const SpinSystem& sys, const std::vector<int>& phi, const Pattern& P, const Pattern& Q,
                        bool direct) {
    const int n = sys.size();
    std::vector<char> hit(static_cast<std::size_t>(n), 0);
    for (int x : phi) {
        if (x < 0 || x >= n || hit[static_cast<std::size_t>(x)]) return false;
        hit[static_cast<std::size_t>(x)] = 1;
    }
    for (int i = 0; i < n; ++i) {
        if (!near_equal(sys.activity(i), sys.activity(phi[static_cast<std::size_t>(i)]))) return false;
        for (int j = 0; j < n; ++j)
            if (!near_equal(sys.interaction(i, j),
                            sys.interaction(phi[static_cast<std::size_t>(i)], phi[static_cast<std::size_t>(j)])))
                return false;
    }
    auto image = [&](Mask m) {
        Mask r = 0;
        for (int i : members(m)) r |= bit(phi[static_cast<std::size_t>(i)]);
        return r;
    };
    Mask a = image(P.A), b = image(P.B);
    if (a == Q.A && b == Q.B) return true;
    return !direct && a == Q.B && b == Q.A;
}

std::optional<std::vector<int>> search(const SpinSystem& sys, Mask A, Mask B, Mask A2, Mask B2) {
    const int n = sys.size();
    if (popcount(A) != popcount(A2) || popcount(B) != popcount(B2) || popcount(A & B) != popcount(A2 & B2))
        return std::nullopt;
    // Order states so that constrained ones come first.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return (contains(A | B, x) ? 0 : 1) < (contains(A | B, y) ? 0 : 1);
    });
    std::vector<int> phi(static_cast<std::size_t>(n), -1);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::function<bool(std::size_t)> go = [&](std::size_t k) -> bool {
        if (k == order.size()) return true;
        int i = order[k];
        for (int c = 0; c < n; ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            if (contains(A, i) != contains(A2, c) || contains(B, i) != contains(B2, c)) continue;
            if (!near_equal(sys.activity(i), sys.activity(c))) continue;
            if (!near_equal(sys.interaction(i, i), sys.interaction(c, c))) continue;
            bool ok = true;
            for (std::size_t t = 0; t < k && ok; ++t) {
                int j = order[t];
                ok = near_equal(sys.interaction(i, j), sys.interaction(c, phi[static_cast<std::size_t>(j)]));
            }
            if (!ok) continue;
            phi[static_cast<std::size_t>(i)] = c;
            used[static_cast<std::size_t>(c)] = 1;
            if (go(k + 1)) return true;
            used[static_cast<std::size_t>(c)] = 0;
            phi[static_cast<std::size_t>(i)] = -1;
        }
        return false;
    };
    if (!go(0)) return std::nullopt;
    return phi;
}

std::vector<std::vector<int>> classes(const SpinSystem& sys, const std::vector<Pattern>& pats, bool direct) {
    std::vector<std::vector<int>> out;
    for (std::size_t i = 0; i < pats.size(); ++i) {
        bool placed = false;
        for (auto& cls : out)
            if (find_equivalence(sys, pats[static_cast<std::size_t>(cls.front())], pats[i], direct)) {
                cls.push_back(static_cast<int>(i));
                placed = true;
                break;
            }
        if (!placed) out.push_back({static_cast<int>(i)});
    }
    return out;
}

}  // namespace

std::optional<std::vector<int>> find_equivalence(const SpinSystem& sys, const Pattern& P, const Pattern& Q,
                                                 bool direct) {
    auto phi = search(sys, P.A, P.B, Q.A, Q.B);
    if (!phi && !direct) phi = search(sys, P.A, P.B, Q.B, Q.A);
    if (phi && !verify_equivalence(sys, *phi, P, Q, direct)) return std::nullopt;
    return phi;
}

bool all_dominant_equivalent(const SpinSystem& sys) {
    auto dom = dominant_patterns(sys).dominant;
    for (std::size_t i = 1; i < dom.size(); ++i)
        if (!find_equivalence(sys, dom.front(), dom[i], false)) return false;
    return true;
}

double frak_q(const SpinSystem& sys, const std::vector<Pattern>& dominant, bool large_side) {
    // P(I) is determined by the intersection of the qualifying sides that
    // contain I, so the distinct values are the members of the intersection
    // closure of those sides, plus the empty answer when S is not a side.
    std::set<Mask> sides;
    for (const auto& p : dominant) {
        int a = popcount(p.A), b = popcount(p.B);
        if (large_side ? a >= b : a <= b) sides.insert(p.A);
    }
    std::set<Mask> closure(sides.begin(), sides.end());
    std::vector<Mask> frontier(sides.begin(), sides.end());
    while (!frontier.empty()) {
        std::vector<Mask> next;
        for (Mask x : frontier)
            for (Mask s : sides) {
                Mask y = x & s;
                if (closure.insert(y).second) next.push_back(y);
            }
        frontier = std::move(next);
    }
    std::size_t count = closure.size() + (sides.count(sys.all()) ? 0 : 1);
    return std::log2(static_cast<double>(count));
}

std::vector<std::pair<Mask, long>> mobius_below(const std::vector<Mask>& rsets, Mask A) {
    std::vector<Mask> below;
    for (Mask K : rsets)
        if (K != A && is_subset(K, A)) below.push_back(K);
    below.push_back(A);
    std::sort(below.begin(), below.end(), [](Mask x, Mask y) { return popcount(x) > popcount(y); });
    std::vector<std::pair<Mask, long>> out;
    for (Mask K : below) {
        long mu = 0;
        if (K == A) {
            mu = 1;
        } else {
            for (const auto& [L, m] : out)
                if (L != K && is_subset(K, L)) mu -= m;
        }
        out.push_back({K, mu});
    }
    return out;
}

PatternCatalog analyze_patterns(const SpinSystem& sys) {
    PatternCatalog c;
    c.r_sets = r_sets(sys);
    c.maximal = maximal_patterns(sys);
    auto dom = dominant_patterns(sys, c.maximal);
    c.dominant = dom.dominant;
    c.omega_dom = dom.omega_dom;
    c.near_tie = dom.near_tie;
    c.equivalence_classes = classes(sys, c.dominant, false);
    c.direct_classes = classes(sys, c.dominant, true);
    c.all_equivalent = c.equivalence_classes.size() == 1;
    c.frak_q = frak_q(sys, c.dominant, false);
    c.frak_q_large_side = frak_q(sys, c.dominant, true);
    return c;
}

}  // namespace spinlab
