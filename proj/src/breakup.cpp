#include "spinlab/breakup.hpp"

#include "spinlab/error.hpp"

#include <algorithm>
#include <deque>

namespace spinlab {

DominantFrame dominant_frame(const SpinSystem& sys, const Pattern& P0) {
    auto cat = analyze_patterns(sys);
    if (!cat.all_equivalent)
        throw Error("DominantPatternsNotEquivalent", "the dominant patterns of this system are not all equivalent");
    DominantFrame fr;
    fr.patterns = cat.dominant;
    for (std::size_t i = 0; i < fr.patterns.size(); ++i)
        if (fr.patterns[i] == P0) fr.p0 = static_cast<int>(i);
    if (fr.p0 < 0) throw Error("NotDominant", "the reference pattern is not dominant");
    fr.direct_class.assign(fr.patterns.size(), -1);
    for (std::size_t c = 0; c < cat.direct_classes.size(); ++c)
        for (int i : cat.direct_classes[c]) fr.direct_class[static_cast<std::size_t>(i)] = static_cast<int>(c);
    const int c0 = fr.direct_class[static_cast<std::size_t>(fr.p0)];
    for (std::size_t i = 0; i < fr.patterns.size(); ++i) {
        const bool direct = fr.direct_class[i] == c0;
        fr.direct_to_p0.push_back(direct ? 1 : 0);
        fr.bdry.push_back(direct ? fr.patterns[i].A : fr.patterns[i].B);
        fr.inner.push_back(direct ? fr.patterns[i].B : fr.patterns[i].A);
    }
    return fr;
}

Mask values_on(const Lattice&, const Configuration& f, const std::vector<int>& vs) {
    Mask m = 0;
    for (int v : vs) m |= bit(f[static_cast<std::size_t>(v)]);
    return m;
}

Mask neighbour_values(const Lattice& g, const Configuration& f, int v) { return values_on(g, f, g.neighbors(v)); }

namespace {

void check_config(const SpinSystem& sys, const Lattice& g, const Configuration& f) {
    if (static_cast<int>(f.size()) != g.size()) throw Error("DomainMismatch", "configuration size differs from the lattice");
    for (int x : f)
        if (x < 0 || x >= sys.size()) throw Error("DomainMismatch", "configuration must assign a state to every vertex");
}

}  // namespace

RegionReport compute_regions(const SpinSystem& sys, const Lattice& g, const Configuration& f, const Pattern& P0) {
    check_config(sys, g, f);
    RegionReport r;
    r.frame = dominant_frame(sys, P0);
    const auto& fr = r.frame;
    const int n = g.size();
    for (int P = 0; P < fr.size(); ++P) {
        VertexSet S = g.empty_set(), T = g.empty_set(), TS = g.empty_set();
        for (int v = 0; v < n; ++v) {
            if (fr.in_phase(g, P, v, f[static_cast<std::size_t>(v)])) S[static_cast<std::size_t>(v)] = 1;
            if (!fr.p_even(g, P, v) && is_subset(neighbour_values(g, f, v), fr.bdry[static_cast<std::size_t>(P)]))
                T[static_cast<std::size_t>(v)] = 1;
        }
        TS = set_difference(T, S);
        r.S.push_back(S);
        r.Z.push_back(plus(g, T, 1));
        r.Zprime.push_back(plus(g, TS, 1));
        r.T.push_back(std::move(T));
    }
    r.none = g.full_set();
    r.overlap = g.empty_set();
    r.defect = g.empty_set();
    r.star = g.empty_set();
    for (int P = 0; P < fr.size(); ++P) {
        r.none = set_difference(r.none, r.Z[static_cast<std::size_t>(P)]);
        r.defect = set_union(r.defect, r.Zprime[static_cast<std::size_t>(P)]);
        r.star = set_union(r.star, boundary_both(g, r.Z[static_cast<std::size_t>(P)]));
        for (int Q = P + 1; Q < fr.size(); ++Q)
            r.overlap = set_union(r.overlap, set_intersection(r.Z[static_cast<std::size_t>(P)], r.Z[static_cast<std::size_t>(Q)]));
    }
    r.star = set_union(set_union(r.star, r.none), set_union(r.overlap, r.defect));
    return r;
}

VertexSet frontier(const Lattice& g) {
    if (g.kind() != Lattice::Kind::box || !g.has_halo())
        throw Error("NoInfinity", "breakups need a box with a halo to stand in for infinity");
    VertexSet F = g.empty_set();
    for (int v = 0; v < g.size(); ++v)
        if (static_cast<int>(g.neighbors(v).size()) < 2 * g.dim()) F[static_cast<std::size_t>(v)] = 1;
    return F;
}

namespace {

// Vertices reachable from the frontier without entering `wall`.
VertexSet reach_from_frontier(const Lattice& g, const VertexSet& F, const VertexSet& wall) {
    VertexSet seen = g.empty_set();
    std::deque<int> q;
    for (int v = 0; v < g.size(); ++v)
        if (F[static_cast<std::size_t>(v)] && !wall[static_cast<std::size_t>(v)]) {
            seen[static_cast<std::size_t>(v)] = 1;
            q.push_back(v);
        }
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int u : g.neighbors(v))
            if (!seen[static_cast<std::size_t>(u)] && !wall[static_cast<std::size_t>(u)]) {
                seen[static_cast<std::size_t>(u)] = 1;
                q.push_back(u);
            }
    }
    return seen;
}

}  // namespace

VertexSet seen_from(const Lattice& g, const VertexSet& star, const std::vector<int>& V) {
    const VertexSet F = frontier(g);
    const VertexSet W = plus(g, star, 5);
    VertexSet out = g.empty_set();
    for (const auto& comp : components(g, W, 1)) {
        VertexSet C = from_list(g, comp);
        bool keep = false;
        for (int v : comp)
            if (F[static_cast<std::size_t>(v)]) keep = true;
        if (!keep) {
            VertexSet free = reach_from_frontier(g, F, C);
            for (int v : V)
                if (!free[static_cast<std::size_t>(v)]) keep = true;
        }
        if (keep) out = set_union(out, C);
    }
    return out;
}

AtlasDerived derive(const Lattice& g, const Atlas& X) {
    AtlasDerived d;
    const std::size_t k = X.X.size();
    d.none = g.full_set();
    d.overlap = g.empty_set();
    d.defect = g.empty_set();
    d.star = g.empty_set();
    std::vector<std::pair<int, int>> bd;
    for (std::size_t P = 0; P < k; ++P) {
        d.none = set_difference(d.none, X.X[P]);
        d.defect = set_union(d.defect, X.Xprime[P]);
        d.star = set_union(d.star, boundary_both(g, X.X[P]));
        for (auto [u, w] : edge_boundary(g, X.X[P])) bd.emplace_back(std::min(u, w), std::max(u, w));
        for (std::size_t Q = P + 1; Q < k; ++Q) d.overlap = set_union(d.overlap, set_intersection(X.X[P], X.X[Q]));
    }
    d.star = set_union(set_union(d.star, d.none), set_union(d.overlap, d.defect));
    d.star5 = plus(g, d.star, 5);
    std::sort(bd.begin(), bd.end());
    d.L = static_cast<long>(std::unique(bd.begin(), bd.end()) - bd.begin());
    d.M = count(set_union(d.overlap, d.defect));
    d.N = count(d.none);
    return d;
}

BreakupResult construct_breakup(const SpinSystem& sys, const Lattice& g, const Configuration& f, const Pattern& P0,
                                const std::vector<int>& V) {
    frontier(g);
    for (int v : V)
        if (v < 0 || v >= g.size() || g.exterior(v)) throw Error("InvalidVertex", "seen-from vertices must lie in the domain");
    BreakupResult res;
    res.regions = compute_regions(sys, g, f, P0);
    const auto& R = res.regions;
    const auto& fr = R.frame;
    const int k = fr.size();

    // Int(domain)^c: the halo together with the domain vertices next to it.
    VertexSet outside = g.empty_set();
    for (int v = 0; v < g.size(); ++v)
        if (g.exterior(v)) outside[static_cast<std::size_t>(v)] = 1;
    VertexSet need = plus(g, outside, 1);
    for (int v = 0; v < g.size(); ++v)
        if (need[static_cast<std::size_t>(v)] && !fr.in_phase(g, fr.p0, v, f[static_cast<std::size_t>(v)]))
            throw Error("BoundaryNotInPattern", "vertex " + std::to_string(v) + " outside the interior leaves the P0-pattern");

    // The modified atlas (Z_P, Z'_P ∪ N_2d(Z'_P)).
    Atlas Zt;
    Zt.patterns = fr.patterns;
    for (int P = 0; P < k; ++P) {
        Zt.X.push_back(R.Z[static_cast<std::size_t>(P)]);
        const auto& zp = R.Zprime[static_cast<std::size_t>(P)];
        Zt.Xprime.push_back(set_union(zp, n_t(g, zp, 2.0 * g.dim())));
    }
    const AtlasDerived zd = derive(g, Zt);
    const VertexSet B = seen_from(g, zd.star, V);
    res.seen_from_regions = seen_from(g, R.star, V);

    Atlas X;
    X.patterns = fr.patterns;
    for (int P = 0; P < k; ++P) {
        X.X.push_back(set_intersection(Zt.X[static_cast<std::size_t>(P)], B));
        X.Xprime.push_back(set_intersection(Zt.Xprime[static_cast<std::size_t>(P)], B));
    }
    for (const auto& hole : components(g, complement(B), 1)) {
        VertexSet A = from_list(g, hole);
        VertexSet ring = set_difference(plus(g, A, 5), A);
        int PA = -1;
        bool touches_outside = false;
        for (int v : hole) touches_outside = touches_outside || g.exterior(v);
        for (int a = 0; a < g.size(); ++a) {
            if (!ring[static_cast<std::size_t>(a)]) continue;
            if (zd.star[static_cast<std::size_t>(a)])
                throw Error("InternalError", "hole boundary meets the defect set");
            for (int P = 0; P < k; ++P)
                if (Zt.X[static_cast<std::size_t>(P)][static_cast<std::size_t>(a)]) {
                    if (PA >= 0 && PA != P) throw Error("InternalError", "hole boundary sees two dominant patterns");
                    PA = P;
                }
        }
        if (PA < 0) PA = fr.p0;  // no boundary: the hole is the whole graph
        if (touches_outside && PA != fr.p0)
            throw Error("InternalError", "a hole reaching the halo is not ordered by P0");
        res.pattern_of_hole.push_back(PA);
        X.X[static_cast<std::size_t>(PA)] = set_union(X.X[static_cast<std::size_t>(PA)], A);
    }
    res.derived = derive(g, X);
    res.matches_regions = res.derived.star5 == res.seen_from_regions;
    res.atlas = std::move(X);
    return res;
}

namespace {

bool regular_p_even(const Lattice& g, const DominantFrame& fr, int P, const VertexSet& U) {
    return fr.direct_to_p0[static_cast<std::size_t>(P)] ? is_regular_even_set(g, U) : is_regular_odd_set(g, U);
}

}  // namespace

std::vector<Violation> verify_breakup(const SpinSystem& sys, const Lattice& g, const Atlas& X, const Configuration& f,
                                      const Pattern& P0) {
    check_config(sys, g, f);
    const DominantFrame fr = dominant_frame(sys, P0);
    std::vector<Violation> out;
    if (X.X.size() != fr.patterns.size() || X.Xprime.size() != fr.patterns.size()) {
        out.push_back({"atlas", -1, -1, "atlas does not list every dominant pattern"});
        return out;
    }
    const int k = fr.size();
    for (int P = 0; P < k; ++P) {
        const auto& XP = X.X[static_cast<std::size_t>(P)];
        const auto& XpP = X.Xprime[static_cast<std::size_t>(P)];
        if (!subset_of(XpP, XP)) out.push_back({"atlas", P, -1, "X'_P is not contained in X_P"});
        if (!regular_p_even(g, fr, P, XP)) out.push_back({"atlas", P, -1, "X_P is not a regular P-even set"});
        if (!regular_p_even(g, fr, P, XpP)) out.push_back({"atlas", P, -1, "X'_P is not a regular P-even set"});
    }
    for (int v = 0; v < g.size(); ++v)
        if (g.exterior(v) && !X.X[static_cast<std::size_t>(fr.p0)][static_cast<std::size_t>(v)])
            out.push_back({"outside", fr.p0, v, "halo vertex missing from X_P0"});

    const AtlasDerived d = derive(g, X);
    auto val = [&](int v) { return f[static_cast<std::size_t>(v)]; };
    for (int P = 0; P < k; ++P) {
        const auto& XP = X.X[static_cast<std::size_t>(P)];
        const auto& XpP = X.Xprime[static_cast<std::size_t>(P)];
        const Mask bd = fr.bdry[static_cast<std::size_t>(P)];
        const Mask in = fr.inner[static_cast<std::size_t>(P)];
        for (int v = 0; v < g.size(); ++v) {
            const bool inXP = XP[static_cast<std::size_t>(v)] != 0;
            const bool inXpP = XpP[static_cast<std::size_t>(v)] != 0;
            const bool peven = fr.p_even(g, P, v);
            if (d.star5[static_cast<std::size_t>(v)]) {
                if (!peven) {
                    const bool nb_in_pattern = is_subset(neighbour_values(g, f, v), bd);
                    if (inXP != nb_in_pattern) out.push_back({"odd-iff", P, v, "X_P membership disagrees with the neighbourhood"});
                    if (inXP && !inXpP && !contains(in, val(v))) out.push_back({"odd-value", P, v, "value outside P_int"});
                } else {
                    bool bad = false;
                    for (int u : g.neighbors(v))
                        if (XP[static_cast<std::size_t>(u)] && !contains(in, val(u))) bad = true;
                    if (inXpP != bad) out.push_back({"even-iff", P, v, "X'_P membership disagrees with N(v) ∩ X_P"});
                    if (inXP && !contains(bd, val(v))) out.push_back({"even-value", P, v, "value outside P_bdry"});
                }
            }
            if (!peven && d.none[static_cast<std::size_t>(v)] && is_subset(neighbour_values(g, f, v), bd))
                out.push_back({"none-odd", P, v, "unclaimed P-odd vertex with neighbourhood in P_bdry"});
            if (peven && inXpP) {
                if (!contains(bd, val(v)) || is_subset(neighbour_values(g, f, v), in))
                    out.push_back({"defect", P, v, "defect vertex with an ordered neighbourhood"});
            }
        }
        for (auto [u, w] : edge_boundary(g, XP))
            if (!contains(bd, val(u)) || is_subset(neighbour_values(g, f, w), bd))
                out.push_back({"edge", P, u, "boundary edge to " + std::to_string(w) + " is not separating"});
    }
    return out;
}

namespace {

bool is_dominant_closure(const DominantFrame& fr, Mask D) {
    for (const auto& P : fr.patterns)
        if (P.A == D || P.B == D) return true;
    return false;
}

bool unbalanced_at(const SpinSystem& sys, const Lattice& g, const DominantFrame& fr, const Configuration& f, int v,
                   double eps, double eps_bar) {
    const Mask fN = neighbour_values(g, f, v);
    const Mask D = r_closure(sys, fN);
    if (!is_dominant_closure(fr, D)) return false;
    const long double two_d = 2.0L * g.dim();
    const long double loose = two_d - 4.0L * eps_bar * g.dim();
    const long double tight = two_d - 4.0L * eps * g.dim();
    bool found = false;
    for_each_subset(fN, [&](Mask A) {
        if (found || r_closure(sys, A) == D) return;
        int c = 0;
        for (int u : g.neighbors(v)) c += contains(A, f[static_cast<std::size_t>(u)]) ? 1 : 0;
        if (static_cast<long double>(c) > loose) found = true;
        bool side = false;
        for (Mask b : fr.bdry) side = side || b == A;
        if (side && static_cast<long double>(c) > tight) found = true;
    });
    return found;
}

struct EdgeInfo {
    bool restricted = false;
    Mask A = 0, B = 0;
    int matching = 0;
};

EdgeInfo edge_info(const SpinSystem& sys, const Lattice& g, const DominantFrame& fr, const Configuration& f,
                   const std::vector<Configuration>& omega, int v, int u) {
    const Mask fN = neighbour_values(g, f, v);
    const Mask D = r_closure(sys, fN);
    EdgeInfo e;
    for (const auto& h : omega) {
        if (r_closure(sys, neighbour_values(g, h, v)) != D) continue;
        ++e.matching;
        e.A |= bit(h[static_cast<std::size_t>(u)]);
        e.B |= bit(h[static_cast<std::size_t>(v)]);
    }
    e.B &= D;
    e.restricted = !is_dominant_closure(fr, D) || D != r_closure(sys, e.A) || r_closure(sys, D) != r_closure(sys, e.B);
    return e;
}

bool all_edges_restricted(const SpinSystem& sys, const Lattice& g, const DominantFrame& fr, const Configuration& f,
                          const std::vector<Configuration>& omega, int v) {
    for (int u : g.neighbors(v))
        if (!edge_info(sys, g, fr, f, omega, v, u).restricted) return false;
    return true;
}

}  // namespace

Diagnostics classify(const SpinSystem& sys, const Lattice& g, const DominantFrame& fr, const Configuration& f,
                     const std::vector<Configuration>& omega, int v, std::optional<int> u, double eps, double eps_bar) {
    check_config(sys, g, f);
    for (const auto& h : omega) check_config(sys, g, h);
    if (v < 0 || v >= g.size()) throw Error("InvalidVertex", "vertex out of range");
    if (u) {
        const auto& nb = g.neighbors(v);
        if (std::find(nb.begin(), nb.end(), *u) == nb.end()) throw Error("InvalidVertex", "u must be a neighbour of v");
    }
    Diagnostics out;
    out.neighbour_values = neighbour_values(g, f, v);
    out.D = r_closure(sys, out.neighbour_values);
    out.non_dominant = !is_dominant_closure(fr, out.D);
    out.unbalanced = unbalanced_at(sys, g, fr, f, v, eps, eps_bar);

    // B does not depend on u; take it from any neighbour.
    const int probe = u ? *u : g.neighbors(v).front();
    EdgeInfo e = edge_info(sys, g, fr, f, omega, v, probe);
    out.B = e.B;
    out.matching = e.matching;
    if (u) {
        out.A = e.A;
        out.restricted = e.restricted;
    }
    out.highly_energetic = !out.non_dominant && !out.unbalanced && out.B == 0;
    out.all_restricted = all_edges_restricted(sys, g, fr, f, omega, v);

    // At most one R-class of g(N(v)) may escape both exemptions.
    std::vector<Mask> escaping;
    for (const auto& h : omega) {
        if (unbalanced_at(sys, g, fr, h, v, eps, eps_bar) || all_edges_restricted(sys, g, fr, h, omega, v)) continue;
        Mask c = r_closure(sys, neighbour_values(g, h, v));
        if (std::find(escaping.begin(), escaping.end(), c) == escaping.end()) escaping.push_back(c);
    }
    out.unique_pattern = escaping.size() <= 1;
    return out;
}

ScenarioReport scenario_checks(const SpinSystem& sys, const Lattice& g, const DominantFrame& fr,
                               const Configuration& f, const std::vector<Configuration>& omega, int v, int u) {
    check_config(sys, g, f);
    const auto& nb = g.neighbors(v);
    if (std::find(nb.begin(), nb.end(), u) == nb.end()) throw Error("InvalidVertex", "u must be a neighbour of v");
    const Mask fN = neighbour_values(g, f, v);
    const Mask D = r_closure(sys, fN);
    Mask gv = 0, gu = 0;  // values over Omega_{f,v}
    for (const auto& h : omega) {
        check_config(sys, g, h);
        if (r_closure(sys, neighbour_values(g, h, v)) != D) continue;
        gv |= bit(h[static_cast<std::size_t>(v)]);
        gu |= bit(h[static_cast<std::size_t>(u)]);
    }
    auto equiv = [&](Mask side) { return D == r_closure(sys, side); };
    auto name = [&](int P) {
        std::string s = "(";
        for (int i : members(fr.patterns[static_cast<std::size_t>(P)].A)) s += sys.label(i) + " ";
        s += "|";
        for (int i : members(fr.patterns[static_cast<std::size_t>(P)].B)) s += " " + sys.label(i);
        return s + ")";
    };
    ScenarioReport r;
    const int k = fr.size();
    for (int P = 0; P < k; ++P) {
        const Mask bd = fr.bdry[static_cast<std::size_t>(P)];
        const Mask in = fr.inner[static_cast<std::size_t>(P)];
        if (!r.s1 && !equiv(in) && is_subset(gv, bd)) {
            r.s1 = true;
            r.witness1 = name(P);
        }
        if (!r.s3 && !equiv(bd) && is_subset(gu, bd)) {
            r.s3 = true;
            r.witness3 = name(P);
        }
        for (int Q = 0; Q < k; ++Q) {
            if (Q == P || fr.direct_class[static_cast<std::size_t>(P)] != fr.direct_class[static_cast<std::size_t>(Q)]) continue;
            if (!r.s2 && is_subset(gv, bd & fr.bdry[static_cast<std::size_t>(Q)])) {
                r.s2 = true;
                r.witness2 = name(P) + " " + name(Q);
            }
            if (!r.s4 && is_subset(gu, in & fr.inner[static_cast<std::size_t>(Q)])) {
                for (int T = 0; T < k; ++T)
                    if (equiv(fr.inner[static_cast<std::size_t>(T)])) {
                        r.s4 = true;
                        r.witness4 = name(P) + " " + name(Q) + " " + name(T);
                        break;
                    }
            }
        }
    }
    const EdgeInfo e = edge_info(sys, g, fr, f, omega, v, u);
    r.restricted = e.restricted;
    if (r.s1 || r.s2) r.implication_holds = all_edges_restricted(sys, g, fr, f, omega, v);
    if (r.s3 || r.s4) r.implication_holds = r.implication_holds && e.restricted;
    return r;
}

}  // namespace spinlab
