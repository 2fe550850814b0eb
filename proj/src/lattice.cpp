#include "spinlab/lattice.hpp"

#include "spinlab/error.hpp"

#include <algorithm>
#include <deque>
#include <sstream>

namespace spinlab {

Lattice Lattice::box(std::vector<int> sides, bool halo) {
    if (sides.empty()) throw Error("InvalidLattice", "a box needs at least one axis");
    for (int s : sides)
        if (s < 1) throw Error("InvalidLattice", "box sides must be positive");
    Lattice g;
    g.kind_ = Kind::box;
    g.sides_ = std::move(sides);
    g.halo_ = halo;
    g.build();
    return g;
}

Lattice Lattice::torus(std::vector<int> sides) {
    if (sides.empty()) throw Error("InvalidLattice", "a torus needs at least one axis");
    for (int s : sides)
        if (s < 4 || s % 2 != 0) throw Error("InvalidLattice", "torus sides must be even and at least 4");
    Lattice g;
    g.kind_ = Kind::torus;
    g.sides_ = std::move(sides);
    g.build();
    return g;
}

Lattice Lattice::parse(const std::string& spec) {
    auto colon = spec.find(':');
    if (colon == std::string::npos) throw Error("InvalidLattice", "expected box:... or torus:..., got '" + spec + "'");
    std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
    bool halo = false;
    if (auto p = rest.find("+halo"); p != std::string::npos && p + 5 == rest.size()) {
        halo = true;
        rest = rest.substr(0, p);
    }
    std::vector<int> sides;
    std::stringstream ss(rest);
    std::string tok;
    while (std::getline(ss, tok, 'x')) {
        try {
            std::size_t used = 0;
            int v = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            sides.push_back(v);
        } catch (const std::exception&) {
            throw Error("InvalidLattice", "bad side length '" + tok + "' in '" + spec + "'");
        }
    }
    if (kind == "box") return box(sides, halo);
    if (kind == "torus") {
        if (halo) throw Error("InvalidLattice", "a torus has no halo");
        return torus(sides);
    }
    throw Error("InvalidLattice", "unknown lattice kind '" + kind + "'");
}

std::string Lattice::spec() const {
    std::string s = kind_ == Kind::box ? "box:" : "torus:";
    for (std::size_t i = 0; i < sides_.size(); ++i) s += (i ? "x" : "") + std::to_string(sides_[i]);
    if (halo_) s += "+halo";
    return s;
}

void Lattice::build() {
    const int off = halo_ ? 1 : 0;
    extent_.clear();
    long total = 1;
    for (int s : sides_) {
        extent_.push_back(s + 2 * off);
        total *= s + 2 * off;
    }
    if (total > 50000000) throw ResourceError("TooLarge", "lattice has too many vertices");
    adj_.assign(static_cast<std::size_t>(total), {});
    parity_.assign(static_cast<std::size_t>(total), 0);
    exterior_.assign(static_cast<std::size_t>(total), 0);
    const int d = dim();
    for (int v = 0; v < static_cast<int>(total); ++v) {
        auto c = coords(v);
        long sum = 0;
        bool ext = false;
        for (int a = 0; a < d; ++a) {
            sum += c[static_cast<std::size_t>(a)];
            if (c[static_cast<std::size_t>(a)] < 0 || c[static_cast<std::size_t>(a)] >= sides_[static_cast<std::size_t>(a)]) ext = true;
        }
        parity_[static_cast<std::size_t>(v)] = static_cast<int>(((sum % 2) + 2) % 2);
        exterior_[static_cast<std::size_t>(v)] = ext ? 1 : 0;
        auto& nb = adj_[static_cast<std::size_t>(v)];
        for (int a = 0; a < d; ++a)
            for (int step : {-1, 1}) {
                auto n = c;
                n[static_cast<std::size_t>(a)] += step;
                if (kind_ == Kind::torus) {
                    int L = sides_[static_cast<std::size_t>(a)];
                    n[static_cast<std::size_t>(a)] = (n[static_cast<std::size_t>(a)] % L + L) % L;
                }
                int u = index(n);
                if (u >= 0) nb.push_back(u);
            }
    }
}

std::vector<int> Lattice::coords(int v) const {
    const int off = halo_ ? 1 : 0;
    std::vector<int> c(sides_.size());
    for (int a = dim() - 1; a >= 0; --a) {
        int e = extent_[static_cast<std::size_t>(a)];
        c[static_cast<std::size_t>(a)] = v % e - off;
        v /= e;
    }
    return c;
}

int Lattice::index(const std::vector<int>& c) const {
    const int off = halo_ ? 1 : 0;
    if (c.size() != sides_.size()) return -1;
    long idx = 0;
    for (int a = 0; a < dim(); ++a) {
        int x = c[static_cast<std::size_t>(a)] + off;
        if (x < 0 || x >= extent_[static_cast<std::size_t>(a)]) return -1;
        idx = idx * extent_[static_cast<std::size_t>(a)] + x;
    }
    return static_cast<int>(idx);
}

std::vector<std::pair<int, int>> Lattice::edges() const {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < size(); ++v)
        for (int u : neighbors(v))
            if (v < u) out.emplace_back(v, u);
    return out;
}

VertexSet Lattice::interior() const {
    VertexSet s(static_cast<std::size_t>(size()), 0);
    for (int v = 0; v < size(); ++v) s[static_cast<std::size_t>(v)] = exterior(v) ? 0 : 1;
    return s;
}

WeightedGraph Lattice::graph() const {
    WeightedGraph g;
    g.n = size();
    g.edges = edges();
    g.parity = parity_;
    return g;
}

std::vector<int> Lattice::distances(const std::vector<int>& sources) const {
    std::vector<int> dist(static_cast<std::size_t>(size()), -1);
    std::deque<int> q;
    for (int s : sources)
        if (dist[static_cast<std::size_t>(s)] < 0) {
            dist[static_cast<std::size_t>(s)] = 0;
            q.push_back(s);
        }
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        for (int u : neighbors(v))
            if (dist[static_cast<std::size_t>(u)] < 0) {
                dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
                q.push_back(u);
            }
    }
    return dist;
}

int Lattice::distance(int u, int v) const { return distances({u})[static_cast<std::size_t>(v)]; }

std::vector<int> to_list(const VertexSet& U) {
    std::vector<int> out;
    for (std::size_t i = 0; i < U.size(); ++i)
        if (U[i]) out.push_back(static_cast<int>(i));
    return out;
}

VertexSet from_list(const Lattice& g, const std::vector<int>& vs) {
    VertexSet s = g.empty_set();
    for (int v : vs) {
        if (v < 0 || v >= g.size()) throw Error("InvalidVertex", "vertex index out of range");
        s[static_cast<std::size_t>(v)] = 1;
    }
    return s;
}

int count(const VertexSet& U) { return static_cast<int>(std::count(U.begin(), U.end(), 1)); }

VertexSet set_union(const VertexSet& a, const VertexSet& b) {
    VertexSet r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] || b[i]) ? 1 : 0;
    return r;
}

VertexSet set_intersection(const VertexSet& a, const VertexSet& b) {
    VertexSet r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] && b[i]) ? 1 : 0;
    return r;
}

VertexSet set_difference(const VertexSet& a, const VertexSet& b) {
    VertexSet r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = (a[i] && !b[i]) ? 1 : 0;
    return r;
}

VertexSet complement(const VertexSet& a) {
    VertexSet r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] ? 0 : 1;
    return r;
}

bool subset_of(const VertexSet& a, const VertexSet& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && !b[i]) return false;
    return true;
}

VertexSet neighborhood(const Lattice& g, const VertexSet& U) {
    VertexSet r = g.empty_set();
    for (int v = 0; v < g.size(); ++v)
        if (U[static_cast<std::size_t>(v)])
            for (int u : g.neighbors(v)) r[static_cast<std::size_t>(u)] = 1;
    return r;
}

VertexSet external_boundary(const Lattice& g, const VertexSet& U) { return set_difference(neighborhood(g, U), U); }

VertexSet internal_boundary(const Lattice& g, const VertexSet& U) { return external_boundary(g, complement(U)); }

VertexSet boundary_both(const Lattice& g, const VertexSet& U) {
    return set_union(internal_boundary(g, U), external_boundary(g, U));
}

std::vector<std::pair<int, int>> edge_boundary(const Lattice& g, const VertexSet& U) {
    std::vector<std::pair<int, int>> out;
    for (int v = 0; v < g.size(); ++v)
        if (U[static_cast<std::size_t>(v)])
            for (int u : g.neighbors(v))
                if (!U[static_cast<std::size_t>(u)]) out.emplace_back(v, u);
    return out;
}

VertexSet plus(const Lattice& g, const VertexSet& U, int r) {
    auto dist = g.distances(to_list(U));
    VertexSet s = g.empty_set();
    for (int v = 0; v < g.size(); ++v) {
        int dv = dist[static_cast<std::size_t>(v)];
        s[static_cast<std::size_t>(v)] = (dv >= 0 && dv <= r) ? 1 : 0;
    }
    return s;
}

VertexSet n_t(const Lattice& g, const VertexSet& U, double t) {
    VertexSet s = g.empty_set();
    for (int v = 0; v < g.size(); ++v) {
        int k = 0;
        for (int u : g.neighbors(v)) k += U[static_cast<std::size_t>(u)] ? 1 : 0;
        s[static_cast<std::size_t>(v)] = k >= t ? 1 : 0;
    }
    return s;
}

namespace {

VertexSet with_parity(const Lattice& g, const VertexSet& U, int p) {
    VertexSet s = g.empty_set();
    for (int v = 0; v < g.size(); ++v) s[static_cast<std::size_t>(v)] = (U[static_cast<std::size_t>(v)] && g.parity(v) == p) ? 1 : 0;
    return s;
}

bool boundary_has_parity(const Lattice& g, const VertexSet& U, int p) {
    auto b = internal_boundary(g, U);
    for (int v = 0; v < g.size(); ++v)
        if (b[static_cast<std::size_t>(v)] && g.parity(v) != p) return false;
    return true;
}

bool is_regular(const Lattice& g, const VertexSet& U, int inner) {
    // U = (inner-parity part of U)^+ and U^c = (other-parity part of U^c)^+.
    auto Uc = complement(U);
    return plus(g, with_parity(g, U, inner), 1) == U && plus(g, with_parity(g, Uc, 1 - inner), 1) == Uc;
}

}  // namespace

bool is_odd_set(const Lattice& g, const VertexSet& U) { return boundary_has_parity(g, U, 1); }
bool is_even_set(const Lattice& g, const VertexSet& U) { return boundary_has_parity(g, U, 0); }
bool is_regular_odd_set(const Lattice& g, const VertexSet& U) { return is_regular(g, U, 0); }
bool is_regular_even_set(const Lattice& g, const VertexSet& U) { return is_regular(g, U, 1); }

OddBoundaryIdentity odd_boundary_identity(const Lattice& g, const VertexSet& U) {
    if (!is_odd_set(g, U)) throw Error("NotOddSet", "the internal boundary contains an even vertex");
    const int d = g.dim();
    for (int v : to_list(U))
        if (static_cast<int>(g.neighbors(v).size()) != 2 * d)
            throw Error("NotInterior", "the set touches the outer layer of the box");
    if (g.kind() == Lattice::Kind::torus) {
        for (const auto& comp : components(g, U, 1))
            for (int a = 0; a < d; ++a) {
                std::vector<char> used(static_cast<std::size_t>(g.sides()[static_cast<std::size_t>(a)]), 0);
                for (int v : comp) used[static_cast<std::size_t>(g.coords(v)[static_cast<std::size_t>(a)])] = 1;
                if (std::all_of(used.begin(), used.end(), [](char c) { return c != 0; }))
                    throw Error("WrappingSet", "a component of the set winds around the torus");
            }
    }
    OddBoundaryIdentity r;
    r.edge_boundary = static_cast<long>(edge_boundary(g, U).size());
    r.boundary_over_2d = static_cast<double>(r.edge_boundary) / (2.0 * d);
    for (int v : to_list(U)) r.odd_minus_even += g.is_odd(v) ? 1 : -1;
    r.holds = r.edge_boundary == 2L * d * r.odd_minus_even;
    return r;
}

std::vector<std::vector<int>> components(const Lattice& g, const VertexSet& U, int r) {
    std::vector<std::vector<int>> out;
    std::vector<char> seen(U.size(), 0);
    std::vector<int> stamp(U.size(), -1);
    int clock = 0;
    for (int s = 0; s < g.size(); ++s) {
        if (!U[static_cast<std::size_t>(s)] || seen[static_cast<std::size_t>(s)]) continue;
        std::vector<int> comp{s};
        seen[static_cast<std::size_t>(s)] = 1;
        for (std::size_t h = 0; h < comp.size(); ++h) {
            // Vertices within distance r of comp[h], by a bounded search.
            ++clock;
            std::vector<int> frontier{comp[h]};
            stamp[static_cast<std::size_t>(comp[h])] = clock;
            for (int step = 0; step < r; ++step) {
                std::vector<int> next;
                for (int v : frontier)
                    for (int u : g.neighbors(v)) {
                        if (stamp[static_cast<std::size_t>(u)] == clock) continue;
                        stamp[static_cast<std::size_t>(u)] = clock;
                        next.push_back(u);
                        if (U[static_cast<std::size_t>(u)] && !seen[static_cast<std::size_t>(u)]) {
                            seen[static_cast<std::size_t>(u)] = 1;
                            comp.push_back(u);
                        }
                    }
                frontier = std::move(next);
            }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

bool is_connected(const Lattice& g, const VertexSet& U) { return components(g, U, 1).size() <= 1; }

bool is_co_connected(const Lattice& g, const VertexSet& U) { return is_connected(g, complement(U)); }

VertexSet co_connected_closure(const Lattice& g, const VertexSet& U, int v) {
    std::vector<int> seeds;
    if (v == kInfinity) {
        if (g.kind() != Lattice::Kind::box || !g.has_halo())
            throw Error("NoInfinity", "closure towards infinity needs a box with a halo");
        for (int x = 0; x < g.size(); ++x)
            if (g.exterior(x) && !U[static_cast<std::size_t>(x)]) seeds.push_back(x);
    } else {
        if (v < 0 || v >= g.size()) throw Error("InvalidVertex", "anchor vertex out of range");
        if (!U[static_cast<std::size_t>(v)]) seeds.push_back(v);
    }
    VertexSet reach = g.empty_set();
    std::deque<int> q;
    for (int s : seeds) {
        reach[static_cast<std::size_t>(s)] = 1;
        q.push_back(s);
    }
    while (!q.empty()) {
        int x = q.front();
        q.pop_front();
        for (int u : g.neighbors(x))
            if (!U[static_cast<std::size_t>(u)] && !reach[static_cast<std::size_t>(u)]) {
                reach[static_cast<std::size_t>(u)] = 1;
                q.push_back(u);
            }
    }
    return complement(reach);
}

int diameter(const Lattice& g, const std::vector<int>& U) {
    if (U.empty()) return -1;
    int best = 0;
    for (int s : U) {
        auto dist = g.distances({s});
        for (int t : U) best = std::max(best, dist[static_cast<std::size_t>(t)]);
    }
    return best;
}

long diam_star(const Lattice& g, const VertexSet& U) {
    auto comps = components(g, U, 2);
    long total = 2L * static_cast<long>(comps.size());
    for (const auto& c : comps) total += diameter(g, c);
    return total;
}

}  // namespace spinlab
