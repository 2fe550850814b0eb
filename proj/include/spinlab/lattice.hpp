#pragma once

#include "spinlab/system.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

using VertexSet = std::vector<char>;  // membership flag per vertex

// A finite box of Z^d (optionally surrounded by a one-layer halo) or an
// even-sided torus. Vertices are indexed row-major with the first axis
// slowest; parity is the coordinate sum mod 2.
class Lattice {
public:
    enum class Kind { box, torus };

    static Lattice box(std::vector<int> sides, bool halo);
    static Lattice torus(std::vector<int> sides);
    // "box:4x4", "box:4x4+halo", "torus:4x4x4"
    static Lattice parse(const std::string& spec);

    Kind kind() const { return kind_; }
    int dim() const { return static_cast<int>(sides_.size()); }
    const std::vector<int>& sides() const { return sides_; }
    bool has_halo() const { return halo_; }
    std::string spec() const;

    int size() const { return static_cast<int>(adj_.size()); }
    const std::vector<int>& neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
    int parity(int v) const { return parity_[static_cast<std::size_t>(v)]; }
    bool is_odd(int v) const { return parity(v) == 1; }
    bool is_even(int v) const { return parity(v) == 0; }
    bool exterior(int v) const { return exterior_[static_cast<std::size_t>(v)] != 0; }

    // Coordinates of v; halo coordinates are -1 or side.
    std::vector<int> coords(int v) const;
    // Vertex at the given coordinates, or -1 when outside the graph.
    int index(const std::vector<int>& c) const;
    std::vector<std::pair<int, int>> edges() const;

    // Interior vertices (all vertices of a torus or halo-free box).
    VertexSet interior() const;
    VertexSet empty_set() const { return VertexSet(static_cast<std::size_t>(size()), 0); }
    VertexSet full_set() const { return VertexSet(static_cast<std::size_t>(size()), 1); }

    WeightedGraph graph() const;

    // Breadth-first distances from a set of sources (-1 when unreachable).
    std::vector<int> distances(const std::vector<int>& sources) const;
    int distance(int u, int v) const;

private:
    Kind kind_ = Kind::box;
    std::vector<int> sides_;
    bool halo_ = false;
    std::vector<int> extent_;  // per-axis number of stored coordinates
    std::vector<std::vector<int>> adj_;
    std::vector<int> parity_;
    std::vector<char> exterior_;

    void build();
};

std::vector<int> to_list(const VertexSet& U);
VertexSet from_list(const Lattice& g, const std::vector<int>& vs);
int count(const VertexSet& U);
VertexSet set_union(const VertexSet& a, const VertexSet& b);
VertexSet set_intersection(const VertexSet& a, const VertexSet& b);
VertexSet set_difference(const VertexSet& a, const VertexSet& b);
VertexSet complement(const VertexSet& a);
bool subset_of(const VertexSet& a, const VertexSet& b);

VertexSet neighborhood(const Lattice& g, const VertexSet& U);          // N(U)
VertexSet external_boundary(const Lattice& g, const VertexSet& U);     // N(U) \ U
VertexSet internal_boundary(const Lattice& g, const VertexSet& U);     // external boundary of U^c
VertexSet boundary_both(const Lattice& g, const VertexSet& U);         // internal ∪ external
std::vector<std::pair<int, int>> edge_boundary(const Lattice& g, const VertexSet& U);  // (u in U, w not in U)
VertexSet plus(const Lattice& g, const VertexSet& U, int r = 1);       // {v : dist(v, U) <= r}
VertexSet n_t(const Lattice& g, const VertexSet& U, double t);         // {v : |N(v) ∩ U| >= t}

bool is_odd_set(const Lattice& g, const VertexSet& U);
bool is_even_set(const Lattice& g, const VertexSet& U);
// U = (Even ∩ U)^+ and U^c = (Odd ∩ U^c)^+. The empty set qualifies.
bool is_regular_odd_set(const Lattice& g, const VertexSet& U);
bool is_regular_even_set(const Lattice& g, const VertexSet& U);

struct OddBoundaryIdentity {
    long edge_boundary = 0;
    double boundary_over_2d = 0;  // |∂U| / 2d
    long odd_minus_even = 0;      // |Odd ∩ U| - |Even ∩ U|
    bool holds = false;
};

// Both sides of the identity |∂U|/2d = |Odd ∩ U| - |Even ∩ U| for a finite odd
// set. Boxes need U clear of the outermost layer; on tori every component of U
// must leave some coordinate value unused on every axis (WrappingSet).
OddBoundaryIdentity odd_boundary_identity(const Lattice& g, const VertexSet& U);

bool is_connected(const Lattice& g, const VertexSet& U);
bool is_co_connected(const Lattice& g, const VertexSet& U);

constexpr int kInfinity = -1;

// Complement of the component of U^c containing v; all of V when v ∈ U.
// v = kInfinity anchors at the halo of a box (every halo vertex outside U).
VertexSet co_connected_closure(const Lattice& g, const VertexSet& U, int v);

// Components of U where two vertices are adjacent when their distance in the
// lattice is at most r.
std::vector<std::vector<int>> components(const Lattice& g, const VertexSet& U, int r = 1);

// Largest lattice distance between two members; -1 for the empty set.
int diameter(const Lattice& g, const std::vector<int>& U);

// 2m + diam U_1 + ... + diam U_m over the r=2 components.
long diam_star(const Lattice& g, const VertexSet& U);

}  // namespace spinlab
