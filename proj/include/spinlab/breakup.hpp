#pragma once

#include "spinlab/lattice.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spinlab {

// Dominant patterns oriented against a reference pattern P0. Patterns
// direct-equivalent to P0 keep their orientation (bdry = A, int = B, P-even =
// even); the others are flipped (bdry = B, int = A, P-even = odd).
struct DominantFrame {
    std::vector<Pattern> patterns;
    std::vector<Mask> bdry;
    std::vector<Mask> inner;
    std::vector<char> direct_to_p0;
    std::vector<int> direct_class;  // direct-equivalence class id per pattern
    int p0 = -1;

    int size() const { return static_cast<int>(patterns.size()); }
    bool p_even(const Lattice& g, int P, int v) const {
        return direct_to_p0[static_cast<std::size_t>(P)] ? g.is_even(v) : g.is_odd(v);
    }
    // v is in the P-pattern when value lies on v's side of P.
    bool in_phase(const Lattice& g, int P, int v, int value) const {
        return contains(p_even(g, P, v) ? bdry[static_cast<std::size_t>(P)] : inner[static_cast<std::size_t>(P)], value);
    }
};

// Errors: NotDominant when P0 is not a dominant pattern,
// DominantPatternsNotEquivalent when the dominant patterns are not all
// equivalent.
DominantFrame dominant_frame(const SpinSystem& sys, const Pattern& P0);

Mask values_on(const Lattice& g, const Configuration& f, const std::vector<int>& vs);
Mask neighbour_values(const Lattice& g, const Configuration& f, int v);

struct RegionReport {
    DominantFrame frame;
    std::vector<VertexSet> S;       // vertices in the P-pattern
    std::vector<VertexSet> T;       // P-odd vertices whose neighbours all take P_bdry values
    std::vector<VertexSet> Z;       // T^+
    std::vector<VertexSet> Zprime;  // (T \ S)^+
    VertexSet none, overlap, defect, star;
};

// Everything is evaluated on the finite graph with its own neighbourhoods;
// halo vertices in the outer layer have truncated neighbourhoods.
RegionReport compute_regions(const SpinSystem& sys, const Lattice& g, const Configuration& f, const Pattern& P0);

// Vertices of the outer layer (fewer than 2d neighbours) stand in for
// infinity. Requires a box with a halo (NoInfinity otherwise).
VertexSet frontier(const Lattice& g);

// Union of the components of star^{+5} that meet the frontier or separate
// some vertex of V from it (a vertex inside a component counts as separated).
VertexSet seen_from(const Lattice& g, const VertexSet& star, const std::vector<int>& V);

struct Atlas {
    std::vector<Pattern> patterns;
    std::vector<VertexSet> X;
    std::vector<VertexSet> Xprime;
};

struct AtlasDerived {
    VertexSet none, overlap, defect, star, star5;
    long L = 0;  // |union of edge boundaries of X_P|
    long M = 0;  // |X_overlap ∪ X_defect|
    long N = 0;  // |X_none|
};

AtlasDerived derive(const Lattice& g, const Atlas& X);

struct BreakupResult {
    Atlas atlas;
    AtlasDerived derived;
    RegionReport regions;
    VertexSet seen_from_regions;  // Z_*^{+5}(f, V) from the regions
    bool matches_regions = false; // X_*^{+5} equals seen_from_regions
    std::vector<int> pattern_of_hole;  // P_A for every component A of (X_*^{+5})^c
};

// Errors: BoundaryNotInPattern when the halo or the domain boundary leaves the
// P0-pattern; InvalidVertex when V leaves the domain.
BreakupResult construct_breakup(const SpinSystem& sys, const Lattice& g, const Configuration& f, const Pattern& P0,
                                const std::vector<int>& V);

struct Violation {
    std::string rule;  // atlas, outside, odd-iff, even-iff, even-value, odd-value, none-odd, edge, defect
    int pattern = -1;
    int vertex = -1;
    std::string detail;
};

std::vector<Violation> verify_breakup(const SpinSystem& sys, const Lattice& g, const Atlas& X, const Configuration& f,
                                      const Pattern& P0);

struct Diagnostics {
    Mask neighbour_values = 0;
    Mask D = 0;          // R(f(N(v)))
    bool non_dominant = false;
    bool unbalanced = false;
    bool highly_energetic = false;
    bool unique_pattern = false;
    bool all_restricted = false;      // every edge out of v
    std::optional<bool> restricted;   // the edge (v, u) when u is given
    Mask A = 0;          // values of u over the matching configurations
    Mask B = 0;          // values of v over the matching configurations, within D
    int matching = 0;    // |Omega_{f,v}|
};

Diagnostics classify(const SpinSystem& sys, const Lattice& g, const DominantFrame& frame, const Configuration& f,
                     const std::vector<Configuration>& omega, int v, std::optional<int> u, double eps, double eps_bar);

struct ScenarioReport {
    bool s1 = false, s2 = false, s3 = false, s4 = false;
    std::string witness1, witness2, witness3, witness4;
    bool restricted = false;
    bool implication_holds = true;  // every firing scenario comes with a restricted edge
};

ScenarioReport scenario_checks(const SpinSystem& sys, const Lattice& g, const DominantFrame& frame,
                               const Configuration& f, const std::vector<Configuration>& omega, int v, int u);

}  // namespace spinlab
