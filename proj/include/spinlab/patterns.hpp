#pragma once

#include "spinlab/number.hpp"
#include "spinlab/subset.hpp"
#include "spinlab/system.hpp"

#include <optional>
#include <vector>

namespace spinlab {

struct Pattern {
    Mask A = 0;
    Mask B = 0;
    Num weight;

    bool operator==(const Pattern& o) const { return A == o.A && B == o.B; }
    Pattern reversed() const { return {B, A, weight}; }
};

// Common neighbours of I in the graph of maximal interactions; R(empty) = S.
Mask r_closure(const SpinSystem& sys, Mask I);

// Every R-set (fixed point of R∘R), sorted by mask value. Generated as the
// intersection closure of the maximal-interaction neighbourhoods.
std::vector<Mask> r_sets(const SpinSystem& sys);

// Every pattern satisfies A ⊆ R(B).
bool is_pattern(const SpinSystem& sys, Mask A, Mask B);

// Pairs (A, R(A)) over all R-sets A.
std::vector<Pattern> maximal_patterns(const SpinSystem& sys);

struct Dominance {
    std::vector<Pattern> dominant;
    Num omega_dom;
    // Float mode: a non-dominant maximal pattern lies within 1e-9 relative of
    // the dominant weight; the split is reported, not trusted.
    bool near_tie = false;
};

Dominance dominant_patterns(const SpinSystem& sys);
Dominance dominant_patterns(const SpinSystem& sys, const std::vector<Pattern>& maximal);

// A state bijection preserving activities and interactions that carries P to
// Q. With direct=true it must map A to A' and B to B'; otherwise the sides
// may also be swapped. The witness is re-verified before it is returned.
std::optional<std::vector<int>> find_equivalence(const SpinSystem& sys, const Pattern& P, const Pattern& Q,
                                                 bool direct);

bool all_dominant_equivalent(const SpinSystem& sys);

// log2 of the number of distinct sets {dominant (A,B): I ⊆ A, |A| <= |B|}
// over all I ⊆ S. With large_side=true the condition reads |A| >= |B|.
double frak_q(const SpinSystem& sys, const std::vector<Pattern>& dominant, bool large_side = false);

// Möbius coefficients mu(K, A) over A and the R-sets strictly inside A, so
// that the weight of functions into A whose image lies in no R-set strictly
// inside A is sum_K mu(K, A) * lambda_K^n.
std::vector<std::pair<Mask, long>> mobius_below(const std::vector<Mask>& rsets, Mask A);

struct PatternCatalog {
    std::vector<Mask> r_sets;
    std::vector<Pattern> maximal;
    std::vector<Pattern> dominant;
    Num omega_dom;
    bool near_tie = false;
    std::vector<std::vector<int>> equivalence_classes;  // indices into dominant
    std::vector<std::vector<int>> direct_classes;
    bool all_equivalent = false;
    double frak_q = 0;
    double frak_q_large_side = 0;
};

PatternCatalog analyze_patterns(const SpinSystem& sys);

}  // namespace spinlab
