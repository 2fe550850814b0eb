#pragma once

#include "spinlab/catalog.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/system.hpp"

#include <string>
#include <vector>

namespace helpers {

using namespace spinlab;

inline SpinSystem af_potts(int q, const Num& t) {
    CatalogParams p;
    p.q = q;
    p.exp_neg_beta = t;
    return build({Model::af_potts, p});
}

inline SpinSystem af_potts_beta(int q, double beta) {
    CatalogParams p;
    p.q = q;
    p.beta = beta;
    return build({Model::af_potts, p});
}

inline SpinSystem coloring(int q) { return af_potts(q, Num(0)); }

inline SpinSystem hard_core(const Num& lambda) {
    CatalogParams p;
    p.lambda = lambda;
    return build({Model::hard_core, p});
}

inline SpinSystem beach(const Num& lambda) {
    CatalogParams p;
    p.lambda = lambda;
    return build({Model::beach, p});
}

// Mask from state labels.
inline Mask labels(const SpinSystem& sys, const std::vector<std::string>& ls) {
    Mask m = 0;
    for (const auto& l : ls) m |= bit(sys.index_of(l));
    return m;
}

inline Pattern pattern(const SpinSystem& sys, const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return Pattern{labels(sys, a), labels(sys, b), Num(0)};
}

}  // namespace helpers
