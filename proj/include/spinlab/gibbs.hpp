#pragma once

#include "spinlab/lattice.hpp"
#include "spinlab/number.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/rng.hpp"
#include "spinlab/system.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace spinlab {

// The finite domain is the interior of the lattice (all of a torus). Its
// internal boundary is the set of interior vertices with fewer than 2d
// interior neighbours; a torus has none.
VertexSet domain_boundary(const Lattice& g);

// Values allowed at each vertex: the pattern side on the domain boundary
// (A at even, B at odd vertices), all of S elsewhere in the domain, nothing
// outside it.
std::vector<Mask> allowed_values(const SpinSystem& sys, const Lattice& g, const std::optional<Pattern>& boundary);

bool in_pattern(const Lattice& g, int v, int value, const Pattern& P);

// Weight of a configuration restricted to the domain (vertices and edges
// with both ends inside). Outside entries are ignored.
Num domain_weight(const SpinSystem& sys, const Lattice& g, const Configuration& f);

bool admissible(const SpinSystem& sys, const Lattice& g, const Configuration& f);

struct ExactMeasure {
    Num Z;
    double log_Z = 0;
    // marginals[v][i] = Pr(f(v) = i); empty rows outside the domain.
    std::vector<std::vector<Num>> marginals;
    // Pr(v is not in the boundary pattern); empty without a boundary pattern.
    std::vector<Num> not_in_pattern;
};

// Transfer matrix along the first axis. Rational systems are evaluated
// exactly; float systems in doubles with per-slice rescaling.
ExactMeasure exact_measure(const SpinSystem& sys, const Lattice& g, const std::optional<Pattern>& boundary);

// (1/|V|) log Z for the free measure on a torus.
double log_z_per_vertex(const SpinSystem& sys, const Lattice& torus);
// Exact Z on a torus for a rational system.
mpq_class torus_partition_function(const SpinSystem& sys, const Lattice& torus);

struct McmcOptions {
    std::int64_t sweeps = 0;
    std::int64_t burn_in = 0;
    std::uint64_t seed = 0;
    bool random_site = false;
    bool waiver = false;
    int batches = 50;
    std::vector<int> sites;    // vertices whose marginals are estimated
    std::int64_t thin = 0;     // emit a sample every `thin` sweeps (0: never)
    std::optional<Configuration> initial;
};

struct SiteEstimate {
    int site = 0;
    std::vector<double> mean;
    std::vector<double> std_error;
    double not_in_pattern = 0;
    double not_in_pattern_se = 0;
};

struct McmcResult {
    Configuration final_state;
    std::vector<SiteEstimate> estimates;
    bool irreducibility_proven = false;
    std::string caveat;
    std::int64_t sweeps = 0;
    std::int64_t updates = 0;
};

// Tiles the domain with the boundary pattern (or the first dominant pattern
// when there is none), choosing the most active state on each side.
Configuration pattern_tiling(const SpinSystem& sys, const Lattice& g, const Pattern& P);

// True when every vertex has a value compatible with all values its
// neighbours may take, so every admissible state reaches a common one.
bool local_irreducibility_probe(const SpinSystem& sys, const Lattice& g, const std::vector<Mask>& allowed);

// Conditional law of f(v) given the rest, over the allowed values of v.
std::vector<double> heat_bath_kernel(const SpinSystem& sys, const Lattice& g, const std::vector<Mask>& allowed,
                                     const Configuration& f, int v);

using SampleSink = std::function<void(std::int64_t sweep, const Configuration&)>;

McmcResult mcmc_sample(const SpinSystem& sys, const Lattice& g, const std::optional<Pattern>& boundary,
                       const McmcOptions& opt, const SampleSink& sink = {});

// Values outside the domain drawn independently, proportional to activity,
// from the pattern side of each vertex.
void extend_outside(const SpinSystem& sys, const Lattice& g, Configuration& f, const Pattern& P, Philox& rng);

}  // namespace spinlab
