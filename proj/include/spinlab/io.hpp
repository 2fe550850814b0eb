#pragma once

#include "spinlab/breakup.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/kbipartite.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/parameters.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/system.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace spinlab {

using Json = nlohmann::ordered_json;

// Exact values as "p/q" strings (plain integers as "p"); float values as
// JSON numbers.
Json to_json(const Num& x);
Num num_from_json(const Json& j, bool exact);
// Doubles with infinities spelled "inf" / "-inf".
Json real(double x);

// {"states", "activities", "interactions", "mode"}. Unknown keys are ignored,
// so emitted files may carry a "metadata" block. Errors: SchemaError.
SpinSystem system_from_json(const Json& j);
Json system_to_json(const SpinSystem& sys);
SpinSystem load_system(const std::string& path);

Json mask_to_json(const SpinSystem& sys, Mask m);
Json pattern_to_json(const SpinSystem& sys, const Pattern& P);

// "A=1;B=2,3" (labels), or "P<k>" for the k-th dominant pattern.
Pattern parse_pattern(const SpinSystem& sys, const std::string& text);

// "x,y,..." in domain coordinates.
int parse_site(const Lattice& g, const std::string& text);
std::string site_name(const Lattice& g, int v);

// Configurations list one state label per lattice vertex (row-major, halo
// included) under "values"; a bare array is accepted too. Entries may be
// null for vertices left undefined.
Configuration config_from_json(const SpinSystem& sys, const Lattice& g, const Json& j);
Json config_to_json(const SpinSystem& sys, const Lattice& g, const Configuration& f);

Json catalog_to_json(const SpinSystem& sys, const PatternCatalog& cat);
Json parameters_to_json(const ParameterReport& r);
Json condition_to_json(const ConditionReport& r);
Json lemma81_to_json(const Lemma81Report& r);
Json main_condition_to_json(const MainConditionReport& r);
Json exact_to_json(const SpinSystem& sys, const Lattice& g, const ExactMeasure& m, const std::vector<int>& sites);
Json mcmc_to_json(const SpinSystem& sys, const Lattice& g, const McmcResult& r);
Json vertex_set_to_json(const Lattice& g, const VertexSet& U);
Json breakup_to_json(const SpinSystem& sys, const Lattice& g, const BreakupResult& b,
                     const std::vector<Violation>& violations);

// FNV-1a over the bytes, as 16 hex digits.
std::string fnv1a64(const std::string& bytes);

}  // namespace spinlab
