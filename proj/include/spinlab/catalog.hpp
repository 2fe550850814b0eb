#pragma once

#include "spinlab/number.hpp"
#include "spinlab/system.hpp"

#include <optional>
#include <string>
#include <vector>

namespace spinlab {

enum class Model {
    af_potts,
    af_potts_field,
    af_ising_field,
    hard_core,
    hard_core_unequal,
    widom_rowlinson,
    clock,
    beach,
    multi_wr,
    anti_wr,
    multi_beach,
    multi_occupancy_hc_v1,
    multi_occupancy_hc_v2,
};

const std::vector<Model>& all_models();
std::string model_name(Model m);
Model model_from_name(const std::string& name);

// Temperature may be given as an exact e^{-beta} or as beta itself
// (finite beta makes the system float-mode; infinite beta is exact).
struct CatalogParams {
    std::optional<int> q;
    std::optional<int> m;
    std::optional<Num> lambda;
    std::optional<Num> lambda_e;
    std::optional<Num> lambda_o;
    std::optional<Num> exp_neg_beta;
    std::optional<double> beta;
    std::optional<double> h;
};

struct CatalogEntry {
    Model model;
    CatalogParams params;
};

SpinSystem build(const CatalogEntry& entry);

// A reciprocal parameter that may be infinite (the parameter itself is zero).
struct InvValue {
    bool infinite = false;
    Num value;

    static InvValue inf() { return {true, Num(0)}; }
    std::string str() const { return infinite ? "inf" : value.str(); }
};

bool same_inv(const InvValue& a, const InvValue& b, double rel_tol = 1e-12);

struct ExpectedParameters {
    Num omega_dom;
    InvValue inv_rho_bulk;
    InvValue inv_rho_bdry;
};

// Closed forms from the published parameter table. Throws NotTabulated for
// models without a row and at the activity values where a row splits.
ExpectedParameters expected_parameters(const CatalogEntry& entry);

}  // namespace spinlab
