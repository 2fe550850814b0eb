#pragma once

#include "spinlab/number.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spinlab {

// Parameters that do not depend on the dimension, exact in rational mode.
struct BaseParameters {
    Num omega_dom;
    Num rho_int;
    Num rho_bulk;
    Num rho_bdry;
    Num rho_act;
    Num rho_hat_act;
    double alpha0 = 0;
    double frak_q = 0;
    double frak_q_large_side = 0;
    int n_maximal = 0;
    int n_dominant = 0;
    bool homomorphism = false;
    bool near_tie = false;
};

BaseParameters base_parameters(const SpinSystem& sys, const PatternCatalog& cat);

// log of the weight of functions [n] -> A whose image lies in no R-set
// strictly inside A (A must be an R-set). -inf when that weight is zero.
double log_lambda_restricted_power(const SpinSystem& sys, const std::vector<Mask>& rsets, Mask A, std::int64_t n);

// rho-hat-bulk for a given s and d (natural-log form, -inf for an empty max).
double log_rho_hat_bulk(const SpinSystem& sys, const PatternCatalog& cat, const BaseParameters& bp, std::int64_t d,
                        std::int64_t s);

double alpha1(const BaseParameters& bp, std::int64_t d);
double alpha2(const SpinSystem& sys, const PatternCatalog& cat, const BaseParameters& bp, std::int64_t d,
              std::int64_t s);
double log_rho_bulk_star(const SpinSystem& sys, const PatternCatalog& cat, std::int64_t d);
double alpha3(const SpinSystem& sys, const PatternCatalog& cat, const BaseParameters& bp, std::int64_t d);

struct SWindow {
    double lo = 0;        // lower end of the admissible s range
    double hi = 0;        // upper end at the chosen s
    std::int64_t s = 1;   // chosen s
    bool in_window = false;
    bool search_capped = false;
};

struct ParameterReport {
    BaseParameters base;
    std::optional<std::int64_t> d;
    std::optional<double> alpha1;
    std::optional<SWindow> window;
    std::optional<double> rho_hat_bulk;  // at window.s
    std::optional<double> alpha2;
    std::optional<double> rho_bulk_star;
    std::optional<double> alpha3;
};

ParameterReport compute_parameters(const SpinSystem& sys, std::optional<std::int64_t> d = std::nullopt,
                                   std::optional<std::int64_t> s = std::nullopt);

enum class Condition { simple, alt1, alt2, alt3 };

const char* condition_name(Condition c);
Condition condition_from_name(const std::string& s);

struct Inequality {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    bool holds = false;
    double margin = 0;  // lhs / rhs
    bool vacuous = false;
};

Inequality make_inequality(std::string name, double lhs, double rhs);

struct ConditionReport {
    Condition condition = Condition::simple;
    std::int64_t d = 2;
    double C = 1;
    std::optional<std::int64_t> s;
    std::vector<Inequality> inequalities;
    bool pass = false;
    double alpha = 0;
    double alpha_tilde = 0;
};

// Evaluates the chosen condition literally with the caller's constant C.
// For alt2 the integer s is searched over its admissible window unless given.
ConditionReport check_condition(const SpinSystem& sys, std::int64_t d, Condition which, double C,
                                std::optional<std::int64_t> s = std::nullopt);

// Parameters of the general condition on K_{2d,2d}.
struct CondParams {
    double alpha = 0;
    double gamma = 0;
    double gamma_hat = 0;  // rho-hat-act * rho_int^s variant
    double eps = 0;
    double eps_bar = 0;
    std::int64_t s = 1;
};

// Defaults: alpha3 for homomorphism systems and alpha2 otherwise (unless
// alpha is supplied); eps = min{alpha/(64 log d), 1/8}; eps_bar and gamma by
// system type. eps and eps_bar are clamped into [1/(4d), 1/2].
CondParams default_cond_params(const SpinSystem& sys, std::int64_t d, std::optional<double> alpha = std::nullopt);

struct Lemma81Report {
    CondParams params;
    double c = 1;
    std::vector<Inequality> inequalities;
    bool pass = false;
};

Lemma81Report check_lemma81(const SpinSystem& sys, std::int64_t d, const CondParams& p, double c);

// Right-hand side of the alpha requirement (before dividing by c).
double alpha_requirement(double frak_q, std::int64_t d, double eps, double gamma);

}  // namespace spinlab
