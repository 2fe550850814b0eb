#pragma once

#include "spinlab/number.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/subset.hpp"
#include "spinlab/system.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spinlab {

// Function families psi: [2d] -> S on the left side of K_{2d,2d}.
struct ClassSpec {
    enum class Kind { full, one, two, balanced };
    Kind kind = Kind::full;
    Mask J = 0;
    double eps = 0.5;
    double eps_bar = 0.5;
};

const char* class_kind_name(ClassSpec::Kind k);

struct PsiSpec {
    enum class Kind { explicit_list, product, class_, class_minus, class_intersect_product };
    Kind kind = Kind::product;
    std::vector<std::vector<int>> functions;  // explicit_list
    std::vector<Mask> coords;                 // product and class_intersect_product
    ClassSpec cls;
    ClassSpec minus;  // class_minus: cls \ minus

    static PsiSpec explicit_of(std::vector<std::vector<int>> fs);
    static PsiSpec product_of(std::vector<Mask> coords);
    static PsiSpec full_product(const SpinSystem& sys, std::int64_t d);
    static PsiSpec class_of(ClassSpec c);
    static PsiSpec difference(ClassSpec a, ClassSpec b);
    static PsiSpec restricted(ClassSpec c, std::vector<Mask> coords);
};

// Text forms accepted by the CLI:
//   class:J=a,b:full|one|two|balanced|unbalanced[:eps=x][:epsbar=y]
//   product:all  |  product:a,b;c;...   (one set per coordinate)
//   explicit:a,b;b,a                     (one function per entry)
//   <class form>&<product form>          (intersection)
PsiSpec parse_psi(const SpinSystem& sys, std::int64_t d, const std::string& text);
std::string psi_to_string(const SpinSystem& sys, const PsiSpec& spec);

// "all" or a comma-separated list of labels.
Mask parse_state_set(const SpinSystem& sys, const std::string& text);

// Membership of a single function, evaluated from the definitions over all
// subsets. Used by the brute-force path and by tests.
bool psi_member(const SpinSystem& sys, const PatternCatalog& cat, std::int64_t d, const PsiSpec& spec,
                const std::vector<int>& psi);

// All functions of the family, enumerated over S^{2d}. Guard: |S|^{2d} <= 5^6.
std::vector<std::vector<int>> expand_psi(const SpinSystem& sys, std::int64_t d, const PsiSpec& spec);

// Direct sum over an explicit list. Guard: 2d <= 6 and |S| <= 5.
Num z_bruteforce(const SpinSystem& sys, std::int64_t d, const std::vector<std::vector<int>>& psis, Mask I);

// Sum over multiplicity vectors with multinomial (or, for product
// constraints, dynamic-programming) counts. Float systems are rationalized
// with denominators <= 1e9 first.
Num z_compositions(const SpinSystem& sys, std::int64_t d, const PsiSpec& spec, Mask I);

// Exact for rational systems; for a float system the rationalized copy and
// the largest relative change of any value.
struct Rationalized {
    SpinSystem system;
    double max_rel_error = 0;
};
Rationalized rationalized(const SpinSystem& sys, unsigned long max_den = 1000000000UL);

// Weight of functions [n] -> A whose image lies in no R-set strictly inside A.
Num lambda_restricted_power(const SpinSystem& sys, Mask A, std::int64_t n);

// (1/(4d)) log Z(S^{[2d]}, S).
double shearer_global_bound(const SpinSystem& sys, std::int64_t d);

struct LeftPolicy {
    int max_restricted = 3;
    int random_samples = 100;
    std::uint64_t seed = 0;
};

struct ConditionLine {
    std::string inequality;  // restricted-left, restricted-right, unbalanced, highly-energetic, non-dominant
    std::string J;           // dominant side, empty for non-dominant
    std::string detail;      // the tested Psi or I
    int k = 0;               // k_Psi for restricted-left
    double log_lhs = 0;
    double log_rhs = 0;
    bool holds = false;
    // Largest alpha for which this line holds with the other parameters fixed.
    double tight_alpha = 0;
};

struct MainConditionReport {
    std::int64_t d = 1;
    double alpha = 0;
    double gamma = 0;
    double eps = 0;
    double eps_bar = 0;
    LeftPolicy policy;
    std::vector<ConditionLine> lines;
    std::size_t restricted_left_tested = 0;
    bool pass = false;
    double tight_alpha = 0;
    // Right-hand side of the alpha requirement, to be compared with c * alpha.
    double alpha_requirement = 0;
    double rationalization_error = 0;
};

MainConditionReport verify_main_condition(const SpinSystem& sys, std::int64_t d, double alpha, double gamma,
                                          double eps, double eps_bar, const LeftPolicy& policy = {});

}  // namespace spinlab
