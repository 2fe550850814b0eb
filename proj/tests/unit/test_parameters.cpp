#include "doctest.h"
#include "helpers.hpp"

#include "spinlab/error.hpp"
#include "spinlab/parameters.hpp"

#include <algorithm>
#include <cmath>

using namespace spinlab;
using namespace helpers;

TEST_SUITE("parameters") {

TEST_CASE("alpha0 from the pattern ratios") {
    // AF Potts q=4 at exp(-beta)=1/3: bulk 3/4, boundary 1/2, rho_int 1/3.
    auto sys = af_potts(4, Num(mpq_class(1, 3)));
    auto bp = compute_parameters(sys).base;
    CHECK(bp.rho_int == Num(mpq_class(1, 3)));
    CHECK(bp.rho_bulk == Num(mpq_class(3, 4)));
    CHECK(bp.rho_bdry == Num(mpq_class(1, 2)));
    const double want = -std::log(std::max(0.75, 1.0 - 0.5 * (1.0 - std::sqrt(1.0 / 3.0))));
    CHECK(bp.alpha0 == doctest::Approx(want).epsilon(1e-12));

    auto hc = compute_parameters(hard_core(Num(1))).base;
    CHECK(hc.alpha0 == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(hc.homomorphism);
    CHECK(hc.n_dominant == 2);
}

TEST_CASE("simple condition by hand") {
    auto hc = hard_core(Num(1));
    auto big = check_condition(hc, 1000000000000LL, Condition::simple, 1.0);
    REQUIRE(big.inequalities.size() == 2);
    const double ld = std::log(1e12);
    CHECK(big.inequalities[0].rhs == doctest::Approx(2.0 * std::pow(ld, 1.5) / 1000.0).epsilon(1e-12));
    CHECK(big.inequalities[0].rhs == doctest::Approx(0.2905).epsilon(1e-3));
    CHECK(big.inequalities[1].vacuous);
    CHECK(big.pass);
    auto small = check_condition(hc, 100, Condition::simple, 1.0);
    CHECK(!small.pass);
    CHECK(!small.inequalities[0].holds);
    // The constant scales the threshold linearly.
    auto scaled = check_condition(hc, 1000000000000LL, Condition::simple, 3.0);
    CHECK(scaled.inequalities[0].rhs == doctest::Approx(3.0 * big.inequalities[0].rhs));
    CHECK(!scaled.pass);
}

TEST_CASE("alpha requirement arithmetic") {
    const double fq = 1.0, eps = 0.125, gamma = 1e-9;
    const std::int64_t d = 10000;
    const double ld = std::log(1e4), qd = fq + ld;
    const double want = qd * std::sqrt(ld) / 10.0 + qd * ld / (eps * eps * 1e4) + gamma * 1e4 +
                        std::sqrt(gamma * qd * 1e6 * ld);
    CHECK(alpha_requirement(fq, d, eps, gamma) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("inequality margins") {
    auto a = make_inequality("x", 2.0, 1.0);
    CHECK(a.holds);
    CHECK(a.margin == doctest::Approx(2.0));
    auto b = make_inequality("y", 1.0, 0.0);
    CHECK(std::isinf(b.margin));
    auto c = make_inequality("z", 0.5, 1.0);
    CHECK(!c.holds);
}

TEST_CASE("alternative alphas never exceed alpha0") {
    for (int q : {3, 4, 5}) {
        auto sys = af_potts(q, Num(mpq_class(1, 4)));
        auto r = compute_parameters(sys, 1000000);
        REQUIRE(r.alpha1.has_value());
        CHECK(*r.alpha1 <= r.base.alpha0);
        if (r.alpha2) CHECK(*r.alpha2 <= r.base.alpha0 + 1e-12);
    }
}

TEST_CASE("argument errors") {
    auto hc = hard_core(Num(1));
    try {
        check_condition(hc, 1, Condition::simple, 1.0);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == "InvalidDimension");
    }
    CHECK_THROWS_AS(condition_from_name("alt9"), Error);
    CHECK(condition_from_name(condition_name(Condition::alt2)) == Condition::alt2);
}

}
