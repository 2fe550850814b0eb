#include "doctest.h"
#include "helpers.hpp"

#include "spinlab/error.hpp"
#include "spinlab/io.hpp"

#include <limits>
#include <random>

using namespace spinlab;
using namespace helpers;

namespace {

std::string kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    return "";
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("numbers") {
    CHECK(to_json(Num(mpq_class(3, 4))) == Json("3/4"));
    CHECK(to_json(Num(7)) == Json("7"));
    CHECK(num_from_json(Json("3/4"), true) == Num(mpq_class(3, 4)));
    CHECK(num_from_json(Json(5), true) == Num(5));
    CHECK(num_from_json(Json(0.25), false).d() == doctest::Approx(0.25));
    CHECK(kind_of([] { num_from_json(Json(0.25), true); }) == "SchemaError");
    CHECK(real(std::numeric_limits<double>::infinity()) == Json("inf"));
    CHECK(real(-std::numeric_limits<double>::infinity()) == Json("-inf"));
}

TEST_CASE("systems round-trip") {
    for (const auto& sys : {coloring(3), hard_core(Num(mpq_class(2, 3))), beach(Num(2))}) {
        auto j = system_to_json(sys);
        j["metadata"] = {{"note", "ignored"}};
        auto back = system_from_json(j);
        CHECK(system_to_json(back) == system_to_json(sys));
    }
    Json bad = system_to_json(coloring(3));
    bad.erase("activities");
    CHECK(kind_of([&] { system_from_json(bad); }) == "SchemaError");
    CHECK(kind_of([] { system_from_json(Json::array()); }) == "SchemaError");
}

TEST_CASE("pattern text") {
    auto sys = coloring(3);
    auto P = parse_pattern(sys, "A=1;B=2,3");
    CHECK(P.A == labels(sys, {"1"}));
    CHECK(P.B == labels(sys, {"2", "3"}));
    CHECK(P.weight == Num(2));
    CHECK(kind_of([&] { parse_pattern(sys, "A=1;B=1"); }) == "NotAPattern");
    auto P0 = parse_pattern(sys, "P0");
    CHECK(P0.weight == Num(2));
    auto j = pattern_to_json(sys, P);
    CHECK(j["weight"] == Json("2"));
}

TEST_CASE("sites and configurations") {
    auto g = Lattice::box({3, 4}, false);
    const int v = parse_site(g, "2,1");
    CHECK(site_name(g, v) == "2,1");
    CHECK(kind_of([&] { parse_site(g, "2,x"); }) == "InvalidVertex");

    auto sys = coloring(3);
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> pick(0, 2);
    Configuration f(static_cast<std::size_t>(g.size()));
    for (auto& x : f) x = pick(rng);
    auto j = config_to_json(sys, g, f);
    CHECK(config_from_json(sys, g, j) == f);
    Json other = j;
    other["lattice"] = "box:4x4";
    CHECK(kind_of([&] { config_from_json(sys, g, other); }) == "DomainMismatch");
}

TEST_CASE("hash") {
    CHECK(fnv1a64("") == "cbf29ce484222325");
    CHECK(fnv1a64("a") == "af63dc4c8601ec8c");
}

}
