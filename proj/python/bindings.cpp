#include "spinlab/breakup.hpp"
#include "spinlab/catalog.hpp"
#include "spinlab/error.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/io.hpp"
#include "spinlab/kbipartite.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/parameters.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/rng.hpp"
#include "spinlab/system.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace spinlab;

// Every entry point takes and returns JSON text; the Python layer converts to
// and from dicts so the wire format is the one the CLI writes.
namespace {

Json parse(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error("SchemaError", std::string("invalid JSON: ") + e.what());
    }
}

SpinSystem sys_of(const std::string& text) { return system_from_json(parse(text)); }

std::optional<Pattern> optional_pattern(const SpinSystem& sys, const std::optional<std::string>& text) {
    if (!text || text->empty()) return std::nullopt;
    return parse_pattern(sys, *text);
}

std::vector<int> sites_of(const Lattice& g, const std::vector<std::string>& texts) {
    std::vector<int> out;
    for (const auto& t : texts) out.push_back(parse_site(g, t));
    if (out.empty()) {
        std::vector<int> c;
        for (int s : g.sides()) c.push_back(s / 2);
        out.push_back(g.index(c));
    }
    return out;
}

std::string catalog(const std::string& name, std::optional<int> q, std::optional<int> m,
                    std::optional<std::string> lambda, std::optional<std::string> lambda_e,
                    std::optional<std::string> lambda_o, std::optional<std::string> exp_neg_beta,
                    std::optional<double> beta, std::optional<double> h) {
    CatalogEntry e;
    e.model = model_from_name(name);
    e.params.q = q;
    e.params.m = m;
    if (lambda) e.params.lambda = Num::parse(*lambda, true);
    if (lambda_e) e.params.lambda_e = Num::parse(*lambda_e, true);
    if (lambda_o) e.params.lambda_o = Num::parse(*lambda_o, true);
    if (exp_neg_beta) e.params.exp_neg_beta = Num::parse(*exp_neg_beta, true);
    e.params.beta = beta;
    e.params.h = h;
    return system_to_json(build(e)).dump();
}

std::string analyze(const std::string& system, std::optional<std::int64_t> d) {
    const SpinSystem sys = sys_of(system);
    Json body = catalog_to_json(sys, analyze_patterns(sys));
    body["parameters"] = parameters_to_json(compute_parameters(sys, d));
    return body.dump();
}

std::string check(const std::string& system, std::int64_t d, const std::string& condition, double C,
                  std::optional<std::int64_t> s) {
    return condition_to_json(check_condition(sys_of(system), d, condition_from_name(condition), C, s)).dump();
}

std::string zfun(const std::string& system, std::int64_t d, const std::string& psi, const std::string& I_text,
                 const std::string& method) {
    const SpinSystem sys = sys_of(system);
    const PsiSpec spec = parse_psi(sys, d, psi);
    const Mask I = parse_state_set(sys, I_text);
    if (method != "compositions" && method != "bruteforce" && method != "both")
        throw Error("SchemaError", "method must be compositions, bruteforce or both");
    std::optional<Num> zc, zb;
    if (method != "bruteforce") zc = z_compositions(sys, d, spec, I);
    if (method != "compositions") zb = z_bruteforce(sys, d, expand_psi(sys, d, spec), I);
    const Num& z = zc ? *zc : *zb;
    Json body{{"d", d}, {"psi", psi_to_string(sys, spec)}, {"I", mask_to_json(sys, I)}, {"Z", to_json(z)},
              {"log_Z", real(z.log())}};
    if (zc && zb) {
        body["Z_bruteforce"] = to_json(*zb);
        body["agree"] = sys.exact() ? (*zc == *zb) : near_equal(*zc, *zb, 1e-9);
    }
    return body.dump();
}

std::string verify_condition(const std::string& system, std::int64_t d, std::optional<double> alpha,
                             std::optional<double> gamma, std::optional<double> eps, std::optional<double> eps_bar,
                             double c, int max_restricted, int random_samples, std::uint64_t seed) {
    const SpinSystem sys = sys_of(system);
    CondParams p = default_cond_params(sys, d, alpha);
    if (gamma) p.gamma = *gamma;
    if (eps) p.eps = *eps;
    if (eps_bar) p.eps_bar = *eps_bar;
    LeftPolicy policy{max_restricted, random_samples, seed};
    const auto main = verify_main_condition(sys, d, p.alpha, p.gamma, p.eps, p.eps_bar, policy);
    return Json{{"main_condition", main_condition_to_json(main)}, {"lemma81", lemma81_to_json(check_lemma81(sys, d, p, c))}}
        .dump();
}

std::string exact(const std::string& system, const std::string& lattice, const std::optional<std::string>& pattern,
                  const std::vector<std::string>& sites) {
    const SpinSystem sys = sys_of(system);
    const Lattice g = Lattice::parse(lattice);
    const auto P = optional_pattern(sys, pattern);
    const auto vs = sites_of(g, sites);
    ExactMeasure m;
    {
        py::gil_scoped_release release;
        m = exact_measure(sys, g, P);
    }
    Json body = exact_to_json(sys, g, m, vs);
    if (P) body["pattern"] = pattern_to_json(sys, *P);
    return body.dump();
}

std::string mcmc(const std::string& system, const std::string& lattice, const std::optional<std::string>& pattern,
                 std::int64_t sweeps, std::int64_t burn_in, std::uint64_t seed, const std::vector<std::string>& sites,
                 bool random_site, bool waiver, int batches) {
    const SpinSystem sys = sys_of(system);
    const Lattice g = Lattice::parse(lattice);
    const auto P = optional_pattern(sys, pattern);
    McmcOptions opt;
    opt.sweeps = sweeps;
    opt.burn_in = burn_in;
    opt.seed = seed;
    opt.random_site = random_site;
    opt.waiver = waiver;
    opt.batches = batches;
    opt.sites = sites_of(g, sites);
    McmcResult r;
    {
        py::gil_scoped_release release;
        r = mcmc_sample(sys, g, P, opt);
    }
    Json body = mcmc_to_json(sys, g, r);
    body["final_state"] = config_to_json(sys, g, r.final_state);
    body["rng"] = Philox::kAlgorithm;
    return body.dump();
}

std::string breakup(const std::string& system, const std::string& lattice, const std::string& config,
                    const std::optional<std::string>& pattern, const std::vector<std::string>& seen) {
    const SpinSystem sys = sys_of(system);
    const Lattice g = Lattice::parse(lattice);
    const Configuration f = config_from_json(sys, g, parse(config));
    const Pattern P0 = parse_pattern(sys, pattern && !pattern->empty() ? *pattern : "P0");
    std::vector<int> V;
    for (const auto& s : seen) V.push_back(parse_site(g, s));
    const BreakupResult b = construct_breakup(sys, g, f, P0, V);
    return breakup_to_json(sys, g, b, verify_breakup(sys, g, b.atlas, f, P0)).dump();
}

std::string reweight_system(const std::string& system, const std::vector<std::string>& multipliers, int d) {
    const SpinSystem sys = sys_of(system);
    std::vector<Num> m;
    for (const auto& t : multipliers) m.push_back(Num::parse(t, sys.exact()));
    return system_to_json(reweight(sys, m, d)).dump();
}

std::string product_system(const std::string& a, const std::string& b) {
    return system_to_json(product(sys_of(a), sys_of(b))).dump();
}

std::string project_system(const std::string& system) { return system_to_json(project_from_doubled(sys_of(system))).dump(); }

std::string cover_system(const std::string& system) {
    const SpinSystem sys = sys_of(system);
    const Cover c = bipartite_cover(sys);
    Json body = system_to_json(c.system);
    Json phi = Json::array();
    for (int i : c.phi) phi.push_back(sys.label(i));
    body["phi"] = phi;
    return body.dump();
}

std::string lift_check(const std::string& system, int states, const std::vector<std::pair<int, int>>& edges,
                       const std::vector<int>& phi) {
    const LiftCheck r = check_lift_permitting(sys_of(system), states, edges, phi);
    return Json{{"status", lift_status_name(r.status)}, {"ok", r.ok()}, {"detail", r.detail}}.dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Native core of spinlab; see the spinlab package for the dict-based API.";

    static py::object error_type = py::module_::import("spinlab._errors").attr("SpinlabError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object err = error_type(e.kind(), std::string(e.what()));
            PyErr_SetObject(error_type.ptr(), err.ptr());
        }
    });

    m.def("catalog", &catalog, py::arg("name"), py::arg("q") = py::none(), py::arg("m") = py::none(),
          py::arg("lambda_") = py::none(), py::arg("lambda_e") = py::none(), py::arg("lambda_o") = py::none(),
          py::arg("exp_neg_beta") = py::none(), py::arg("beta") = py::none(), py::arg("h") = py::none());
    m.def("analyze", &analyze, py::arg("system"), py::arg("d") = py::none());
    m.def("check", &check, py::arg("system"), py::arg("d"), py::arg("condition") = "simple", py::arg("C") = 1.0,
          py::arg("s") = py::none());
    m.def("zfun", &zfun, py::arg("system"), py::arg("d"), py::arg("psi"), py::arg("I") = "all",
          py::arg("method") = "compositions");
    m.def("verify_condition", &verify_condition, py::arg("system"), py::arg("d"), py::arg("alpha") = py::none(),
          py::arg("gamma") = py::none(), py::arg("eps") = py::none(), py::arg("eps_bar") = py::none(),
          py::arg("c") = 1.0, py::arg("max_restricted") = 3, py::arg("random_samples") = 100, py::arg("seed") = 0);
    m.def("exact", &exact, py::arg("system"), py::arg("lattice"), py::arg("pattern") = py::none(),
          py::arg("sites") = std::vector<std::string>{});
    m.def("mcmc", &mcmc, py::arg("system"), py::arg("lattice"), py::arg("pattern") = py::none(), py::arg("sweeps") = 1000,
          py::arg("burn_in") = 0, py::arg("seed") = 0, py::arg("sites") = std::vector<std::string>{},
          py::arg("random_site") = false, py::arg("waiver") = false, py::arg("batches") = 50);
    m.def("breakup", &breakup, py::arg("system"), py::arg("lattice"), py::arg("config"), py::arg("pattern") = py::none(),
          py::arg("seen") = std::vector<std::string>{});
    m.def("reweight", &reweight_system, py::arg("system"), py::arg("multipliers"), py::arg("d"));
    m.def("product", &product_system, py::arg("a"), py::arg("b"));
    m.def("project", &project_system, py::arg("system"));
    m.def("cover", &cover_system, py::arg("system"));
    m.def("lift_check", &lift_check, py::arg("system"), py::arg("states"), py::arg("edges"), py::arg("phi"));
    m.attr("rng_algorithm") = Philox::kAlgorithm;
}
