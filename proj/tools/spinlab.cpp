#include "spinlab/breakup.hpp"
#include "spinlab/catalog.hpp"
#include "spinlab/error.hpp"
#include "spinlab/gibbs.hpp"
#include "spinlab/io.hpp"
#include "spinlab/kbipartite.hpp"
#include "spinlab/lattice.hpp"
#include "spinlab/parameters.hpp"
#include "spinlab/patterns.hpp"
#include "spinlab/system.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

using namespace spinlab;

namespace {

constexpr const char* kVersion = "0.1.0";

const std::vector<std::string> kSubcommands = {"catalog", "analyze", "check",   "zfun",         "verify-cond",
                                               "exact",   "mcmc",    "breakup", "breakup-scan", "transform"};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("SchemaError", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("SchemaError", what + " is not valid JSON: " + e.what());
    }
}

int threads_setting() {
    const char* env = std::getenv("SPINLAB_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw Error("SchemaError", "SPINLAB_THREADS must be a positive integer");
    return static_cast<int>(n);
}

// Run bookkeeping shared by every subcommand.
struct Run {
    std::string subcommand;
    std::optional<std::string> system_hash;
    std::optional<std::uint64_t> seed;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    Json metadata(bool with_time = true) const {
        Json m;
        m["tool"] = "spinlab";
        m["version"] = kVersion;
        m["subcommand"] = subcommand;
        m["system_hash"] = system_hash ? Json(*system_hash) : Json(nullptr);
        m["seed"] = seed ? Json(*seed) : Json(nullptr);
        // The requested cap; every code path currently runs on one thread.
        m["threads"] = threads_setting();
        if (with_time) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            m["wall_time_s"] = secs;
        } else {
            m["wall_time_s"] = nullptr;
        }
        return m;
    }
};

struct SystemInput {
    std::string path;
    SpinSystem load(Run& run) const {
        const std::string text = read_file(path);
        run.system_hash = fnv1a64(text);
        SpinSystem sys = system_from_json(parse_json_text(text, "'" + path + "'"));
        if (sys.near_tie())
            std::cerr << "warning: the two largest interaction values are within 1e-9 of each other; "
                         "the maximal-interaction graph is fragile\n";
        return sys;
    }
};

void write_text(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error("SchemaError", "cannot write '" + out + "'");
    f << text;
}

void emit_json(const Run& run, const std::string& out, const Json& body) {
    Json j;
    j["metadata"] = run.metadata();
    for (auto it = body.begin(); it != body.end(); ++it) j[it.key()] = it.value();
    write_text(out, j.dump(2) + "\n");
}

void emit_csv(const Run& run, const std::string& out, const std::string& header, const std::vector<std::string>& rows) {
    std::string text = "# " + run.metadata().dump() + "\n" + header + "\n";
    for (const auto& r : rows) text += r + "\n";
    write_text(out, text);
}

std::int64_t parse_count(const std::string& text, const char* what) {
    double x = 0;
    try {
        std::size_t used = 0;
        x = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw Error("SchemaError", std::string(what) + " must be a number, got '" + text + "'");
    }
    if (!(x >= 0) || x > 9.2e18 || std::floor(x) != x)
        throw Error("SchemaError", std::string(what) + " must be a non-negative integer, got '" + text + "'");
    return static_cast<std::int64_t>(x);
}

std::string fmt(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

std::vector<int> parse_sites(const Lattice& g, const std::vector<std::string>& texts) {
    std::vector<int> out;
    for (const auto& t : texts) out.push_back(parse_site(g, t));
    if (out.empty()) {
        std::vector<int> c;
        for (int s : g.sides()) c.push_back(s / 2);
        out.push_back(g.index(c));
    }
    return out;
}

std::optional<Pattern> optional_pattern(const SpinSystem& sys, const std::string& text) {
    if (text.empty()) return std::nullopt;
    return parse_pattern(sys, text);
}

// ---- catalog ----------------------------------------------------------------

struct CatalogArgs {
    std::string name, q, m, lambda, lambda_e, lambda_o, beta, exp_neg_beta, h, out;
};

void run_catalog(Run& run, const CatalogArgs& a) {
    CatalogEntry e;
    e.model = model_from_name(a.name);
    auto integer = [](const std::string& s, const char* what) {
        const auto n = parse_count(s, what);
        if (n > std::numeric_limits<int>::max()) throw Error("ParamOutOfRange", std::string(what) + " is too large");
        return static_cast<int>(n);
    };
    if (!a.q.empty()) e.params.q = integer(a.q, "--q");
    if (!a.m.empty()) e.params.m = integer(a.m, "--m");
    if (!a.lambda.empty()) e.params.lambda = Num::parse(a.lambda, true);
    if (!a.lambda_e.empty()) e.params.lambda_e = Num::parse(a.lambda_e, true);
    if (!a.lambda_o.empty()) e.params.lambda_o = Num::parse(a.lambda_o, true);
    if (!a.exp_neg_beta.empty()) e.params.exp_neg_beta = Num::parse(a.exp_neg_beta, true);
    if (!a.beta.empty()) {
        if (a.beta == "inf") e.params.beta = std::numeric_limits<double>::infinity();
        else e.params.beta = Num::parse(a.beta, false).d();
    }
    if (!a.h.empty()) e.params.h = Num::parse(a.h, false).d();
    const SpinSystem sys = build(e);
    const Json body = system_to_json(sys);
    run.system_hash = fnv1a64(body.dump());
    emit_json(run, a.out, body);
}

// ---- analyze ----------------------------------------------------------------

void run_analyze(Run& run, const SystemInput& in, const std::string& d_text, const std::string& out) {
    const SpinSystem sys = in.load(run);
    const PatternCatalog cat = analyze_patterns(sys);
    Json body = catalog_to_json(sys, cat);
    std::optional<std::int64_t> d;
    if (!d_text.empty()) d = parse_count(d_text, "--d");
    body["parameters"] = parameters_to_json(compute_parameters(sys, d));
    emit_json(run, out, body);
}

// ---- check ------------------------------------------------------------------

struct Sweep {
    double lo = 0, hi = 0;
    int n = 12;
};

Sweep parse_sweep(const std::string& text) {
    // d=lo:hi:geometric[:n]
    Sweep s;
    if (text.rfind("d=", 0) != 0) throw Error("SchemaError", "sweep must look like d=lo:hi:geometric[:n]");
    std::vector<std::string> parts;
    std::stringstream ss(text.substr(2));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() < 3 || parts.size() > 4 || parts[2] != "geometric")
        throw Error("SchemaError", "sweep must look like d=lo:hi:geometric[:n]");
    s.lo = static_cast<double>(parse_count(parts[0], "sweep start"));
    s.hi = static_cast<double>(parse_count(parts[1], "sweep end"));
    if (parts.size() == 4) s.n = static_cast<int>(parse_count(parts[3], "sweep size"));
    if (s.lo < 1 || s.hi < s.lo || s.n < 1) throw Error("SchemaError", "sweep needs 1 <= lo <= hi and n >= 1");
    return s;
}

std::vector<std::int64_t> sweep_points(const Sweep& s) {
    std::vector<std::int64_t> out;
    for (int i = 0; i < s.n; ++i) {
        const double t = s.n == 1 ? 0.0 : static_cast<double>(i) / (s.n - 1);
        const auto d = static_cast<std::int64_t>(std::llround(s.lo * std::pow(s.hi / s.lo, t)));
        if (out.empty() || out.back() != d) out.push_back(d);
    }
    return out;
}

struct CheckArgs {
    std::string d, condition = "simple", C = "1", s, sweep, out;
};

void run_check(Run& run, const SystemInput& in, const CheckArgs& a) {
    const SpinSystem sys = in.load(run);
    const Condition which = condition_from_name(a.condition);
    const double C = Num::parse(a.C, false).d();
    std::optional<std::int64_t> s;
    if (!a.s.empty()) s = parse_count(a.s, "--s");
    if (!a.sweep.empty()) {
        std::vector<std::string> rows;
        std::string header = "d,pass,alpha,alpha_tilde";
        bool named = false;
        for (std::int64_t d : sweep_points(parse_sweep(a.sweep))) {
            const auto r = check_condition(sys, d, which, C, s);
            if (!named) {
                for (const auto& q : r.inequalities) header += "," + q.name + "_margin";
                named = true;
            }
            std::string row = std::to_string(d) + "," + (r.pass ? "1" : "0") + "," + fmt(r.alpha) + "," + fmt(r.alpha_tilde);
            for (const auto& q : r.inequalities) row += "," + fmt(q.margin);
            rows.push_back(row);
        }
        emit_csv(run, a.out, header, rows);
        return;
    }
    if (a.d.empty()) throw Error("SchemaError", "check needs --d or --sweep");
    const auto r = check_condition(sys, parse_count(a.d, "--d"), which, C, s);
    emit_json(run, a.out, condition_to_json(r));
}

// ---- zfun -------------------------------------------------------------------

void run_zfun(Run& run, const SystemInput& in, const std::string& d_text, const std::string& psi_text,
              const std::string& I_text, const std::string& method, const std::string& out) {
    const SpinSystem sys = in.load(run);
    const std::int64_t d = parse_count(d_text, "--d");
    const PsiSpec spec = parse_psi(sys, d, psi_text);
    const Mask I = parse_state_set(sys, I_text);
    Json body;
    body["d"] = d;
    body["psi"] = psi_to_string(sys, spec);
    body["I"] = mask_to_json(sys, I);
    if (method != "compositions" && method != "bruteforce" && method != "both")
        throw Error("SchemaError", "--method must be compositions, bruteforce or both");
    std::optional<Num> zc, zb;
    if (method != "bruteforce") zc = z_compositions(sys, d, spec, I);
    if (method != "compositions") zb = z_bruteforce(sys, d, expand_psi(sys, d, spec), I);
    const Num& z = zc ? *zc : *zb;
    body["Z"] = to_json(z);
    body["log_Z"] = real(z.log());
    if (zc && zb) {
        body["Z_bruteforce"] = to_json(*zb);
        body["agree"] = sys.exact() ? (*zc == *zb) : near_equal(*zc, *zb, 1e-9);
    }
    emit_json(run, out, body);
}

// ---- verify-cond ------------------------------------------------------------

struct VerifyArgs {
    std::string d, alpha, gamma, eps, epsbar, c = "1", out;
    int max_restricted = 3;
    int random_samples = 100;
    std::uint64_t seed = 0;
};

void run_verify(Run& run, const SystemInput& in, const VerifyArgs& a) {
    const SpinSystem sys = in.load(run);
    const std::int64_t d = parse_count(a.d, "--d");
    std::optional<double> alpha;
    if (!a.alpha.empty()) alpha = Num::parse(a.alpha, false).d();
    CondParams p = default_cond_params(sys, d, alpha);
    if (!a.gamma.empty()) p.gamma = Num::parse(a.gamma, false).d();
    if (!a.eps.empty()) p.eps = Num::parse(a.eps, false).d();
    if (!a.epsbar.empty()) p.eps_bar = Num::parse(a.epsbar, false).d();
    LeftPolicy policy;
    policy.max_restricted = a.max_restricted;
    policy.random_samples = a.random_samples;
    policy.seed = a.seed;
    run.seed = a.seed;
    const auto main = verify_main_condition(sys, d, p.alpha, p.gamma, p.eps, p.eps_bar, policy);
    const auto l81 = check_lemma81(sys, d, p, Num::parse(a.c, false).d());
    emit_json(run, a.out, Json{{"main_condition", main_condition_to_json(main)}, {"lemma81", lemma81_to_json(l81)}});
}

// ---- exact ------------------------------------------------------------------

void run_exact(Run& run, const SystemInput& in, const std::string& lattice, const std::string& pattern,
               const std::vector<std::string>& sites, const std::string& out) {
    const SpinSystem sys = in.load(run);
    const Lattice g = Lattice::parse(lattice);
    const auto P = optional_pattern(sys, pattern);
    const auto vs = parse_sites(g, sites);
    for (int v : vs)
        if (g.exterior(v)) throw Error("InvalidVertex", "site " + site_name(g, v) + " lies outside the domain");
    const ExactMeasure m = exact_measure(sys, g, P);
    Json body = exact_to_json(sys, g, m, vs);
    if (P) body["pattern"] = pattern_to_json(sys, *P);
    emit_json(run, out, body);
}

// ---- mcmc -------------------------------------------------------------------

struct McmcArgs {
    std::string lattice, pattern, steps = "1000", burn_in = "0", thin, out;
    std::vector<std::string> sites;
    std::uint64_t seed = 0;
    bool random_site = false, waiver = false;
    int batches = 50;
};

void run_mcmc(Run& run, const SystemInput& in, const McmcArgs& a) {
    const SpinSystem sys = in.load(run);
    const Lattice g = Lattice::parse(a.lattice);
    const auto P = optional_pattern(sys, a.pattern);
    McmcOptions opt;
    opt.sweeps = parse_count(a.steps, "--steps");
    opt.burn_in = parse_count(a.burn_in, "--burn-in");
    opt.seed = a.seed;
    opt.random_site = a.random_site;
    opt.waiver = a.waiver;
    opt.batches = a.batches;
    opt.sites = parse_sites(g, a.sites);
    run.seed = a.seed;

    std::ofstream samples;
    SampleSink sink;
    if (!a.out.empty()) {
        opt.thin = a.thin.empty() ? std::max<std::int64_t>(1, opt.sweeps / 1000) : parse_count(a.thin, "--thin");
        samples.open(a.out, std::ios::binary);
        if (!samples) throw Error("SchemaError", "cannot write '" + a.out + "'");
        Json header{{"metadata", run.metadata(false)},
                    {"lattice", g.spec()},
                    {"states", sys.labels()},
                    {"pattern", P ? pattern_to_json(sys, *P) : Json(nullptr)},
                    {"sweeps", opt.sweeps},
                    {"burn_in", opt.burn_in},
                    {"thin", opt.thin}};
        samples << header.dump() << "\n";
        sink = [&](std::int64_t sweep, const Configuration& f) {
            Json line = config_to_json(sys, g, f);
            line.erase("lattice");
            samples << Json{{"sweep", sweep}, {"values", line["values"]}}.dump() << "\n";
        };
    }
    const McmcResult r = mcmc_sample(sys, g, P, opt, sink);
    if (!r.caveat.empty()) std::cerr << "caveat: " << r.caveat << "\n";
    Json body = mcmc_to_json(sys, g, r);
    if (samples.is_open()) {
        samples << Json{{"summary", body}, {"metadata", run.metadata()}}.dump() << "\n";
        body["samples"] = a.out;
    }
    emit_json(run, "", body);
}

// ---- breakup ----------------------------------------------------------------

Pattern reference_pattern(const SpinSystem& sys, const std::string& text) {
    return parse_pattern(sys, text.empty() ? "P0" : text);
}

void run_breakup(Run& run, const SystemInput& in, const std::string& lattice, const std::string& config,
                 const std::string& pattern, const std::vector<std::string>& seen, const std::string& out) {
    const SpinSystem sys = in.load(run);
    const Lattice g = Lattice::parse(lattice);
    const Configuration f = config_from_json(sys, g, parse_json_text(read_file(config), "'" + config + "'"));
    const Pattern P0 = reference_pattern(sys, pattern);
    std::vector<int> V;
    for (const auto& s : seen) V.push_back(parse_site(g, s));
    const BreakupResult b = construct_breakup(sys, g, f, P0, V);
    const auto violations = verify_breakup(sys, g, b.atlas, f, P0);
    emit_json(run, out, breakup_to_json(sys, g, b, violations));
}

struct ScanArgs {
    std::string lattice, pattern, steps = "1000", burn_in = "100", thin = "10", out;
    std::vector<std::string> seen;
    std::uint64_t seed = 0;
    bool waiver = false, histogram = false;
};

void run_breakup_scan(Run& run, const SystemInput& in, const ScanArgs& a) {
    const SpinSystem sys = in.load(run);
    const Lattice g = Lattice::parse(a.lattice);
    const Pattern P0 = reference_pattern(sys, a.pattern);
    std::vector<int> V;
    for (const auto& s : a.seen) V.push_back(parse_site(g, s));
    McmcOptions opt;
    opt.sweeps = parse_count(a.steps, "--steps");
    opt.burn_in = parse_count(a.burn_in, "--burn-in");
    opt.thin = parse_count(a.thin, "--thin");
    if (opt.thin < 1) throw Error("SchemaError", "--thin must be at least 1");
    opt.seed = a.seed;
    opt.waiver = a.waiver;
    run.seed = a.seed;

    Philox outside(a.seed, 1);
    std::vector<std::string> rows;
    std::map<std::tuple<long, long, long>, long> tally;
    const auto sink = [&](std::int64_t sweep, const Configuration& state) {
        Configuration f = state;
        extend_outside(sys, g, f, P0, outside);
        const BreakupResult b = construct_breakup(sys, g, f, P0, V);
        const bool valid = verify_breakup(sys, g, b.atlas, f, P0).empty();
        const auto& s = b.derived;
        if (a.histogram) {
            ++tally[{s.L, s.M, s.N}];
        } else {
            rows.push_back(std::to_string(sweep) + "," + std::to_string(s.L) + "," + std::to_string(s.M) + "," +
                           std::to_string(s.N) + "," + (valid ? "1" : "0") + "," + (b.matches_regions ? "1" : "0"));
        }
    };
    mcmc_sample(sys, g, P0, opt, sink);
    if (a.histogram) {
        for (const auto& [k, n] : tally)
            rows.push_back(std::to_string(std::get<0>(k)) + "," + std::to_string(std::get<1>(k)) + "," +
                           std::to_string(std::get<2>(k)) + "," + std::to_string(n));
        emit_csv(run, a.out, "L,M,N,count", rows);
    } else {
        emit_csv(run, a.out, "sweep,L,M,N,valid,matches_regions", rows);
    }
}

// ---- transform --------------------------------------------------------------

std::vector<Num> parse_num_list(const std::string& text, bool exact) {
    std::vector<Num> out;
    std::stringstream ss(text);
    for (std::string tok; std::getline(ss, tok, ',');) out.push_back(Num::parse(tok, exact));
    return out;
}

void run_reweight(Run& run, const SystemInput& in, const std::string& mult, const std::string& d, const std::string& out) {
    const SpinSystem sys = in.load(run);
    const auto m = parse_num_list(mult, sys.exact());
    const auto dd = parse_count(d, "--d");
    if (dd > std::numeric_limits<int>::max()) throw Error("SchemaError", "--d is too large");
    emit_json(run, out, system_to_json(reweight(sys, m, static_cast<int>(dd))));
}

void run_product(Run& run, const SystemInput& in, const std::string& other, const std::string& out) {
    const SpinSystem a = in.load(run);
    const std::string text = read_file(other);
    const SpinSystem b = system_from_json(parse_json_text(text, "'" + other + "'"));
    run.system_hash = *run.system_hash + ":" + fnv1a64(text);
    emit_json(run, out, system_to_json(product(a, b)));
}

void run_project(Run& run, const SystemInput& in, const std::string& out) {
    emit_json(run, out, system_to_json(project_from_doubled(in.load(run))));
}

void run_cover(Run& run, const SystemInput& in, const std::string& out) {
    const SpinSystem sys = in.load(run);
    const Cover c = bipartite_cover(sys);
    Json body = system_to_json(c.system);
    Json phi = Json::array();
    for (int i : c.phi) phi.push_back(sys.label(i));
    body["phi"] = phi;
    emit_json(run, out, body);
}

void run_lift_check(Run& run, const SystemInput& in, const std::string& cover, const std::string& out) {
    const SpinSystem sys = in.load(run);
    const Json j = parse_json_text(read_file(cover), "'" + cover + "'");
    if (!j.is_object() || !j.contains("states") || !j.contains("edges") || !j.contains("phi"))
        throw Error("SchemaError", "cover file needs 'states', 'edges' and 'phi'");
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> phi;
    try {
        n = j.at("states").get<int>();
        for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
        for (const auto& x : j.at("phi")) phi.push_back(x.is_string() ? sys.index_of(x.get<std::string>()) : x.get<int>());
    } catch (const nlohmann::json::exception& e) {
        throw Error("SchemaError", std::string("malformed cover file: ") + e.what());
    }
    const LiftCheck r = check_lift_permitting(sys, n, edges, phi);
    emit_json(run, out, Json{{"status", lift_status_name(r.status)}, {"ok", r.ok()}, {"detail", r.detail}});
}

int fail(const std::string& kind, const std::string& message, int code) {
    std::cerr << Json{{"error", kind}, {"message", message}}.dump() << "\n";
    return code;
}

int dispatch(int argc, char** argv) {
    if (argc >= 2) {
        const std::string first = argv[1];
        if (!first.empty() && first[0] != '-' &&
            std::find(kSubcommands.begin(), kSubcommands.end(), first) == kSubcommands.end())
            return fail("UnknownSubcommand", "unknown subcommand '" + first + "'", 2);
    }

    CLI::App app{"Spin systems on bipartite lattices: patterns, conditions, sampling and breakups", "spinlab"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    Run run;
    SystemInput sys_in;
    std::function<void()> action;
    auto add_system = [&](CLI::App* sub) { sub->add_option("--system", sys_in.path, "spin system JSON")->required(); };

    CatalogArgs cat;
    auto* c = app.add_subcommand("catalog", "build a named model");
    c->set_help_flag("--help", "print this help message and exit");
    c->add_option("name", cat.name, "model name")->required();
    c->add_option("--q", cat.q);
    c->add_option("--m", cat.m);
    c->add_option("--lambda", cat.lambda);
    c->add_option("--lambda-e", cat.lambda_e);
    c->add_option("--lambda-o", cat.lambda_o);
    c->add_option("--beta", cat.beta, "inverse temperature (inf allowed)");
    c->add_option("--exp-neg-beta", cat.exp_neg_beta, "exact e^{-beta}");
    c->add_option("--h", cat.h);
    c->add_option("--out", cat.out);
    c->callback([&] { action = [&] { run_catalog(run, cat); }; });

    std::string an_d, an_out;
    auto* an = app.add_subcommand("analyze", "pattern catalog and parameters");
    add_system(an);
    an->add_option("--d", an_d, "dimension for the alpha parameters");
    an->add_option("--out", an_out);
    an->callback([&] { action = [&] { run_analyze(run, sys_in, an_d, an_out); }; });

    CheckArgs ck;
    auto* chk = app.add_subcommand("check", "evaluate a long-range-order condition");
    add_system(chk);
    chk->add_option("--d", ck.d);
    chk->add_option("--condition", ck.condition, "simple, alt1, alt2 or alt3");
    chk->add_option("--C", ck.C);
    chk->add_option("--s", ck.s);
    chk->add_option("--sweep", ck.sweep, "d=lo:hi:geometric[:n], CSV output");
    chk->add_option("--out", ck.out);
    chk->callback([&] { action = [&] { run_check(run, sys_in, ck); }; });

    std::string z_d, z_psi, z_I = "all", z_method = "compositions", z_out;
    auto* z = app.add_subcommand("zfun", "restricted partition function on K_{2d,2d}");
    add_system(z);
    z->add_option("--d", z_d)->required();
    z->add_option("--psi", z_psi)->required();
    z->add_option("--I", z_I);
    z->add_option("--method", z_method, "compositions, bruteforce or both");
    z->add_option("--out", z_out);
    z->callback([&] { action = [&] { run_zfun(run, sys_in, z_d, z_psi, z_I, z_method, z_out); }; });

    VerifyArgs vc;
    auto* v = app.add_subcommand("verify-cond", "check the general condition on K_{2d,2d}");
    add_system(v);
    v->add_option("--d", vc.d)->required();
    v->add_option("--alpha", vc.alpha);
    v->add_option("--gamma", vc.gamma);
    v->add_option("--eps", vc.eps);
    v->add_option("--epsbar", vc.epsbar);
    v->add_option("--c", vc.c);
    v->add_option("--max-restricted", vc.max_restricted);
    v->add_option("--random-samples", vc.random_samples);
    v->add_option("--seed", vc.seed);
    v->add_option("--out", vc.out);
    v->callback([&] { action = [&] { run_verify(run, sys_in, vc); }; });

    std::string ex_lattice, ex_pattern, ex_out;
    std::vector<std::string> ex_sites;
    auto* ex = app.add_subcommand("exact", "exact finite-volume measure");
    add_system(ex);
    ex->add_option("--lattice", ex_lattice)->required();
    ex->add_option("--pattern", ex_pattern);
    ex->add_option("--site", ex_sites);
    ex->add_option("--out", ex_out);
    ex->callback([&] { action = [&] { run_exact(run, sys_in, ex_lattice, ex_pattern, ex_sites, ex_out); }; });

    McmcArgs mc;
    auto* m = app.add_subcommand("mcmc", "heat-bath Glauber sampling");
    add_system(m);
    m->add_option("--lattice", mc.lattice)->required();
    m->add_option("--pattern", mc.pattern);
    m->add_option("--steps", mc.steps, "sweeps");
    m->add_option("--burn-in", mc.burn_in);
    m->add_option("--seed", mc.seed);
    m->add_option("--site", mc.sites);
    m->add_flag("--random-site", mc.random_site);
    m->add_flag("--waiver", mc.waiver);
    m->add_option("--thin", mc.thin);
    m->add_option("--batches", mc.batches);
    m->add_option("--out", mc.out, "JSONL samples");
    m->callback([&] { action = [&] { run_mcmc(run, sys_in, mc); }; });

    std::string bu_lattice, bu_config, bu_pattern, bu_out;
    std::vector<std::string> bu_seen;
    auto* bu = app.add_subcommand("breakup", "construct and verify a breakup");
    add_system(bu);
    bu->add_option("--lattice", bu_lattice)->required();
    bu->add_option("--config", bu_config)->required();
    bu->add_option("--pattern", bu_pattern, "reference pattern (default P0)");
    bu->add_option("--seen-from", bu_seen);
    bu->add_option("--out", bu_out);
    bu->callback([&] { action = [&] { run_breakup(run, sys_in, bu_lattice, bu_config, bu_pattern, bu_seen, bu_out); }; });

    ScanArgs sc;
    auto* s = app.add_subcommand("breakup-scan", "breakup statistics along an MCMC run");
    add_system(s);
    s->add_option("--lattice", sc.lattice)->required();
    s->add_option("--pattern", sc.pattern);
    s->add_option("--steps", sc.steps);
    s->add_option("--burn-in", sc.burn_in);
    s->add_option("--thin", sc.thin);
    s->add_option("--seed", sc.seed);
    s->add_option("--seen-from", sc.seen);
    s->add_flag("--waiver", sc.waiver);
    s->add_flag("--histogram", sc.histogram);
    s->add_option("--out", sc.out);
    s->callback([&] { action = [&] { run_breakup_scan(run, sys_in, sc); }; });

    auto* t = app.add_subcommand("transform", "system transformations");
    t->require_subcommand(1);
    std::string t_out, t_mult, t_d, t_other, t_cover;
    auto* rw = t->add_subcommand("reweight");
    add_system(rw);
    rw->add_option("--multipliers", t_mult)->required();
    rw->add_option("--d", t_d)->required();
    rw->add_option("--out", t_out);
    rw->callback([&] { action = [&] { run_reweight(run, sys_in, t_mult, t_d, t_out); }; });
    auto* pr = t->add_subcommand("product");
    add_system(pr);
    pr->add_option("--other", t_other)->required();
    pr->add_option("--out", t_out);
    pr->callback([&] { action = [&] { run_product(run, sys_in, t_other, t_out); }; });
    auto* pj = t->add_subcommand("project");
    add_system(pj);
    pj->add_option("--out", t_out);
    pj->callback([&] { action = [&] { run_project(run, sys_in, t_out); }; });
    auto* cv = t->add_subcommand("cover");
    add_system(cv);
    cv->add_option("--out", t_out);
    cv->callback([&] { action = [&] { run_cover(run, sys_in, t_out); }; });
    auto* lc = t->add_subcommand("lift-check");
    add_system(lc);
    lc->add_option("--cover", t_cover, "JSON {states, edges, phi}")->required();
    lc->add_option("--out", t_out);
    lc->callback([&] { action = [&] { run_lift_check(run, sys_in, t_cover, t_out); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail("SchemaError", e.what(), 2);
    }
    run.subcommand = argv[1];
    for (auto* sub : t->get_subcommands()) run.subcommand += " " + sub->get_name();

    try {
        threads_setting();
        action();
    } catch (const ResourceError& e) {
        return fail(e.kind(), e.what(), 3);
    } catch (const Error& e) {
        return fail(e.kind(), e.what(), 2);
    } catch (const std::exception& e) {
        return fail("InternalError", e.what(), 1);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) { return dispatch(argc, argv); }
