#include "spinlab/io.hpp"

#include "spinlab/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace spinlab {

Json to_json(const Num& x) {
    if (x.exact()) return x.str();
    return real(x.d());
}

Json real(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (std::isnan(x)) return "nan";
    return x;
}

Num num_from_json(const Json& j, bool exact) {
    if (j.is_string()) return Num::parse(j.get<std::string>(), exact);
    if (j.is_number_integer()) return Num::parse(j.dump(), exact);
    if (j.is_number_float()) {
        if (exact) throw Error("SchemaError", "rational-mode values must be integers or \"p/q\" strings");
        return Num(j.get<double>());
    }
    throw Error("SchemaError", "expected a number, got " + j.dump());
}

SpinSystem system_from_json(const Json& j) {
    if (!j.is_object()) throw Error("SchemaError", "spin system must be a JSON object");
    for (const char* key : {"states", "activities", "interactions", "mode"})
        if (!j.contains(key)) throw Error("SchemaError", std::string("missing key '") + key + "'");
    const auto& mode_j = j.at("mode");
    if (!mode_j.is_string()) throw Error("SchemaError", "mode must be a string");
    const std::string mode_s = mode_j.get<std::string>();
    Mode mode;
    if (mode_s == "rational") mode = Mode::Rational;
    else if (mode_s == "float") mode = Mode::Float;
    else throw Error("SchemaError", "mode must be \"rational\" or \"float\"");
    const bool exact = mode == Mode::Rational;

    const auto& st = j.at("states");
    if (!st.is_array()) throw Error("SchemaError", "states must be an array");
    std::vector<std::string> states;
    for (const auto& s : st) {
        if (s.is_string()) states.push_back(s.get<std::string>());
        else if (s.is_number_integer()) states.push_back(s.dump());
        else throw Error("SchemaError", "state labels must be strings or integers");
    }
    const auto& act = j.at("activities");
    if (!act.is_array()) throw Error("SchemaError", "activities must be an array");
    std::vector<Num> activities;
    for (const auto& a : act) activities.push_back(num_from_json(a, exact));
    const auto& inter = j.at("interactions");
    if (!inter.is_array()) throw Error("SchemaError", "interactions must be an array of rows");
    std::vector<std::vector<Num>> rows;
    for (const auto& row : inter) {
        if (!row.is_array()) throw Error("SchemaError", "interactions must be an array of rows");
        std::vector<Num> r;
        for (const auto& x : row) r.push_back(num_from_json(x, exact));
        rows.push_back(std::move(r));
    }
    return SpinSystem(std::move(states), std::move(activities), std::move(rows), mode);
}

Json system_to_json(const SpinSystem& sys) {
    Json j;
    j["states"] = sys.labels();
    Json act = Json::array();
    for (const auto& a : sys.activities()) act.push_back(to_json(a));
    j["activities"] = act;
    Json rows = Json::array();
    for (const auto& row : sys.interactions()) {
        Json r = Json::array();
        for (const auto& x : row) r.push_back(to_json(x));
        rows.push_back(r);
    }
    j["interactions"] = rows;
    j["mode"] = mode_name(sys.mode());
    return j;
}

SpinSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("SchemaError", "cannot open system file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("SchemaError", "'" + path + "' is not valid JSON: " + e.what());
    }
    return system_from_json(j);
}

Json mask_to_json(const SpinSystem& sys, Mask m) {
    Json out = Json::array();
    for (int i : members(m)) out.push_back(sys.label(i));
    return out;
}

Json pattern_to_json(const SpinSystem& sys, const Pattern& P) {
    return Json{{"A", mask_to_json(sys, P.A)}, {"B", mask_to_json(sys, P.B)}, {"weight", to_json(P.weight)}};
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

Mask parse_labels(const SpinSystem& sys, const std::string& text) {
    Mask m = 0;
    for (const auto& tok : split(text, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) throw Error("SchemaError", "empty state label in '" + text + "'");
        m |= bit(sys.index_of(t));
    }
    return m;
}

}  // namespace

Pattern parse_pattern(const SpinSystem& sys, const std::string& text) {
    const std::string t = trim(text);
    if (t.size() >= 2 && t[0] == 'P' && t.find('=') == std::string::npos) {
        std::size_t k = 0;
        try {
            std::size_t used = 0;
            k = std::stoul(t.substr(1), &used);
            if (used != t.size() - 1) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw Error("SchemaError", "bad pattern reference '" + text + "'");
        }
        auto dom = dominant_patterns(sys).dominant;
        if (k >= dom.size())
            throw Error("SchemaError", "pattern P" + std::to_string(k) + " does not exist; there are " +
                                           std::to_string(dom.size()) + " dominant patterns");
        return dom[k];
    }
    Mask A = 0, B = 0;
    bool hasA = false, hasB = false;
    for (const auto& part : split(t, ';')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw Error("SchemaError", "expected A=...;B=..., got '" + text + "'");
        const std::string side = trim(part.substr(0, eq));
        const Mask m = parse_labels(sys, part.substr(eq + 1));
        if (side == "A") { A = m; hasA = true; }
        else if (side == "B") { B = m; hasB = true; }
        else throw Error("SchemaError", "unknown pattern side '" + side + "'");
    }
    if (!hasA || !hasB) throw Error("SchemaError", "a pattern needs both A and B");
    if (!is_pattern(sys, A, B)) throw Error("NotAPattern", "'" + text + "' is not a pattern of this system");
    const SpinSystem norm = sys.normalized();
    return {A, B, norm.activity_sum(A) * norm.activity_sum(B)};
}

int parse_site(const Lattice& g, const std::string& text) {
    std::vector<int> c;
    for (const auto& tok : split(text, ',')) {
        try {
            std::size_t used = 0;
            const std::string t = trim(tok);
            c.push_back(std::stoi(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw Error("InvalidVertex", "bad site '" + text + "'");
        }
    }
    if (static_cast<int>(c.size()) != g.dim())
        throw Error("InvalidVertex", "site '" + text + "' needs " + std::to_string(g.dim()) + " coordinates");
    const int v = g.index(c);
    if (v < 0) throw Error("InvalidVertex", "site '" + text + "' is not in the lattice");
    return v;
}

std::string site_name(const Lattice& g, int v) {
    std::string s;
    for (int x : g.coords(v)) s += (s.empty() ? "" : ",") + std::to_string(x);
    return s;
}

Configuration config_from_json(const SpinSystem& sys, const Lattice& g, const Json& j) {
    const Json* values = &j;
    if (j.is_object()) {
        if (!j.contains("values")) throw Error("SchemaError", "configuration object needs 'values'");
        if (j.contains("lattice") && j.at("lattice").is_string() && j.at("lattice").get<std::string>() != g.spec())
            throw Error("DomainMismatch", "configuration was written for lattice " + j.at("lattice").get<std::string>());
        values = &j.at("values");
    }
    if (!values->is_array()) throw Error("SchemaError", "configuration values must be an array");
    if (static_cast<int>(values->size()) != g.size())
        throw Error("DomainMismatch", "configuration has " + std::to_string(values->size()) + " entries, lattice has " +
                                          std::to_string(g.size()) + " vertices");
    Configuration f;
    f.reserve(values->size());
    for (const auto& x : *values) {
        if (x.is_null()) f.push_back(-1);
        else if (x.is_string()) f.push_back(sys.index_of(x.get<std::string>()));
        else if (x.is_number_integer()) f.push_back(sys.index_of(x.dump()));
        else throw Error("SchemaError", "configuration entries must be state labels");
    }
    return f;
}

Json config_to_json(const SpinSystem& sys, const Lattice& g, const Configuration& f) {
    Json vals = Json::array();
    for (int x : f) vals.push_back(x < 0 ? Json(nullptr) : Json(sys.label(x)));
    return Json{{"lattice", g.spec()}, {"values", vals}};
}

Json catalog_to_json(const SpinSystem& sys, const PatternCatalog& cat) {
    Json j;
    Json rs = Json::array();
    for (Mask m : cat.r_sets) rs.push_back(mask_to_json(sys, m));
    j["r_sets"] = rs;
    Json maxi = Json::array();
    for (const auto& P : cat.maximal) maxi.push_back(pattern_to_json(sys, P));
    j["maximal"] = maxi;
    Json dom = Json::array();
    for (const auto& P : cat.dominant) dom.push_back(pattern_to_json(sys, P));
    j["dominant"] = dom;
    j["n_dominant"] = cat.dominant.size();
    j["omega_dom"] = to_json(cat.omega_dom);
    j["equivalence_classes"] = cat.equivalence_classes;
    j["direct_classes"] = cat.direct_classes;
    j["all_dominant_equivalent"] = cat.all_equivalent;
    j["frak_q"] = real(cat.frak_q);
    j["frak_q_large_side"] = real(cat.frak_q_large_side);
    j["near_tie"] = cat.near_tie;
    return j;
}

Json parameters_to_json(const ParameterReport& r) {
    const auto& b = r.base;
    Json j;
    j["omega_dom"] = to_json(b.omega_dom);
    j["rho_int"] = to_json(b.rho_int);
    j["rho_bulk"] = to_json(b.rho_bulk);
    j["rho_bdry"] = to_json(b.rho_bdry);
    j["rho_act"] = to_json(b.rho_act);
    j["rho_hat_act"] = to_json(b.rho_hat_act);
    j["alpha0"] = real(b.alpha0);
    j["frak_q"] = real(b.frak_q);
    j["frak_q_large_side"] = real(b.frak_q_large_side);
    j["n_maximal"] = b.n_maximal;
    j["n_dominant"] = b.n_dominant;
    j["homomorphism"] = b.homomorphism;
    j["near_tie"] = b.near_tie;
    if (r.d) j["d"] = *r.d;
    if (r.alpha1) j["alpha1"] = real(*r.alpha1);
    if (r.window)
        j["s_window"] = Json{{"lo", real(r.window->lo)},
                             {"hi", real(r.window->hi)},
                             {"s", r.window->s},
                             {"in_window", r.window->in_window},
                             {"search_capped", r.window->search_capped}};
    if (r.rho_hat_bulk) j["log_rho_hat_bulk"] = real(*r.rho_hat_bulk);
    if (r.alpha2) j["alpha2"] = real(*r.alpha2);
    if (r.rho_bulk_star) j["log_rho_bulk_star"] = real(*r.rho_bulk_star);
    if (r.alpha3) j["alpha3"] = real(*r.alpha3);
    return j;
}

namespace {

Json inequalities_to_json(const std::vector<Inequality>& v) {
    Json out = Json::array();
    for (const auto& q : v)
        out.push_back(Json{{"name", q.name},
                           {"lhs", real(q.lhs)},
                           {"rhs", real(q.rhs)},
                           {"holds", q.holds},
                           {"margin", real(q.margin)},
                           {"vacuous", q.vacuous}});
    return out;
}

}  // namespace

Json condition_to_json(const ConditionReport& r) {
    Json j;
    j["condition"] = condition_name(r.condition);
    j["d"] = r.d;
    j["C"] = real(r.C);
    if (r.s) j["s"] = *r.s;
    j["alpha"] = real(r.alpha);
    j["alpha_tilde"] = real(r.alpha_tilde);
    j["inequalities"] = inequalities_to_json(r.inequalities);
    j["pass"] = r.pass;
    return j;
}

Json lemma81_to_json(const Lemma81Report& r) {
    Json j;
    j["alpha"] = real(r.params.alpha);
    j["gamma"] = real(r.params.gamma);
    j["gamma_hat"] = real(r.params.gamma_hat);
    j["eps"] = real(r.params.eps);
    j["eps_bar"] = real(r.params.eps_bar);
    j["s"] = r.params.s;
    j["c"] = real(r.c);
    j["inequalities"] = inequalities_to_json(r.inequalities);
    j["pass"] = r.pass;
    return j;
}

Json main_condition_to_json(const MainConditionReport& r) {
    Json j;
    j["d"] = r.d;
    j["alpha"] = real(r.alpha);
    j["gamma"] = real(r.gamma);
    j["eps"] = real(r.eps);
    j["eps_bar"] = real(r.eps_bar);
    j["policy"] = Json{{"max_restricted", r.policy.max_restricted},
                       {"random_samples", r.policy.random_samples},
                       {"seed", r.policy.seed}};
    Json lines = Json::array();
    for (const auto& l : r.lines)
        lines.push_back(Json{{"inequality", l.inequality},
                             {"J", l.J},
                             {"detail", l.detail},
                             {"k", l.k},
                             {"log_lhs", real(l.log_lhs)},
                             {"log_rhs", real(l.log_rhs)},
                             {"holds", l.holds},
                             {"tight_alpha", real(l.tight_alpha)}});
    j["lines"] = lines;
    j["restricted_left_tested"] = r.restricted_left_tested;
    j["pass"] = r.pass;
    j["tight_alpha"] = real(r.tight_alpha);
    j["alpha_requirement"] = real(r.alpha_requirement);
    j["rationalization_error"] = real(r.rationalization_error);
    return j;
}

Json exact_to_json(const SpinSystem& sys, const Lattice& g, const ExactMeasure& m, const std::vector<int>& sites) {
    Json j;
    j["lattice"] = g.spec();
    j["Z"] = to_json(m.Z);
    j["log_Z"] = real(m.log_Z);
    Json out = Json::array();
    for (int v : sites) {
        Json s;
        s["site"] = site_name(g, v);
        Json marg;
        const auto& row = m.marginals[static_cast<std::size_t>(v)];
        for (int i = 0; i < sys.size() && i < static_cast<int>(row.size()); ++i)
            marg[sys.label(i)] = to_json(row[static_cast<std::size_t>(i)]);
        s["marginal"] = marg;
        if (!m.not_in_pattern.empty()) s["not_in_pattern"] = to_json(m.not_in_pattern[static_cast<std::size_t>(v)]);
        out.push_back(s);
    }
    j["sites"] = out;
    return j;
}

Json mcmc_to_json(const SpinSystem& sys, const Lattice& g, const McmcResult& r) {
    Json j;
    j["lattice"] = g.spec();
    j["sweeps"] = r.sweeps;
    j["updates"] = r.updates;
    j["irreducibility_proven"] = r.irreducibility_proven;
    if (!r.caveat.empty()) j["caveat"] = r.caveat;
    Json est = Json::array();
    for (const auto& e : r.estimates) {
        Json mean, se;
        for (int i = 0; i < sys.size(); ++i) {
            mean[sys.label(i)] = real(e.mean[static_cast<std::size_t>(i)]);
            se[sys.label(i)] = real(e.std_error[static_cast<std::size_t>(i)]);
        }
        est.push_back(Json{{"site", site_name(g, e.site)},
                           {"mean", mean},
                           {"std_error", se},
                           {"not_in_pattern", real(e.not_in_pattern)},
                           {"not_in_pattern_se", real(e.not_in_pattern_se)}});
    }
    j["estimates"] = est;
    return j;
}

Json vertex_set_to_json(const Lattice& g, const VertexSet& U) {
    Json out = Json::array();
    for (int v : to_list(U)) out.push_back(site_name(g, v));
    return out;
}

Json breakup_to_json(const SpinSystem& sys, const Lattice& g, const BreakupResult& b,
                     const std::vector<Violation>& violations) {
    Json j;
    j["lattice"] = g.spec();
    Json atlas = Json::array();
    for (std::size_t P = 0; P < b.atlas.patterns.size(); ++P)
        atlas.push_back(Json{{"pattern", pattern_to_json(sys, b.atlas.patterns[P])},
                             {"X", vertex_set_to_json(g, b.atlas.X[P])},
                             {"X_prime", vertex_set_to_json(g, b.atlas.Xprime[P])}});
    j["atlas"] = atlas;
    j["X_none"] = vertex_set_to_json(g, b.derived.none);
    j["X_overlap"] = vertex_set_to_json(g, b.derived.overlap);
    j["X_defect"] = vertex_set_to_json(g, b.derived.defect);
    j["X_star"] = vertex_set_to_json(g, b.derived.star);
    j["stats"] = Json{{"L", b.derived.L}, {"M", b.derived.M}, {"N", b.derived.N}};
    j["pattern_of_hole"] = b.pattern_of_hole;
    j["matches_regions"] = b.matches_regions;
    Json viol = Json::array();
    for (const auto& v : violations)
        viol.push_back(Json{{"rule", v.rule},
                            {"pattern", v.pattern},
                            {"vertex", v.vertex < 0 ? Json(nullptr) : Json(site_name(g, v.vertex))},
                            {"detail", v.detail}});
    j["violations"] = viol;
    j["valid"] = violations.empty();
    return j;
}

std::string fnv1a64(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace spinlab
