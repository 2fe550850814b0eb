#include "spinlab/parameters.hpp"

#include "spinlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace spinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// -log x with -log 0 = +inf.
double neg_log(const Num& x) { return x.sign() <= 0 ? kInf : -x.log(); }

double log_of(const Num& x) { return x.sign() <= 0 ? -kInf : x.log(); }

Num zero_like(const SpinSystem& sys) { return sys.exact() ? Num(0) : Num(0.0); }

std::set<Mask> dominant_sides(const PatternCatalog& cat) {
    std::set<Mask> s;
    for (const auto& p : cat.dominant) s.insert(p.A);
    return s;
}

bool is_dominant(const PatternCatalog& cat, const Pattern& p) {
    for (const auto& q : cat.dominant)
        if (q == p) return true;
    return false;
}

double log_sum_exp(const std::vector<double>& xs) {
    double m = -kInf;
    for (double x : xs) m = std::max(m, x);
    if (m == -kInf) return -kInf;
    double s = 0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

double pmax_term(const BaseParameters& bp, std::int64_t d) {
    double factor = 1.0 + (bp.rho_int.is_zero() ? 0.0 : 1.0 / 3.0);
    return factor / (2.0 * static_cast<double>(d)) * std::log(static_cast<double>(bp.n_maximal));
}

// log of 1 - (1 - rho_bdry)(1 - sqrt(rho_int)), exact when rho_int = 0.
double log_boundary_term(const BaseParameters& bp) {
    if (bp.rho_int.is_zero()) return log_of(bp.rho_bdry);
    double v = 1.0 - (1.0 - bp.rho_bdry.d()) * (1.0 - std::sqrt(bp.rho_int.d()));
    return v <= 0 ? -kInf : std::log(v);
}

void require_dimension(std::int64_t d) {
    if (d < 1) throw Error("InvalidDimension", "d must be a positive integer");
}

}  // namespace

BaseParameters base_parameters(const SpinSystem& sys, const PatternCatalog& cat) {
    BaseParameters bp;
    const Num zero = zero_like(sys);
    bp.omega_dom = cat.omega_dom;
    bp.n_maximal = static_cast<int>(cat.maximal.size());
    bp.n_dominant = static_cast<int>(cat.dominant.size());
    bp.frak_q = cat.frak_q;
    bp.frak_q_large_side = cat.frak_q_large_side;
    bp.homomorphism = sys.is_homomorphism();
    bp.near_tie = cat.near_tie || sys.near_tie();

    auto second = sys.second_interaction();
    bp.rho_int = second ? *second / sys.lambda_max() : zero;

    bp.rho_bulk = zero;
    for (const auto& p : cat.maximal)
        if (!is_dominant(cat, p)) {
            Num r = p.weight / bp.omega_dom;
            if (r > bp.rho_bulk) bp.rho_bulk = r;
        }

    bp.rho_bdry = zero;
    for (Mask A : dominant_sides(cat)) {
        Num la = sys.activity_sum(A);
        for (Mask K : cat.r_sets)
            if (K != A && is_subset(K, A)) {
                Num r = sys.activity_sum(K) / la;
                if (r > bp.rho_bdry) bp.rho_bdry = r;
            }
    }

    const Num ls = sys.activity_sum(sys.all());
    bp.rho_act = zero;
    for (Mask A : cat.r_sets)
        if (A != 0) {
            Num r = ls / sys.activity_sum(A);
            if (r > bp.rho_act) bp.rho_act = r;
        }
    bp.rho_hat_act = ls * ls / bp.omega_dom;

    double lb = log_boundary_term(bp);
    double lbulk = log_of(bp.rho_bulk);
    bp.alpha0 = -std::max(lbulk, lb);
    return bp;
}

double log_lambda_restricted_power(const SpinSystem& sys, const std::vector<Mask>& rsets, Mask A, std::int64_t n) {
    auto mu = mobius_below(rsets, A);
    if (sys.exact() && n <= 512) {
        mpq_class total = 0;
        for (const auto& [K, m] : mu) {
            if (m == 0) continue;
            total += mpq_class(m) * sys.activity_sum(K).pow(n).q();
        }
        return log_q(total);
    }
    const double la = sys.activity_sum(A).d();
    if (la <= 0) return -kInf;
    double s = 0;
    for (const auto& [K, m] : mu) {
        if (m == 0) continue;
        double r = sys.activity_sum(K).d() / la;
        s += static_cast<double>(m) * std::pow(r, static_cast<double>(n));
    }
    if (s <= 0) return -kInf;
    return static_cast<double>(n) * std::log(la) + std::log(s);
}

double log_rho_hat_bulk(const SpinSystem& sys, const PatternCatalog& cat, const BaseParameters& bp, std::int64_t d,
                        std::int64_t s) {
    const double ls = sys.activity_sum(sys.all()).d();
    const double ri = bp.rho_int.d();
    const double n = sys.size();
    const double rs = ri == 0 ? 0.0 : std::pow(ri, static_cast<double>(s));
    double best = -kInf;
    for (const auto& p : cat.maximal) {
        if (p.A == 0 || p.B == 0 || is_dominant(cat, p)) continue;
        double la = sys.activity_sum(p.A).d(), lb = sys.activity_sum(p.B).d();
        double v = log_of(p.weight / bp.omega_dom) + std::log1p(rs * ls / la) +
                   static_cast<double>(s - 1) * n / (2.0 * static_cast<double>(d)) *
                       std::log(2.0 * static_cast<double>(d) * ls / lb);
        best = std::max(best, v);
    }
    return best;
}

double alpha1(const BaseParameters& bp, std::int64_t d) {
    require_dimension(d);
    return bp.alpha0 - pmax_term(bp, d);
}

double alpha2(const SpinSystem& sys, const PatternCatalog& cat, const BaseParameters& bp, std::int64_t d,
              std::int64_t s) {
    require_dimension(d);
    double lh = log_rho_hat_bulk(sys, cat, bp, d, s);
    return -std::max(lh, log_boundary_term(bp)) - pmax_term(bp, d);
}

double log_rho_bulk_star(const SpinSystem& sys, const PatternCatalog& cat, std::int64_t d) {
    require_dimension(d);
    const std::int64_t n = 2 * d;
    std::vector<double> terms;
    for (const auto& p : cat.maximal) {
        if (is_dominant(cat, p) || p.A == 0 || p.B == 0) continue;
        double la = log_lambda_restricted_power(sys, cat.r_sets, p.A, n);
        if (la == -kInf) continue;
        terms.push_back(la + static_cast<double>(n) * sys.activity_sum(p.B).log());
    }
    double lse = log_sum_exp(terms);
    if (lse == -kInf) return -kInf;
    return lse / static_cast<double>(n) - cat.omega_dom.log();
}

double alpha3(const SpinSystem& sys, const PatternCatalog& cat, const BaseParameters& bp, std::int64_t d) {
    return -std::max(log_rho_bulk_star(sys, cat, d), log_of(bp.rho_bdry));
}

namespace {

SWindow search_window(const SpinSystem& sys, const PatternCatalog& cat, const BaseParameters& bp, std::int64_t d,
                      std::optional<std::int64_t> forced) {
    SWindow w;
    const double dd = static_cast<double>(d);
    const double n = sys.size();
    const double rha = bp.rho_hat_act.d();
    const double nli = neg_log(bp.rho_int);
    w.lo = std::isinf(nli) ? 0.0 : 2.0 * std::log(dd * rha) / nli;
    const double static_hi = std::ceil(2.0 * dd / n);
    const double l2 = std::log(2.0 * dd * rha);
    auto upper = [&](double a2) { return std::min(static_hi, 1.0 + a2 * dd / (2.0 * n * l2)); };

    if (forced) {
        w.s = *forced;
        w.hi = upper(alpha2(sys, cat, bp, d, w.s));
        w.in_window = static_cast<double>(w.s) >= w.lo && static_cast<double>(w.s) <= w.hi;
        return w;
    }
    const std::int64_t s0 = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(w.lo)));
    const std::int64_t cap = 10000;
    std::int64_t s_end = s0 + cap;
    if (static_hi < static_cast<double>(s_end)) s_end = std::max<std::int64_t>(s0, static_cast<std::int64_t>(static_hi));
    else w.search_capped = true;
    if (bp.rho_int.is_zero()) s_end = s0;  // rho-hat-bulk only grows with s when rho_int = 0

    double best_alpha = -kInf;
    bool found = false;
    w.s = s0;
    w.hi = upper(alpha2(sys, cat, bp, d, s0));
    for (std::int64_t s = s0; s <= s_end; ++s) {
        double a2 = alpha2(sys, cat, bp, d, s);
        double hi = upper(a2);
        bool in = static_cast<double>(s) <= hi;
        if (in && a2 > best_alpha) {
            best_alpha = a2;
            w.s = s;
            w.hi = hi;
            found = true;
        }
    }
    w.in_window = found;
    return w;
}

}  // namespace

ParameterReport compute_parameters(const SpinSystem& sys, std::optional<std::int64_t> d,
                                   std::optional<std::int64_t> s) {
    ParameterReport r;
    auto cat = analyze_patterns(sys);
    r.base = base_parameters(sys, cat);
    if (!d) return r;
    require_dimension(*d);
    r.d = d;
    r.alpha1 = alpha1(r.base, *d);
    r.window = search_window(sys, cat, r.base, *d, s);
    double lh = log_rho_hat_bulk(sys, cat, r.base, *d, r.window->s);
    r.rho_hat_bulk = lh == -kInf ? 0.0 : std::exp(lh);
    r.alpha2 = alpha2(sys, cat, r.base, *d, r.window->s);
    double ls = log_rho_bulk_star(sys, cat, *d);
    r.rho_bulk_star = ls == -kInf ? 0.0 : std::exp(ls);
    r.alpha3 = alpha3(sys, cat, r.base, *d);
    return r;
}

const char* condition_name(Condition c) {
    switch (c) {
        case Condition::simple: return "simple";
        case Condition::alt1: return "alt1";
        case Condition::alt2: return "alt2";
        case Condition::alt3: return "alt3";
    }
    return "?";
}

Condition condition_from_name(const std::string& s) {
    if (s == "simple") return Condition::simple;
    if (s == "alt1") return Condition::alt1;
    if (s == "alt2") return Condition::alt2;
    if (s == "alt3") return Condition::alt3;
    throw Error("SchemaError", "unknown condition '" + s + "'");
}

Inequality make_inequality(std::string name, double lhs, double rhs) {
    Inequality q;
    q.name = std::move(name);
    q.lhs = lhs;
    q.rhs = rhs;
    q.holds = lhs >= rhs;
    if (rhs == 0) q.margin = lhs > 0 ? kInf : (lhs == 0 ? 1.0 : -kInf);
    else q.margin = lhs / rhs;
    return q;
}

ConditionReport check_condition(const SpinSystem& sys, std::int64_t d, Condition which, double C,
                                std::optional<std::int64_t> s) {
    if (d < 2) throw Error("InvalidDimension", "conditions are stated for d >= 2");
    if (!(C > 0)) throw Error("SchemaError", "C must be positive");
    auto cat = analyze_patterns(sys);
    auto bp = base_parameters(sys, cat);
    ConditionReport rep;
    rep.condition = which;
    rep.d = d;
    rep.C = C;
    const double dd = static_cast<double>(d);
    const double ld = std::log(dd);
    const double n = sys.size();
    const double q_thr = C * (bp.frak_q + ld) * std::sqrt(ld) / std::pow(dd, 0.25);
    auto tilde = [&](double a, double denom) { return a * std::min(1.0, a / denom); };

    switch (which) {
        case Condition::simple: {
            rep.alpha = bp.alpha0;
            rep.inequalities.push_back(
                make_inequality("alpha0 >= C|S|log^{3/2}d/d^{1/4}", bp.alpha0, C * n * std::pow(ld, 1.5) / std::pow(dd, 0.25)));
            double lr = std::log(dd * bp.rho_act.d());
            auto q = make_inequality("-log rho_int >= |S|log^2(d rho_act)/d^{3/4}", neg_log(bp.rho_int),
                                     n * lr * lr / std::pow(dd, 0.75));
            q.vacuous = bp.rho_int.is_zero();
            rep.inequalities.push_back(q);
            rep.alpha_tilde = tilde(rep.alpha, n + ld);
            break;
        }
        case Condition::alt1: {
            double a1 = alpha1(bp, d);
            rep.alpha = a1;
            rep.inequalities.push_back(make_inequality("alpha1 >= C(q+log d)sqrt(log d)/d^{1/4}", a1, q_thr));
            double lhs = neg_log(bp.rho_int) / (4.0 * std::log(dd * bp.rho_act.d()));
            double rhs = std::min(1.0, n / (2.0 * dd) + 5.0 * n * std::log(2.0 * dd * bp.rho_act.d()) / (a1 * dd));
            auto q = make_inequality("-log rho_int/(4 log(d rho_act)) >= min{1, |S|/2d + 5|S|log(2d rho_act)/(alpha1 d)}",
                                     lhs, rhs);
            q.vacuous = bp.rho_int.is_zero();
            rep.inequalities.push_back(q);
            rep.alpha_tilde = tilde(a1, bp.frak_q + ld);
            break;
        }
        case Condition::alt2: {
            SWindow w = search_window(sys, cat, bp, d, s);
            rep.s = w.s;
            double a2 = alpha2(sys, cat, bp, d, w.s);
            rep.alpha = a2;
            rep.inequalities.push_back(make_inequality("s >= 2log(d rho_hat_act)/(-log rho_int)",
                                                       static_cast<double>(w.s), w.lo));
            rep.inequalities.push_back(make_inequality(
                "min{ceil(2d/|S|), 1 + alpha2 d/(2|S|log(2d rho_hat_act))} >= s", w.hi, static_cast<double>(w.s)));
            rep.inequalities.push_back(make_inequality("alpha2 >= C(q+log d)sqrt(log d)/d^{1/4}", a2, q_thr));
            rep.alpha_tilde = tilde(a2, bp.frak_q + ld);
            break;
        }
        case Condition::alt3: {
            if (!bp.rho_int.is_zero())
                throw Error("Alt3OnWeightedSystem", "alternative condition 3 applies to homomorphism systems only");
            double a3 = alpha3(sys, cat, bp, d);
            rep.alpha = a3;
            rep.inequalities.push_back(make_inequality("alpha3 >= C(q+log d)sqrt(log d)/d^{1/4}", a3, q_thr));
            rep.alpha_tilde = tilde(a3, bp.frak_q + ld);
            break;
        }
    }
    rep.pass = std::all_of(rep.inequalities.begin(), rep.inequalities.end(), [](const Inequality& q) { return q.holds; });
    return rep;
}

CondParams default_cond_params(const SpinSystem& sys, std::int64_t d, std::optional<double> alpha) {
    if (d < 2) throw Error("InvalidDimension", "d must be at least 2");
    auto cat = analyze_patterns(sys);
    auto bp = base_parameters(sys, cat);
    const double dd = static_cast<double>(d);
    CondParams p;
    const bool hom = bp.rho_int.is_zero();
    if (hom) {
        p.s = 1;
        p.alpha = alpha ? *alpha : alpha3(sys, cat, bp, d);
    } else {
        SWindow w = search_window(sys, cat, bp, d, std::nullopt);
        p.s = w.s;
        p.alpha = alpha ? *alpha : alpha2(sys, cat, bp, d, w.s);
    }
    const double lo = 1.0 / (4.0 * dd);
    p.eps = std::clamp(p.alpha / (64.0 * std::log(dd)), lo, 0.125);
    if (hom) {
        p.eps_bar = 1.0 / (4.0 * dd);
        p.gamma = 0;
        p.gamma_hat = 0;
    } else {
        p.eps_bar = std::clamp(std::max(static_cast<double>(p.s) / (4.0 * dd), p.alpha * p.eps / neg_log(bp.rho_int)),
                               lo, 0.5);
        double rs = std::pow(bp.rho_int.d(), static_cast<double>(p.s));
        p.gamma = bp.rho_act.d() * rs;
        p.gamma_hat = bp.rho_hat_act.d() * rs;
    }
    return p;
}

double alpha_requirement(double frak_q, std::int64_t d, double eps, double gamma) {
    const double dd = static_cast<double>(d);
    const double ld = std::log(dd);
    const double qd = frak_q + ld;
    return qd * std::sqrt(ld) / std::pow(dd, 0.25) + qd * ld / (eps * eps * dd) + gamma * dd +
           std::sqrt(gamma * qd * std::pow(dd, 1.5) * ld);
}

Lemma81Report check_lemma81(const SpinSystem& sys, std::int64_t d, const CondParams& p, double c) {
    if (d < 2) throw Error("InvalidDimension", "d must be at least 2");
    auto cat = analyze_patterns(sys);
    auto bp = base_parameters(sys, cat);
    const double dd = static_cast<double>(d);
    Lemma81Report rep;
    rep.params = p;
    rep.c = c;
    rep.inequalities.push_back(make_inequality("eps_bar >= 1/(4d)", p.eps_bar, 1.0 / (4.0 * dd)));
    rep.inequalities.push_back(make_inequality("eps >= eps_bar", p.eps, p.eps_bar));
    rep.inequalities.push_back(make_inequality("1/8 >= eps", 0.125, p.eps));
    rep.inequalities.push_back(
        make_inequality("c*alpha >= alpha requirement", c * p.alpha, alpha_requirement(bp.frak_q, d, p.eps, p.gamma)));

    const double lb = log_of(bp.rho_bdry);
    const double rhs_log = std::log(0.25) - p.alpha * dd;
    auto log_bound = [&](double log_prefactor, double e) {
        double ex = 2.0 * dd - 4.0 * e * dd;
        double pb = (lb == -kInf && ex > 0) ? -kInf : ex * lb;
        return log_prefactor + 4.0 * e * dd * std::log(std::exp(1.0) / (2.0 * e)) + pb;
    };
    // Both sides in natural-log form; margin is the ratio of the actual quantities.
    auto log_ineq = [&](std::string name, double big_log, double small_log) {
        Inequality q = make_inequality(std::move(name), big_log, small_log);
        q.margin = std::exp(big_log - small_log);
        return q;
    };
    rep.inequalities.push_back(log_ineq("log(e^{-alpha d}/4) >= log(2^{q+1}(e/2eps)^{4eps d} rho_bdry^{2d-4eps d})",
                                        rhs_log, log_bound((bp.frak_q + 1.0) * std::log(2.0), p.eps)));
    auto last = log_ineq("log(e^{-alpha d}/4) >= log(|P_max|(e/2eps_bar)^{4eps_bar d} rho_bdry^{2d-4eps_bar d})",
                         rhs_log, log_bound(std::log(static_cast<double>(bp.n_maximal)), p.eps_bar));
    if (bp.rho_int.is_zero()) {
        last.vacuous = true;
        last.holds = true;
    }
    rep.inequalities.push_back(last);
    rep.pass = std::all_of(rep.inequalities.begin(), rep.inequalities.end(), [](const Inequality& q) { return q.holds; });
    return rep;
}

}  // namespace spinlab
