#include "spinlab/catalog.hpp"

#include "spinlab/error.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace spinlab {

namespace {

using Matrix = std::vector<std::vector<Num>>;

struct Names {
    Model model;
    const char* name;
};

constexpr Names kNames[] = {
    {Model::af_potts, "af_potts"},
    {Model::af_potts_field, "af_potts_field"},
    {Model::af_ising_field, "af_ising_field"},
    {Model::hard_core, "hard_core"},
    {Model::hard_core_unequal, "hard_core_unequal"},
    {Model::widom_rowlinson, "widom_rowlinson"},
    {Model::clock, "clock"},
    {Model::beach, "beach"},
    {Model::multi_wr, "multi_wr"},
    {Model::anti_wr, "anti_wr"},
    {Model::multi_beach, "multi_beach"},
    {Model::multi_occupancy_hc_v1, "multi_occupancy_hc_v1"},
    {Model::multi_occupancy_hc_v2, "multi_occupancy_hc_v2"},
};

[[noreturn]] void out_of_range(const std::string& msg) { throw Error("ParamOutOfRange", msg); }

int need_q(const CatalogParams& p, int lo) {
    if (!p.q) out_of_range("parameter q is required");
    if (*p.q < lo) out_of_range("q must be at least " + std::to_string(lo));
    return *p.q;
}

Num need_positive(const std::optional<Num>& x, const char* name) {
    if (!x) out_of_range(std::string("parameter ") + name + " is required");
    if (x->sign() <= 0) out_of_range(std::string(name) + " must be positive");
    return *x;
}

// e^{-beta} from whichever form the caller supplied.
Num boltzmann(const CatalogParams& p, bool allow_zero) {
    if (p.exp_neg_beta) {
        const Num& t = *p.exp_neg_beta;
        if (t.sign() < 0 || t > Num(1)) out_of_range("exp_neg_beta must lie in [0,1]");
        if (t == Num(1)) out_of_range("beta must be positive");
        if (t.is_zero() && !allow_zero) out_of_range("zero temperature is not allowed for this model");
        return t;
    }
    if (!p.beta) out_of_range("an inverse temperature (beta or exp_neg_beta) is required");
    double b = *p.beta;
    if (!(b > 0)) out_of_range("beta must be positive");
    if (std::isinf(b)) {
        if (!allow_zero) out_of_range("zero temperature is not allowed for this model");
        return Num(0);
    }
    return Num(std::exp(-b));
}

Mode mode_of(const std::vector<Num>& act, const Matrix& inter) {
    for (const auto& x : act)
        if (!x.exact()) return Mode::Float;
    for (const auto& row : inter)
        for (const auto& x : row)
            if (!x.exact()) return Mode::Float;
    return Mode::Rational;
}

SpinSystem assemble(std::vector<std::string> labels, std::vector<Num> act, Matrix inter) {
    Mode mode = mode_of(act, inter);
    return SpinSystem(std::move(labels), std::move(act), std::move(inter), mode);
}

template <class Fn>
Matrix matrix(int n, Fn&& fn) {
    Matrix m(static_cast<std::size_t>(n), std::vector<Num>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = fn(i, j);
    return m;
}

std::vector<std::string> range_labels(int from, int to) {
    std::vector<std::string> out;
    for (int i = from; i <= to; ++i) out.push_back(std::to_string(i));
    return out;
}

Num ind(bool b) { return Num(b ? 1 : 0); }

Num potts_weight(bool equal, const Num& t) { return equal ? t : (t.exact() ? Num(1) : Num(1.0)); }

}  // namespace

const std::vector<Model>& all_models() {
    static const std::vector<Model> v = [] {
        std::vector<Model> out;
        for (const auto& n : kNames) out.push_back(n.model);
        return out;
    }();
    return v;
}

std::string model_name(Model m) {
    for (const auto& n : kNames)
        if (n.model == m) return n.name;
    return "?";
}

Model model_from_name(const std::string& name) {
    for (const auto& n : kNames)
        if (name == n.name) return n.model;
    throw Error("UnknownModel", "no catalog model named '" + name + "'");
}

SpinSystem build(const CatalogEntry& e) {
    const CatalogParams& p = e.params;
    switch (e.model) {
        case Model::af_potts: {
            int q = need_q(p, 2);
            Num t = boltzmann(p, true);
            return assemble(range_labels(1, q), std::vector<Num>(static_cast<std::size_t>(q), Num(1)),
                            matrix(q, [&](int i, int j) { return potts_weight(i == j, t); }));
        }
        case Model::af_potts_field: {
            int q = need_q(p, 2);
            Num t = boltzmann(p, true);
            Num lam;
            if (p.lambda) {
                lam = need_positive(p.lambda, "lambda");
            } else if (p.h && p.beta && std::isfinite(*p.beta)) {
                lam = Num(std::exp(*p.beta * *p.h));
            } else {
                out_of_range("af_potts_field needs lambda = e^{beta h}, or finite beta together with h");
            }
            std::vector<Num> act(static_cast<std::size_t>(q), Num(1));
            act[0] = lam;
            return assemble(range_labels(1, q), std::move(act),
                            matrix(q, [&](int i, int j) { return potts_weight(i == j, t); }));
        }
        case Model::af_ising_field: {
            Num t = boltzmann(p, false);
            Num a;
            if (p.lambda) {
                a = need_positive(p.lambda, "lambda");
            } else if (p.h && p.beta) {
                a = Num(std::exp(*p.beta * *p.h));
            } else {
                out_of_range("af_ising_field needs lambda = e^{beta h}, or beta together with h");
            }
            Num one = a.exact() ? Num(1) : Num(1.0);
            std::vector<Num> act{one / a, a};
            Num inv = (t.exact() ? Num(1) : Num(1.0)) / t;
            return assemble({"-1", "+1"}, std::move(act), matrix(2, [&](int i, int j) { return i == j ? t : inv; }));
        }
        case Model::hard_core: {
            Num lam = need_positive(p.lambda, "lambda");
            return assemble({"0", "1"}, {Num(1), lam}, matrix(2, [](int i, int j) { return ind(i * j == 0); }));
        }
        case Model::hard_core_unequal: {
            Num le = need_positive(p.lambda_e, "lambda_e");
            Num lo = need_positive(p.lambda_o, "lambda_o");
            return assemble(range_labels(0, 3), {le, Num(1), Num(1), lo},
                            matrix(4, [](int i, int j) { return ind(std::abs(i - j) == 1); }));
        }
        case Model::widom_rowlinson: {
            Num lam = need_positive(p.lambda, "lambda");
            // states -1, 0, 1
            return assemble({"-1", "0", "1"}, {lam, Num(1), lam},
                            matrix(3, [](int i, int j) { return ind((i - 1) * (j - 1) != -1); }));
        }
        case Model::clock: {
            int q = need_q(p, 1);
            if (!p.m) out_of_range("parameter m is required");
            int m = *p.m;
            if (m < 1 || 4 * m >= q) out_of_range("clock models require 1 <= m < q/4");
            Num t = boltzmann(p, true);
            Num one = t.exact() ? Num(1) : Num(1.0);
            return assemble(range_labels(0, q - 1), std::vector<Num>(static_cast<std::size_t>(q), Num(1)),
                            matrix(q, [&](int i, int j) {
                                int k = std::abs(i - j);
                                return std::min(k, q - k) <= m ? one : t;
                            }));
        }
        case Model::beach: {
            Num lam = need_positive(p.lambda, "lambda");
            const int val[] = {-2, -1, 1, 2};
            std::vector<Num> act;
            for (int v : val) act.push_back(std::abs(v) == 1 ? Num(1) : lam);
            return assemble({"-2", "-1", "1", "2"}, std::move(act),
                            matrix(4, [&](int i, int j) { return ind(val[i] * val[j] >= -1); }));
        }
        case Model::multi_wr:
        case Model::anti_wr: {
            int q = need_q(p, 1);
            Num lam = need_positive(p.lambda, "lambda");
            std::vector<Num> act(static_cast<std::size_t>(q + 1), lam);
            act[0] = Num(1);
            bool anti = e.model == Model::anti_wr;
            return assemble(range_labels(0, q), std::move(act), matrix(q + 1, [&](int i, int j) {
                                return ind(i * j == 0 || (anti ? i != j : i == j));
                            }));
        }
        case Model::multi_beach: {
            int q = need_q(p, 1);
            Num lam = need_positive(p.lambda, "lambda");
            std::vector<std::string> labels;
            std::vector<Num> act;
            for (int s = 0; s < 2; ++s)
                for (int i = 1; i <= q; ++i) {
                    labels.push_back(std::to_string(i) + (s ? "'" : ""));
                    act.push_back(s ? lam : Num(1));
                }
            return assemble(std::move(labels), std::move(act), matrix(2 * q, [&](int x, int y) {
                                int s = x / q, i = x % q, t = y / q, j = y % q;
                                return ind((s == 0 && t == 0) || i == j);
                            }));
        }
        case Model::multi_occupancy_hc_v1:
        case Model::multi_occupancy_hc_v2: {
            int q = need_q(p, 1);
            Num lam = need_positive(p.lambda, "lambda");
            std::vector<Num> act;
            Num pw = Num(1), fact = Num(1);
            for (int i = 0; i <= q; ++i) {
                if (i > 0) {
                    pw *= lam;
                    fact *= Num(i);
                }
                act.push_back(e.model == Model::multi_occupancy_hc_v1 ? pw / fact : pw);
            }
            return assemble(range_labels(0, q), std::move(act),
                            matrix(q + 1, [&](int i, int j) { return ind(i + j <= q); }));
        }
    }
    throw Error("UnknownModel", "unhandled model");
}

bool same_inv(const InvValue& a, const InvValue& b, double rel_tol) {
    if (a.infinite || b.infinite) return a.infinite == b.infinite;
    return near_equal(a.value, b.value, rel_tol);
}

namespace {

[[noreturn]] void not_tabulated(const std::string& msg) { throw Error("NotTabulated", msg); }

InvValue finite(const Num& x) { return {false, x}; }

InvValue safe_ratio(const Num& num, const Num& den) {
    if (den.is_zero()) return InvValue::inf();
    return finite(num / den);
}

Num min_num(const Num& a, const Num& b) { return a < b ? a : b; }
Num max_num(const Num& a, const Num& b) { return a > b ? a : b; }

// Geometric sum 1 + x + ... + x^{k-1}, well defined at x = 1.
Num geom(const Num& x, int k) {
    Num s = Num(0), pw = Num(1);
    for (int i = 0; i < k; ++i) {
        s += pw;
        pw *= x;
    }
    return x.exact() ? s : s.to_float();
}

}  // namespace

ExpectedParameters expected_parameters(const CatalogEntry& e) {
    const CatalogParams& p = e.params;
    (void)build(e);  // validates the parameters
    const Num one(1);
    switch (e.model) {
        case Model::af_potts: {
            int q = *p.q;
            int f = q / 2, c = q - f;
            Num omega = Num(f * c);
            InvValue bulk = f == 1 ? InvValue::inf()
                                   : finite((one + one / Num(f - 1)) * (one - one / Num(c + 1)));
            InvValue bdry = c == 1 ? InvValue::inf() : finite(one + one / Num(c - 1));
            return {omega, bulk, bdry};
        }
        case Model::beach: {
            Num l = *p.lambda;
            Num s = (one + l) * (one + l);
            if (l > one) return {s, finite(min_num(s / Num(4), s / (Num(2) + l))), finite(one + l)};
            if (l < one) return {Num(4), finite(min_num(Num(4) / (Num(2) + l), Num(4) / s)), finite(Num(2))};
            not_tabulated("the beach table splits at lambda = 1");
        }
        case Model::clock: {
            int m = *p.m;
            return {Num((m + 1) * (m + 1)), finite(one + one / Num(m * (m + 2))), finite(one + one / Num(m))};
        }
        case Model::hard_core: {
            Num l = *p.lambda;
            return {one + l, InvValue::inf(), finite(one + l)};
        }
        case Model::widom_rowlinson: {
            Num l = *p.lambda;
            return {(one + l) * (one + l), finite(one + l * l / (one + Num(2) * l)), finite(one + l)};
        }
        case Model::multi_occupancy_hc_v2: {
            int q = *p.q;
            int f = q / 2, c = q - f;
            Num l = *p.lambda;
            Num omega = geom(l, f + 1) * geom(l, c + 1);
            return {omega, safe_ratio(omega, geom(l, f) * geom(l, c + 2)), safe_ratio(geom(l, c + 1), geom(l, c))};
        }
        case Model::multi_wr: {
            int q = need_q(p, 2);
            Num l = *p.lambda;
            Num ql = one + Num(q) * l;
            Num s = (one + l) * (one + l);
            if (l < Num(q - 2)) return {ql, finite(ql / s), finite(ql / (one + l))};
            if (l > Num(q - 2)) return {s, finite(s / ql), finite(one + l)};
            not_tabulated("the multi-type Widom-Rowlinson table splits at lambda = q-2");
        }
        case Model::anti_wr: {
            int q = need_q(p, 2);
            int f = q / 2, c = q - f;
            Num l = *p.lambda;
            Num omega = (one + l * Num(f)) * (one + l * Num(c));
            return {omega, finite(omega / ((one + l * Num(f - 1)) * (one + l * Num(c + 1)))),
                    finite((one + l * Num(c)) / (one + l * Num(c - 1)))};
        }
        case Model::multi_beach: {
            int q = need_q(p, 2);
            Num l = *p.lambda;
            Num s = (one + l) * (one + l);
            Num q2 = Num(q * q);
            if (l > Num(q - 1)) return {s, finite(s / max_num(q2, Num(q) + l)), finite(one + l)};
            if (l < Num(q - 1)) return {q2, finite(q2 / max_num(s, Num(q) + l)), finite(Num(q))};
            not_tabulated("the multi-type beach table splits at lambda = q-1");
        }
        default:
            not_tabulated("model " + model_name(e.model) + " has no row in the parameter table");
    }
}

}  // namespace spinlab
