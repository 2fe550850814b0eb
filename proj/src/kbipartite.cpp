#include "spinlab/kbipartite.hpp"

#include "spinlab/error.hpp"
#include "spinlab/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace spinlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxGround = 20;
constexpr double kMaxCompositions = 5e6;

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    int depth = 0;
    for (char c : s) {
        if (c == '(' || c == '[') ++depth;
        if (c == ')' || c == ']') --depth;
        if (c == sep && depth == 0) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<int> parse_labels(const SpinSystem& sys, const std::string& text) {
    std::vector<int> out;
    if (text.empty()) return out;
    for (const auto& tok : split(text, ',')) out.push_back(sys.index_of(tok));
    return out;
}

std::string set_str(const SpinSystem& sys, Mask m) {
    std::string s;
    for (int i : members(m)) {
        if (!s.empty()) s += ',';
        s += sys.label(i);
    }
    return s;
}

void check_eps(double e, std::int64_t d, const char* what) {
    const double lo = 1.0 / (4.0 * static_cast<double>(d));
    if (!(e >= lo * (1 - 1e-12) && e <= 0.5 * (1 + 1e-12)))
        throw Error("ParamOutOfRange", std::string(what) + " must lie in [1/(4d), 1/2]");
}

// |psi^{-1}(I)| > 2d - 4 eps d
bool exceeds(long count, std::int64_t d, double eps) {
    const long double dd = static_cast<long double>(d);
    return static_cast<long double>(count) > 2.0L * dd - 4.0L * static_cast<long double>(eps) * dd;
}

std::set<Mask> dominant_side_set(const PatternCatalog& cat) {
    std::set<Mask> s;
    for (const auto& p : cat.dominant) {
        s.insert(p.A);
        s.insert(p.B);
    }
    return s;
}

void validate_class(const SpinSystem& sys, const std::vector<Mask>& rsets, std::int64_t d, const ClassSpec& c) {
    if (!std::binary_search(rsets.begin(), rsets.end(), c.J))
        throw Error("InvalidPsiSpec", "class set J={" + set_str(sys, c.J) + "} is not an R-set");
    if (c.kind == ClassSpec::Kind::one || c.kind == ClassSpec::Kind::balanced) check_eps(c.eps, d, "eps");
    if (c.kind == ClassSpec::Kind::two || c.kind == ClassSpec::Kind::balanced) check_eps(c.eps_bar, d, "eps_bar");
}

// Class membership decided from the multiplicity vector alone, using that the
// relevant subsets of J can be taken to be R-sets.
struct ClassTest {
    ClassSpec spec;
    Mask RJ = 0;
    std::vector<Mask> inner_rsets;
    std::vector<Mask> inner_dominant;
    std::int64_t d = 1;

    ClassTest(const SpinSystem& sys, const PatternCatalog& cat, std::int64_t d_, const ClassSpec& c)
        : spec(c), RJ(r_closure(sys, c.J)), d(d_) {
        for (Mask K : cat.r_sets)
            if (K != c.J && is_subset(K, c.J)) inner_rsets.push_back(K);
        for (Mask K : dominant_side_set(cat))
            if (K != c.J && is_subset(K, c.J)) inner_dominant.push_back(K);
    }

    static long mass(const std::vector<int>& xi, Mask K) {
        long s = 0;
        for (int i : members(K)) s += xi[static_cast<std::size_t>(i)];
        return s;
    }

    bool in_one(const std::vector<int>& xi) const {
        for (Mask K : inner_dominant)
            if (exceeds(mass(xi, K), d, spec.eps)) return true;
        return false;
    }
    bool in_two(const std::vector<int>& xi) const {
        for (Mask K : inner_rsets)
            if (exceeds(mass(xi, K), d, spec.eps_bar)) return true;
        return false;
    }

    bool operator()(const SpinSystem& sys, const std::vector<int>& xi) const {
        Mask supp = 0;
        for (std::size_t i = 0; i < xi.size(); ++i)
            if (xi[i] > 0) supp |= bit(static_cast<int>(i));
        if (r_closure(sys, supp) != RJ) return false;
        switch (spec.kind) {
            case ClassSpec::Kind::full: return true;
            case ClassSpec::Kind::one: return in_one(xi);
            case ClassSpec::Kind::two: return in_two(xi);
            case ClassSpec::Kind::balanced: return !in_one(xi) && !in_two(xi);
        }
        return false;
    }
};

mpz_class factorial(long n) {
    mpz_class r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return r;
}

mpq_class qpow(const mpq_class& x, unsigned long k) {
    mpz_class num, den;
    mpz_pow_ui(num.get_mpz_t(), x.get_num_mpz_t(), k);
    mpz_pow_ui(den.get_mpz_t(), x.get_den_mpz_t(), k);
    mpq_class r(num, den);
    r.canonicalize();
    return r;
}

double binom_d(double n, double k) { return std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1)); }

void guard_compositions(std::int64_t N, int m) {
    if (m > kMaxGround) throw ResourceError("GroundSetTooLarge", "ground set has more than 20 states");
    if (m > 0 && binom_d(static_cast<double>(N + m - 1), static_cast<double>(m - 1)) > kMaxCompositions)
        throw ResourceError("TooLarge", "too many multiplicity vectors to enumerate");
}

// Invokes fn(eta) for every eta in N^m with sum N.
template <class Fn>
void for_each_composition(int m, long N, Fn&& fn) {
    std::vector<int> eta(static_cast<std::size_t>(m), 0);
    if (m == 0) {
        if (N == 0) fn(eta);
        return;
    }
    auto rec = [&](auto&& self, int pos, long left) -> void {
        if (pos == m - 1) {
            eta[static_cast<std::size_t>(pos)] = static_cast<int>(left);
            fn(eta);
            return;
        }
        for (long k = left; k >= 0; --k) {
            eta[static_cast<std::size_t>(pos)] = static_cast<int>(k);
            self(self, pos + 1, left - k);
        }
    };
    rec(rec, 0, N);
}

using CountMap = std::map<std::vector<int>, mpz_class>;

// Number of functions with each multiplicity vector (indexed by state) among
// those with psi(j) in coords[j].
CountMap product_counts(int n, const std::vector<Mask>& coords) {
    std::map<Mask, long> groups;
    for (Mask c : coords) ++groups[c];
    std::vector<mpz_class> fact(coords.size() + 1);
    for (std::size_t k = 0; k <= coords.size(); ++k) fact[k] = factorial(static_cast<long>(k));
    CountMap cur;
    cur[std::vector<int>(static_cast<std::size_t>(n), 0)] = 1;
    for (const auto& [mask, c] : groups) {
        auto vals = members(mask);
        CountMap next;
        for (const auto& [xi, cnt] : cur) {
            for_each_composition(static_cast<int>(vals.size()), c, [&](const std::vector<int>& eta) {
                mpz_class ways = fact[static_cast<std::size_t>(c)];
                auto x = xi;
                for (std::size_t t = 0; t < vals.size(); ++t) {
                    ways /= fact[static_cast<std::size_t>(eta[t])];
                    x[static_cast<std::size_t>(vals[t])] += eta[t];
                }
                next[x] += cnt * ways;
            });
        }
        cur = std::move(next);
    }
    return cur;
}

CountMap multinomial_counts(int n, Mask ground, long N) {
    auto vals = members(ground);
    std::vector<mpz_class> fact(static_cast<std::size_t>(N) + 1);
    for (long k = 0; k <= N; ++k) fact[static_cast<std::size_t>(k)] = factorial(k);
    CountMap out;
    for_each_composition(static_cast<int>(vals.size()), N, [&](const std::vector<int>& eta) {
        mpz_class ways = fact[static_cast<std::size_t>(N)];
        std::vector<int> x(static_cast<std::size_t>(n), 0);
        for (std::size_t t = 0; t < vals.size(); ++t) {
            ways /= fact[static_cast<std::size_t>(eta[t])];
            x[static_cast<std::size_t>(vals[t])] = eta[t];
        }
        out[x] = ways;
    });
    return out;
}

struct Evaluator {
    const SpinSystem& sys;  // rational mode
    PatternCatalog cat;
    std::int64_t d;

    Evaluator(const SpinSystem& s, std::int64_t d_) : sys(s), cat(analyze_patterns(s)), d(d_) {}

    long N() const { return static_cast<long>(2 * d); }

    CountMap counts(const PsiSpec& spec) const {
        const int n = sys.size();
        switch (spec.kind) {
            case PsiSpec::Kind::explicit_list:
                throw Error("InvalidPsiSpec", "explicit families are summed directly, not by composition");
            case PsiSpec::Kind::product:
            case PsiSpec::Kind::class_intersect_product: {
                if (static_cast<long>(spec.coords.size()) != N())
                    throw Error("InvalidPsiSpec", "product spec must list one set per coordinate");
                Mask u = 0;
                for (Mask c : spec.coords) u |= c;
                guard_compositions(N(), popcount(u));
                return product_counts(n, spec.coords);
            }
            case PsiSpec::Kind::class_:
            case PsiSpec::Kind::class_minus:
                guard_compositions(N(), popcount(spec.cls.J));
                return multinomial_counts(n, spec.cls.J, N());
        }
        return {};
    }

    std::function<bool(const std::vector<int>&)> filter(const PsiSpec& spec) const {
        switch (spec.kind) {
            case PsiSpec::Kind::product:
                return [](const std::vector<int>&) { return true; };
            case PsiSpec::Kind::class_:
            case PsiSpec::Kind::class_intersect_product: {
                validate_class(sys, cat.r_sets, d, spec.cls);
                ClassTest t(sys, cat, d, spec.cls);
                return [t, this](const std::vector<int>& xi) { return t(sys, xi); };
            }
            case PsiSpec::Kind::class_minus: {
                validate_class(sys, cat.r_sets, d, spec.cls);
                validate_class(sys, cat.r_sets, d, spec.minus);
                ClassTest a(sys, cat, d, spec.cls), b(sys, cat, d, spec.minus);
                return [a, b, this](const std::vector<int>& xi) { return a(sys, xi) && !b(sys, xi); };
            }
            default:
                return [](const std::vector<int>&) { return false; };
        }
    }

    bool nonempty(const PsiSpec& spec) const {
        auto f = filter(spec);
        for (const auto& [xi, c] : counts(spec))
            if (c > 0 && f(xi)) return true;
        return false;
    }

    mpq_class z(const PsiSpec& spec, Mask I) const {
        const int n = sys.size();
        const long Nn = N();
        auto f = filter(spec);
        auto cm = counts(spec);
        std::vector<std::vector<mpq_class>> apow(static_cast<std::size_t>(n));
        std::vector<std::vector<std::vector<mpq_class>>> ipow(static_cast<std::size_t>(n));
        for (int u = 0; u < n; ++u) {
            auto& a = apow[static_cast<std::size_t>(u)];
            a.resize(static_cast<std::size_t>(Nn) + 1);
            a[0] = 1;
            for (long k = 1; k <= Nn; ++k) a[static_cast<std::size_t>(k)] = a[static_cast<std::size_t>(k - 1)] * sys.activity(u).q();
        }
        auto ilist = members(I);
        for (int i : ilist) {
            auto& t = ipow[static_cast<std::size_t>(i)];
            t.resize(static_cast<std::size_t>(n));
            for (int u = 0; u < n; ++u) {
                auto& row = t[static_cast<std::size_t>(u)];
                row.resize(static_cast<std::size_t>(Nn) + 1);
                row[0] = 1;
                for (long k = 1; k <= Nn; ++k)
                    row[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k - 1)] * sys.interaction(i, u).q();
            }
        }
        mpq_class total = 0;
        for (const auto& [xi, cnt] : cm) {
            if (cnt == 0 || !f(xi)) continue;
            mpq_class z0 = 1;
            for (int u = 0; u < n; ++u)
                if (xi[static_cast<std::size_t>(u)] > 0) z0 *= apow[static_cast<std::size_t>(u)][static_cast<std::size_t>(xi[static_cast<std::size_t>(u)])];
            mpq_class z1 = 0;
            for (int i : ilist) {
                mpq_class t = sys.activity(i).q();
                for (int u = 0; u < n && t != 0; ++u)
                    if (xi[static_cast<std::size_t>(u)] > 0)
                        t *= ipow[static_cast<std::size_t>(i)][static_cast<std::size_t>(u)][static_cast<std::size_t>(xi[static_cast<std::size_t>(u)])];
                z1 += t;
            }
            if (z1 == 0) continue;
            total += mpq_class(cnt) * z0 * qpow(z1, static_cast<unsigned long>(Nn));
        }
        return total;
    }

    // k_Psi for a product restriction of a class: coordinates whose set of
    // attained values is not R-equivalent to J.
    int k_psi(const PsiSpec& spec) const {
        const Mask RJ = r_closure(sys, spec.cls.J);
        std::map<Mask, Mask> attained;
        for (Mask c : spec.coords) {
            if (attained.count(c)) continue;
            Mask got = 0;
            for (int v : members(c)) {
                PsiSpec probe = spec;
                auto it = std::find(probe.coords.begin(), probe.coords.end(), c);
                *it = bit(v);
                if (nonempty(probe)) got |= bit(v);
            }
            attained[c] = got;
        }
        int k = 0;
        for (Mask c : spec.coords)
            if (r_closure(sys, attained[c]) != RJ) ++k;
        return k;
    }
};

}  // namespace

const char* class_kind_name(ClassSpec::Kind k) {
    switch (k) {
        case ClassSpec::Kind::full: return "full";
        case ClassSpec::Kind::one: return "one";
        case ClassSpec::Kind::two: return "two";
        case ClassSpec::Kind::balanced: return "balanced";
    }
    return "?";
}

PsiSpec PsiSpec::explicit_of(std::vector<std::vector<int>> fs) {
    PsiSpec p;
    p.kind = Kind::explicit_list;
    p.functions = std::move(fs);
    return p;
}

PsiSpec PsiSpec::product_of(std::vector<Mask> c) {
    PsiSpec p;
    p.kind = Kind::product;
    p.coords = std::move(c);
    return p;
}

PsiSpec PsiSpec::full_product(const SpinSystem& sys, std::int64_t d) {
    return product_of(std::vector<Mask>(static_cast<std::size_t>(2 * d), sys.all()));
}

PsiSpec PsiSpec::class_of(ClassSpec c) {
    PsiSpec p;
    p.kind = Kind::class_;
    p.cls = c;
    return p;
}

PsiSpec PsiSpec::difference(ClassSpec a, ClassSpec b) {
    PsiSpec p;
    p.kind = Kind::class_minus;
    p.cls = a;
    p.minus = b;
    return p;
}

PsiSpec PsiSpec::restricted(ClassSpec c, std::vector<Mask> coords) {
    PsiSpec p;
    p.kind = Kind::class_intersect_product;
    p.cls = c;
    p.coords = std::move(coords);
    return p;
}

Mask parse_state_set(const SpinSystem& sys, const std::string& text) {
    if (text == "all") return sys.all();
    Mask m = 0;
    for (int i : parse_labels(sys, text)) m |= bit(i);
    return m;
}

namespace {

PsiSpec parse_class(const SpinSystem& sys, const std::string& text) {
    auto parts = split(text, ':');
    if (parts.size() < 3 || parts[0] != "class" || parts[1].rfind("J=", 0) != 0)
        throw Error("InvalidPsiSpec", "expected class:J=...:kind, got '" + text + "'");
    ClassSpec c;
    c.J = parse_state_set(sys, parts[1].substr(2));
    for (std::size_t t = 3; t < parts.size(); ++t) {
        const auto& p = parts[t];
        if (p.rfind("eps=", 0) == 0) c.eps = Num::parse(p.substr(4), false).d();
        else if (p.rfind("epsbar=", 0) == 0) c.eps_bar = Num::parse(p.substr(7), false).d();
        else throw Error("InvalidPsiSpec", "unknown class option '" + p + "'");
    }
    const auto& kind = parts[2];
    if (kind == "unbalanced") {
        ClassSpec full = c, bal = c;
        full.kind = ClassSpec::Kind::full;
        bal.kind = ClassSpec::Kind::balanced;
        return PsiSpec::difference(full, bal);
    }
    if (kind == "full") c.kind = ClassSpec::Kind::full;
    else if (kind == "one") c.kind = ClassSpec::Kind::one;
    else if (kind == "two") c.kind = ClassSpec::Kind::two;
    else if (kind == "balanced") c.kind = ClassSpec::Kind::balanced;
    else throw Error("InvalidPsiSpec", "unknown class kind '" + kind + "'");
    return PsiSpec::class_of(c);
}

std::vector<Mask> parse_coords(const SpinSystem& sys, std::int64_t d, const std::string& body) {
    if (body == "all") return std::vector<Mask>(static_cast<std::size_t>(2 * d), sys.all());
    std::vector<Mask> coords;
    for (const auto& s : split(body, ';')) coords.push_back(parse_state_set(sys, s));
    if (static_cast<std::int64_t>(coords.size()) != 2 * d)
        throw Error("InvalidPsiSpec", "product spec needs exactly 2d coordinate sets");
    for (Mask c : coords)
        if (c == 0) throw Error("InvalidPsiSpec", "product coordinate sets must be nonempty");
    return coords;
}

}  // namespace

PsiSpec parse_psi(const SpinSystem& sys, std::int64_t d, const std::string& text) {
    auto amp = text.find('&');
    if (amp != std::string::npos) {
        PsiSpec c = parse_class(sys, text.substr(0, amp));
        std::string rest = text.substr(amp + 1);
        if (c.kind != PsiSpec::Kind::class_ || rest.rfind("product:", 0) != 0)
            throw Error("InvalidPsiSpec", "intersection must be '<class>&product:...'");
        return PsiSpec::restricted(c.cls, parse_coords(sys, d, rest.substr(8)));
    }
    if (text.rfind("class:", 0) == 0) return parse_class(sys, text);
    if (text.rfind("product:", 0) == 0) return PsiSpec::product_of(parse_coords(sys, d, text.substr(8)));
    if (text.rfind("explicit:", 0) == 0) {
        std::vector<std::vector<int>> fs;
        std::string body = text.substr(9);
        if (!body.empty())
            for (const auto& f : split(body, ';')) {
                auto v = parse_labels(sys, f);
                if (static_cast<std::int64_t>(v.size()) != 2 * d)
                    throw Error("InvalidPsiSpec", "each explicit function needs 2d values");
                fs.push_back(v);
            }
        return PsiSpec::explicit_of(fs);
    }
    throw Error("InvalidPsiSpec", "unrecognised family '" + text + "'");
}

std::string psi_to_string(const SpinSystem& sys, const PsiSpec& spec) {
    auto cls = [&](const ClassSpec& c) {
        std::ostringstream o;
        o << "class:J=" << set_str(sys, c.J) << ':' << class_kind_name(c.kind);
        if (c.kind == ClassSpec::Kind::one || c.kind == ClassSpec::Kind::balanced) o << ":eps=" << c.eps;
        if (c.kind == ClassSpec::Kind::two || c.kind == ClassSpec::Kind::balanced) o << ":epsbar=" << c.eps_bar;
        return o.str();
    };
    auto coords = [&]() {
        std::string s = "product:";
        for (std::size_t j = 0; j < spec.coords.size(); ++j) {
            if (j) s += ';';
            s += set_str(sys, spec.coords[j]);
        }
        return s;
    };
    switch (spec.kind) {
        case PsiSpec::Kind::explicit_list: {
            std::string s = "explicit:";
            for (std::size_t t = 0; t < spec.functions.size(); ++t) {
                if (t) s += ';';
                for (std::size_t j = 0; j < spec.functions[t].size(); ++j) {
                    if (j) s += ',';
                    s += sys.label(spec.functions[t][j]);
                }
            }
            return s;
        }
        case PsiSpec::Kind::product: return coords();
        case PsiSpec::Kind::class_: return cls(spec.cls);
        case PsiSpec::Kind::class_minus: return cls(spec.cls) + " minus " + cls(spec.minus);
        case PsiSpec::Kind::class_intersect_product: return cls(spec.cls) + "&" + coords();
    }
    return "";
}

namespace {

bool class_member_direct(const SpinSystem& sys, const std::set<Mask>& dom_sides, std::int64_t d, const ClassSpec& c,
                         const std::vector<int>& psi) {
    Mask image = 0;
    for (int v : psi) image |= bit(v);
    if (r_closure(sys, image) != r_closure(sys, c.J)) return false;
    auto count_in = [&](Mask I) {
        long k = 0;
        for (int v : psi) k += contains(I, v) ? 1 : 0;
        return k;
    };
    bool one = false, two = false;
    for_each_subset(c.J, [&](Mask I) {
        if (I == c.J) return;
        long k = count_in(I);
        if (dom_sides.count(I) && exceeds(k, d, c.eps)) one = true;
        if (r_closure(sys, I) != r_closure(sys, c.J) && exceeds(k, d, c.eps_bar)) two = true;
    });
    switch (c.kind) {
        case ClassSpec::Kind::full: return true;
        case ClassSpec::Kind::one: return one;
        case ClassSpec::Kind::two: return two;
        case ClassSpec::Kind::balanced: return !one && !two;
    }
    return false;
}

}  // namespace

bool psi_member(const SpinSystem& sys, const PatternCatalog& cat, std::int64_t d, const PsiSpec& spec,
                const std::vector<int>& psi) {
    auto dom = dominant_side_set(cat);
    auto in_coords = [&]() {
        for (std::size_t j = 0; j < psi.size(); ++j)
            if (!contains(spec.coords[j], psi[j])) return false;
        return true;
    };
    switch (spec.kind) {
        case PsiSpec::Kind::explicit_list:
            return std::find(spec.functions.begin(), spec.functions.end(), psi) != spec.functions.end();
        case PsiSpec::Kind::product: return in_coords();
        case PsiSpec::Kind::class_: return class_member_direct(sys, dom, d, spec.cls, psi);
        case PsiSpec::Kind::class_minus:
            return class_member_direct(sys, dom, d, spec.cls, psi) && !class_member_direct(sys, dom, d, spec.minus, psi);
        case PsiSpec::Kind::class_intersect_product:
            return in_coords() && class_member_direct(sys, dom, d, spec.cls, psi);
    }
    return false;
}

std::vector<std::vector<int>> expand_psi(const SpinSystem& sys, std::int64_t d, const PsiSpec& spec) {
    const int n = sys.size();
    const std::int64_t N = 2 * d;
    if (std::pow(static_cast<double>(n), static_cast<double>(N)) > std::pow(5.0, 6.0))
        throw ResourceError("TooLarge", "brute-force expansion is limited to |S|^{2d} <= 5^6");
    if (spec.kind == PsiSpec::Kind::explicit_list) return spec.functions;
    auto cat = analyze_patterns(sys);
    if (spec.kind != PsiSpec::Kind::product) {
        validate_class(sys, cat.r_sets, d, spec.cls);
        if (spec.kind == PsiSpec::Kind::class_minus) validate_class(sys, cat.r_sets, d, spec.minus);
    }
    std::vector<std::vector<int>> out;
    std::vector<int> psi(static_cast<std::size_t>(N), 0);
    while (true) {
        if (psi_member(sys, cat, d, spec, psi)) out.push_back(psi);
        std::int64_t j = 0;
        while (j < N && ++psi[static_cast<std::size_t>(j)] == n) psi[static_cast<std::size_t>(j++)] = 0;
        if (j == N) break;
    }
    return out;
}

Num z_bruteforce(const SpinSystem& sys, std::int64_t d, const std::vector<std::vector<int>>& psis, Mask I) {
    if (2 * d > 6 || sys.size() > 5) throw ResourceError("TooLarge", "brute force needs 2d <= 6 and |S| <= 5");
    const Num zero = sys.exact() ? Num(0) : Num(0.0);
    Num total = zero;
    for (const auto& psi : psis) {
        if (static_cast<std::int64_t>(psi.size()) != 2 * d)
            throw Error("InvalidPsiSpec", "explicit function of the wrong length");
        Num left = sys.exact() ? Num(1) : Num(1.0);
        for (int v : psi) left *= sys.activity(v);
        Num right = zero;
        for (int i : members(I)) {
            Num t = sys.activity(i);
            for (int v : psi) t *= sys.interaction(i, v);
            right += t;
        }
        total += left * right.pow(static_cast<long>(2 * d));
    }
    return total;
}

Rationalized rationalized(const SpinSystem& sys, unsigned long max_den) {
    if (sys.exact()) return {sys, 0.0};
    double err = 0;
    auto conv = [&](const Num& x) {
        mpq_class q = rationalize(x.d(), max_den);
        if (x.d() != 0) err = std::max(err, std::abs(q.get_d() - x.d()) / std::abs(x.d()));
        return Num(q);
    };
    std::vector<Num> act;
    for (const auto& a : sys.activities()) act.push_back(conv(a));
    std::vector<std::vector<Num>> inter;
    for (const auto& row : sys.interactions()) {
        std::vector<Num> r;
        for (const auto& x : row) r.push_back(conv(x));
        inter.push_back(r);
    }
    return {SpinSystem(sys.labels(), act, inter, Mode::Rational), err};
}

Num z_compositions(const SpinSystem& sys, std::int64_t d, const PsiSpec& spec, Mask I) {
    if (d < 1) throw Error("InvalidDimension", "d must be positive");
    if (d > 64) throw ResourceError("TooLarge", "composition evaluation is limited to d <= 64");
    auto rs = rationalized(sys);
    Evaluator ev(rs.system, d);
    mpq_class z = ev.z(spec, I);
    return sys.exact() ? Num(z) : Num(z.get_d());
}

Num lambda_restricted_power(const SpinSystem& sys, Mask A, std::int64_t n) {
    auto rs = r_sets(sys);
    Num total = sys.exact() ? Num(0) : Num(0.0);
    for (const auto& [K, mu] : mobius_below(rs, A)) {
        if (mu == 0) continue;
        total += Num(mu) * sys.activity_sum(K).pow(static_cast<long>(n));
    }
    return total;
}

double shearer_global_bound(const SpinSystem& sys, std::int64_t d) {
    auto rs = rationalized(sys);
    Evaluator ev(rs.system, d);
    mpq_class z = ev.z(PsiSpec::full_product(rs.system, d), rs.system.all());
    return log_q(z) / (4.0 * static_cast<double>(d));
}

MainConditionReport verify_main_condition(const SpinSystem& sys, std::int64_t d, double alpha, double gamma,
                                          double eps, double eps_bar, const LeftPolicy& policy) {
    if (d < 1) throw Error("InvalidDimension", "d must be positive");
    if (d > 64) throw ResourceError("TooLarge", "the general condition is evaluated for d <= 64 only");
    if (!near_equal(sys.lambda_max(), Num(1)))
        throw Error("NotNormalized", "the largest interaction must equal 1; normalize the system first");
    check_eps(eps, d, "eps");
    check_eps(eps_bar, d, "eps_bar");
    if (sys.size() > 16) throw ResourceError("TooLarge", "right-side subsets are enumerated for |S| <= 16 only");

    MainConditionReport rep;
    rep.d = d;
    rep.alpha = alpha;
    rep.gamma = gamma;
    rep.eps = eps;
    rep.eps_bar = eps_bar;
    rep.policy = policy;
    auto rs = rationalized(sys);
    rep.rationalization_error = rs.max_rel_error;
    const SpinSystem& X = rs.system;
    Evaluator ev(X, d);
    const auto& cat = ev.cat;
    const double dd = static_cast<double>(d);
    const double base = 2.0 * dd * cat.omega_dom.log() + 2.0 * gamma * dd;
    rep.alpha_requirement = alpha_requirement(cat.frak_q, d, eps, gamma);

    auto add = [&](std::string ineq, std::string J, std::string detail, int k, const mpq_class& z, double coef) {
        ConditionLine l;
        l.inequality = std::move(ineq);
        l.J = std::move(J);
        l.detail = std::move(detail);
        l.k = k;
        l.log_lhs = z == 0 ? -kInf : log_q(z);
        l.log_rhs = base - alpha * coef;
        l.holds = l.log_lhs <= l.log_rhs + 1e-12 * std::max(1.0, std::abs(l.log_rhs));
        if (l.log_lhs == -kInf) l.tight_alpha = kInf;
        else if (coef > 0) l.tight_alpha = (base - l.log_lhs) / coef;
        else l.tight_alpha = l.log_lhs <= base + 1e-12 * std::max(1.0, std::abs(base)) ? kInf : -kInf;
        rep.lines.push_back(std::move(l));
    };

    std::set<Mask> sides;
    for (const auto& p : cat.dominant) sides.insert(p.A);
    const Mask S = X.all();
    const std::int64_t N = 2 * d;
    std::mt19937_64 rng(policy.seed);

    for (Mask J : sides) {
        const std::string Js = set_str(X, J);
        ClassSpec bal{ClassSpec::Kind::balanced, J, eps, eps_bar};
        ClassSpec full{ClassSpec::Kind::full, J, eps, eps_bar};
        const Mask RJ = r_closure(X, J);

        std::vector<Mask> inner;
        for (Mask K : cat.r_sets)
            if (K != 0 && K != J && is_subset(K, J)) inner.push_back(K);

        // Product restrictions are invariant under permuting coordinates, so
        // each multiset of restricted sets is tested once.
        std::set<std::vector<Mask>> tested;
        auto test_left = [&](std::vector<Mask> restricted) {
            std::sort(restricted.begin(), restricted.end());
            if (!tested.insert(restricted).second) return;
            std::vector<Mask> coords = restricted;
            coords.resize(static_cast<std::size_t>(N), J);
            PsiSpec spec = PsiSpec::restricted(bal, coords);
            mpq_class z = ev.z(spec, S);
            int k = z == 0 ? 0 : ev.k_psi(spec);
            std::string detail = "restricted:";
            for (std::size_t t = 0; t < restricted.size(); ++t) detail += (t ? ";" : "") + set_str(X, restricted[t]);
            add("restricted-left", Js, detail, k, z, static_cast<double>(k));
        };
        const int rmax = static_cast<int>(std::min<std::int64_t>(policy.max_restricted, N));
        std::vector<Mask> cur;
        auto rec = [&](auto&& self, std::size_t from, int left) -> void {
            test_left(cur);
            if (left == 0) return;
            for (std::size_t t = from; t < inner.size(); ++t) {
                cur.push_back(inner[t]);
                self(self, t, left - 1);
                cur.pop_back();
            }
        };
        rec(rec, 0, rmax);
        if (!inner.empty())
            for (int s = 0; s < policy.random_samples; ++s) {
                std::vector<Mask> r;
                for (std::int64_t j = 0; j < N; ++j)
                    if (rng() & 1) r.push_back(inner[rng() % inner.size()]);
                test_left(r);
            }
        rep.restricted_left_tested += tested.size();

        for (Mask I = 0;; ++I) {
            if (!is_subset(RJ, r_closure(X, r_closure(X, I))))
                add("restricted-right", Js, "I={" + set_str(X, I) + "}", 0, ev.z(PsiSpec::class_of(bal), I), dd);
            if (I == S) break;
        }

        add("unbalanced", Js, "Psi_J minus balanced", 0, ev.z(PsiSpec::difference(full, bal), S), dd);
        add("highly-energetic", Js, "I=S\\R(J)", 0, ev.z(PsiSpec::class_of(bal), S & ~RJ), 3.0 * eps * dd * dd);
    }

    mpq_class nd = 0;
    std::string names;
    for (const auto& p : cat.maximal) {
        bool dom = std::any_of(cat.dominant.begin(), cat.dominant.end(), [&](const Pattern& q) { return q == p; });
        if (dom) continue;
        nd += ev.z(PsiSpec::class_of(ClassSpec{ClassSpec::Kind::full, p.A, 0.5, 0.5}), S);
        names += "{" + set_str(X, p.A) + "}";
    }
    add("non-dominant", "", names.empty() ? "no non-dominant maximal sides" : names, 0, nd, dd);

    rep.pass = std::all_of(rep.lines.begin(), rep.lines.end(), [](const ConditionLine& l) { return l.holds; });
    rep.tight_alpha = kInf;
    for (const auto& l : rep.lines) rep.tight_alpha = std::min(rep.tight_alpha, l.tight_alpha);
    return rep;
}

}  // namespace spinlab
