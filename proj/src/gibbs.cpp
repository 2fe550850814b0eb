#include "spinlab/gibbs.hpp"

#include "spinlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace spinlab {

VertexSet domain_boundary(const Lattice& g) {
    VertexSet b = g.empty_set();
    if (g.kind() == Lattice::Kind::torus) return b;
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        int inside = 0;
        for (int u : g.neighbors(v)) inside += g.exterior(u) ? 0 : 1;
        if (inside < 2 * g.dim()) b[static_cast<std::size_t>(v)] = 1;
    }
    return b;
}

std::vector<Mask> allowed_values(const SpinSystem& sys, const Lattice& g, const std::optional<Pattern>& boundary) {
    auto bd = domain_boundary(g);
    std::vector<Mask> out(static_cast<std::size_t>(g.size()), 0);
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        if (boundary && bd[static_cast<std::size_t>(v)]) out[static_cast<std::size_t>(v)] = g.is_even(v) ? boundary->A : boundary->B;
        else out[static_cast<std::size_t>(v)] = sys.all();
    }
    return out;
}

bool in_pattern(const Lattice& g, int v, int value, const Pattern& P) {
    return contains(g.is_even(v) ? P.A : P.B, value);
}

Num domain_weight(const SpinSystem& sys, const Lattice& g, const Configuration& f) {
    Num w = sys.exact() ? Num(1) : Num(1.0);
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        w *= sys.activity(f[static_cast<std::size_t>(v)]);
        for (int u : g.neighbors(v))
            if (v < u && !g.exterior(u)) w *= sys.interaction(f[static_cast<std::size_t>(v)], f[static_cast<std::size_t>(u)]);
    }
    return w;
}

bool admissible(const SpinSystem& sys, const Lattice& g, const Configuration& f) {
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        for (int u : g.neighbors(v))
            if (!g.exterior(u) && sys.interaction(f[static_cast<std::size_t>(v)], f[static_cast<std::size_t>(u)]).is_zero())
                return false;
    }
    return true;
}

namespace {

constexpr std::size_t kMaxSliceStates = 20000;
constexpr double kMaxTransferWork = 2e9;
constexpr std::size_t kMaxTorusStates = 2048;

struct Slicing {
    std::vector<std::vector<int>> slices;        // vertex per position, per slice
    std::vector<std::pair<int, int>> internal;   // position pairs adjacent within a slice
    int M = 0;
    long domain_edges = 0;
    int domain_size = 0;
};

Slicing make_slicing(const Lattice& g) {
    Slicing s;
    const int L0 = g.sides()[0];
    s.slices.assign(static_cast<std::size_t>(L0), {});
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        s.slices[static_cast<std::size_t>(g.coords(v)[0])].push_back(v);
        ++s.domain_size;
        for (int u : g.neighbors(v))
            if (v < u && !g.exterior(u)) ++s.domain_edges;
    }
    s.M = static_cast<int>(s.slices[0].size());
    const auto& sl = s.slices[0];
    for (int p = 0; p < s.M; ++p)
        for (int q = p + 1; q < s.M; ++q) {
            const auto& nb = g.neighbors(sl[static_cast<std::size_t>(p)]);
            if (std::find(nb.begin(), nb.end(), sl[static_cast<std::size_t>(q)]) != nb.end()) s.internal.emplace_back(p, q);
        }
    return s;
}

// Slice assignments compatible with the allowed sets and with positive
// interactions inside the slice, stored flat (K rows of M values).
std::vector<std::uint8_t> slice_states(const SpinSystem& sys, const Slicing& s, const std::vector<int>& slice,
                                       const std::vector<Mask>& allowed) {
    const int M = s.M;
    std::vector<std::vector<int>> earlier(static_cast<std::size_t>(M));
    for (auto [p, q] : s.internal) earlier[static_cast<std::size_t>(q)].push_back(p);
    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> cur(static_cast<std::size_t>(M), 0);
    auto rec = [&](auto&& self, int p) -> void {
        if (p == M) {
            out.insert(out.end(), cur.begin(), cur.end());
            if (out.size() / static_cast<std::size_t>(std::max(M, 1)) > kMaxSliceStates)
                throw ResourceError("StateSpaceTooLarge", "too many admissible slice states for the transfer matrix");
            return;
        }
        for (int i : members(allowed[static_cast<std::size_t>(slice[static_cast<std::size_t>(p)])])) {
            bool ok = true;
            for (int q : earlier[static_cast<std::size_t>(p)])
                if (sys.interaction(i, cur[static_cast<std::size_t>(q)]).is_zero()) {
                    ok = false;
                    break;
                }
            if (!ok) continue;
            cur[static_cast<std::size_t>(p)] = static_cast<std::uint8_t>(i);
            self(self, p + 1);
        }
    };
    rec(rec, 0);
    return out;
}

// Integer-scaled weights for exact evaluation, or plain doubles.
template <class T>
struct Weights {
    std::vector<T> act;
    std::vector<std::vector<T>> inter;
};

Weights<mpz_class> integer_weights(const SpinSystem& sys, mpz_class& act_den, mpz_class& int_den) {
    const int n = sys.size();
    act_den = 1;
    int_den = 1;
    for (int i = 0; i < n; ++i) {
        mpz_lcm(act_den.get_mpz_t(), act_den.get_mpz_t(), sys.activity(i).q().get_den_mpz_t());
        for (int j = 0; j < n; ++j)
            mpz_lcm(int_den.get_mpz_t(), int_den.get_mpz_t(), sys.interaction(i, j).q().get_den_mpz_t());
    }
    Weights<mpz_class> w;
    for (int i = 0; i < n; ++i) {
        mpq_class a = sys.activity(i).q() * act_den;
        w.act.push_back(a.get_num());
        std::vector<mpz_class> row;
        for (int j = 0; j < n; ++j) {
            mpq_class b = sys.interaction(i, j).q() * int_den;
            row.push_back(b.get_num());
        }
        w.inter.push_back(row);
    }
    return w;
}

Weights<double> float_weights(const SpinSystem& sys) {
    Weights<double> w;
    for (int i = 0; i < sys.size(); ++i) {
        w.act.push_back(sys.activity(i).d());
        std::vector<double> row;
        for (int j = 0; j < sys.size(); ++j) row.push_back(sys.interaction(i, j).d());
        w.inter.push_back(row);
    }
    return w;
}

inline bool is_zero(const mpz_class& x) { return x == 0; }
inline bool is_zero(double x) { return x == 0.0; }

// Rescales a vector of doubles to max 1 and returns the log of the factor.
inline double rescale(std::vector<double>& v) {
    double m = 0;
    for (double x : v) m = std::max(m, x);
    if (m == 0) return 0;
    for (double& x : v) x /= m;
    return std::log(m);
}
inline double rescale(std::vector<mpz_class>&) { return 0; }

template <class T>
struct SliceData {
    std::vector<std::uint8_t> states;
    std::size_t K = 0;
    std::vector<T> w;
};

template <class T>
SliceData<T> build_slice(const SpinSystem& sys, const Slicing& s, const std::vector<int>& slice,
                         const std::vector<Mask>& allowed, const Weights<T>& W) {
    SliceData<T> d;
    d.states = slice_states(sys, s, slice, allowed);
    const std::size_t M = static_cast<std::size_t>(s.M);
    d.K = M == 0 ? 0 : d.states.size() / M;
    d.w.resize(d.K);
    for (std::size_t k = 0; k < d.K; ++k) {
        const std::uint8_t* st = &d.states[k * M];
        T x = W.act[st[0]];
        for (std::size_t p = 1; p < M; ++p) x *= W.act[st[p]];
        for (auto [p, q] : s.internal) x *= W.inter[st[p]][st[q]];
        d.w[k] = x;
    }
    return d;
}

template <class T>
T transfer(const Weights<T>& W, const std::uint8_t* a, const std::uint8_t* b, std::size_t M) {
    T x = W.inter[a[0]][b[0]];
    for (std::size_t p = 1; p < M && !is_zero(x); ++p) x *= W.inter[a[p]][b[p]];
    return x;
}

template <class T>
struct BoxResult {
    T z;
    double log_scale = 0;
    // counts[v][i] ∝ Pr(f(v) = i) together with the normaliser per slice
    std::vector<std::vector<T>> counts;
    std::vector<T> norm;  // per vertex
};

template <class T>
BoxResult<T> run_box(const SpinSystem& sys, const Lattice& g, const Slicing& s, const std::vector<Mask>& allowed,
                     const Weights<T>& W) {
    const std::size_t L = s.slices.size();
    const std::size_t M = static_cast<std::size_t>(s.M);
    const int n = sys.size();
    std::vector<SliceData<T>> sl;
    for (std::size_t k = 0; k < L; ++k) sl.push_back(build_slice(sys, s, s.slices[k], allowed, W));
    for (std::size_t k = 0; k + 1 < L; ++k)
        if (static_cast<double>(sl[k].K) * static_cast<double>(sl[k + 1].K) * static_cast<double>(M) > kMaxTransferWork)
            throw ResourceError("StateSpaceTooLarge", "transfer matrix too large");

    std::vector<std::vector<T>> alpha(L), beta(L);
    std::vector<double> la(L, 0.0), lb(L, 0.0);
    alpha[0] = sl[0].w;
    la[0] = rescale(alpha[0]);
    for (std::size_t k = 1; k < L; ++k) {
        alpha[k].assign(sl[k].K, T(0));
        for (std::size_t b = 0; b < sl[k].K; ++b) {
            if (is_zero(sl[k].w[b])) continue;
            T acc = 0;
            for (std::size_t a = 0; a < sl[k - 1].K; ++a) {
                if (is_zero(alpha[k - 1][a])) continue;
                T t = transfer(W, &sl[k - 1].states[a * M], &sl[k].states[b * M], M);
                if (!is_zero(t)) acc += alpha[k - 1][a] * t;
            }
            alpha[k][b] = acc * sl[k].w[b];
        }
        la[k] = la[k - 1] + rescale(alpha[k]);
    }
    beta[L - 1].assign(sl[L - 1].K, T(1));
    for (std::size_t k = L - 1; k-- > 0;) {
        beta[k].assign(sl[k].K, T(0));
        std::vector<T> nxt(sl[k + 1].K);
        for (std::size_t b = 0; b < sl[k + 1].K; ++b) nxt[b] = sl[k + 1].w[b] * beta[k + 1][b];
        for (std::size_t a = 0; a < sl[k].K; ++a) {
            T acc = 0;
            for (std::size_t b = 0; b < sl[k + 1].K; ++b) {
                if (is_zero(nxt[b])) continue;
                T t = transfer(W, &sl[k].states[a * M], &sl[k + 1].states[b * M], M);
                if (!is_zero(t)) acc += nxt[b] * t;
            }
            beta[k][a] = acc;
        }
        lb[k] = lb[k + 1] + rescale(beta[k]);
    }

    BoxResult<T> r;
    r.z = 0;
    for (const auto& x : alpha[L - 1]) r.z += x;
    r.log_scale = la[L - 1];
    r.counts.assign(static_cast<std::size_t>(g.size()), {});
    r.norm.assign(static_cast<std::size_t>(g.size()), T(0));
    for (std::size_t k = 0; k < L; ++k) {
        T tot = 0;
        std::vector<std::vector<T>> c(M, std::vector<T>(static_cast<std::size_t>(n), T(0)));
        for (std::size_t a = 0; a < sl[k].K; ++a) {
            T x = alpha[k][a] * beta[k][a];
            if (is_zero(x)) continue;
            tot += x;
            for (std::size_t p = 0; p < M; ++p) c[p][sl[k].states[a * M + p]] += x;
        }
        for (std::size_t p = 0; p < M; ++p) {
            int v = s.slices[k][p];
            r.counts[static_cast<std::size_t>(v)] = c[p];
            r.norm[static_cast<std::size_t>(v)] = tot;
        }
    }
    return r;
}

template <class T>
using Matrix = std::vector<std::vector<T>>;

template <class T>
Matrix<T> matmul(const Matrix<T>& A, const Matrix<T>& B, double& log_scale) {
    const std::size_t K = A.size();
    Matrix<T> C(K, std::vector<T>(K, T(0)));
    for (std::size_t i = 0; i < K; ++i)
        for (std::size_t k = 0; k < K; ++k) {
            if (is_zero(A[i][k])) continue;
            for (std::size_t j = 0; j < K; ++j)
                if (!is_zero(B[k][j])) C[i][j] += A[i][k] * B[k][j];
        }
    if constexpr (std::is_same_v<T, double>) {
        double m = 0;
        for (const auto& row : C)
            for (double x : row) m = std::max(m, x);
        if (m > 0) {
            for (auto& row : C)
                for (double& x : row) x /= m;
            log_scale += std::log(m);
        }
    }
    return C;
}

template <class T>
struct TorusResult {
    Matrix<T> power;  // M^{L0}
    double log_scale = 0;
    SliceData<T> slice;
};

template <class T>
TorusResult<T> run_torus(const SpinSystem& sys, const Slicing& s, const std::vector<Mask>& allowed,
                         const Weights<T>& W) {
    const std::size_t M = static_cast<std::size_t>(s.M);
    TorusResult<T> r;
    r.slice = build_slice(sys, s, s.slices[0], allowed, W);
    const std::size_t K = r.slice.K;
    if (K > kMaxTorusStates) throw ResourceError("StateSpaceTooLarge", "too many slice states for torus powers");
    Matrix<T> step(K, std::vector<T>(K, T(0)));
    for (std::size_t a = 0; a < K; ++a)
        for (std::size_t b = 0; b < K; ++b)
            step[a][b] = r.slice.w[a] * transfer(W, &r.slice.states[a * M], &r.slice.states[b * M], M);
    std::size_t e = s.slices.size();
    double ls_base = 0;
    std::optional<Matrix<T>> acc;
    double ls_acc = 0;
    Matrix<T> base = step;
    while (e > 0) {
        if (e & 1) {
            if (!acc) {
                acc = base;
                ls_acc = ls_base;
            } else {
                double extra = 0;
                acc = matmul(*acc, base, extra);
                ls_acc += ls_base + extra;
            }
        }
        e >>= 1;
        if (e) {
            double extra = 0;
            base = matmul(base, base, extra);
            ls_base = 2 * ls_base + extra;
        }
    }
    r.power = std::move(*acc);
    r.log_scale = ls_acc;
    return r;
}

Num to_num_ratio(const mpz_class& a, const mpz_class& b) {
    mpq_class q(a, b);
    q.canonicalize();
    return Num(q);
}


}  // namespace

ExactMeasure exact_measure(const SpinSystem& sys, const Lattice& g, const std::optional<Pattern>& boundary) {
    auto allowed = allowed_values(sys, g, boundary);
    Slicing s = make_slicing(g);
    const int n = sys.size();
    ExactMeasure out;
    out.marginals.assign(static_cast<std::size_t>(g.size()), {});
    if (boundary) out.not_in_pattern.assign(static_cast<std::size_t>(g.size()), Num(0));

    auto finish_marginals = [&](auto&& count_of, auto&& ratio) {
        for (int v = 0; v < g.size(); ++v) {
            if (g.exterior(v)) continue;
            std::vector<Num> m;
            for (int i = 0; i < n; ++i) m.push_back(ratio(count_of(v, i), v));
            if (boundary) {
                Num p = sys.exact() ? Num(0) : Num(0.0);
                for (int i = 0; i < n; ++i)
                    if (!in_pattern(g, v, i, *boundary)) p += m[static_cast<std::size_t>(i)];
                out.not_in_pattern[static_cast<std::size_t>(v)] = p;
            }
            out.marginals[static_cast<std::size_t>(v)] = std::move(m);
        }
    };

    const bool torus = g.kind() == Lattice::Kind::torus;
    if (sys.exact()) {
        mpz_class da, db;
        auto W = integer_weights(sys, da, db);
        mpz_class scale_a, scale_b;
        mpz_pow_ui(scale_a.get_mpz_t(), da.get_mpz_t(), static_cast<unsigned long>(s.domain_size));
        mpz_pow_ui(scale_b.get_mpz_t(), db.get_mpz_t(), static_cast<unsigned long>(s.domain_edges));
        mpz_class zint;
        if (torus) {
            auto r = run_torus(sys, s, allowed, W);
            zint = 0;
            for (std::size_t a = 0; a < r.slice.K; ++a) zint += r.power[a][a];
            if (zint == 0) throw Error("EmptySupport", "no configuration has positive weight");
            const std::size_t M = static_cast<std::size_t>(s.M);
            std::vector<std::vector<mpz_class>> c(M, std::vector<mpz_class>(static_cast<std::size_t>(n), 0));
            for (std::size_t a = 0; a < r.slice.K; ++a)
                for (std::size_t p = 0; p < M; ++p) c[p][r.slice.states[a * M + p]] += r.power[a][a];
            auto pos_of = [&](int v) {
                auto rest = g.coords(v);
                rest[0] = 0;
                int base = g.index(rest);
                const auto& sl = s.slices[0];
                return static_cast<std::size_t>(std::find(sl.begin(), sl.end(), base) - sl.begin());
            };
            finish_marginals([&](int v, int i) { return c[pos_of(v)][static_cast<std::size_t>(i)]; },
                             [&](const mpz_class& x, int) { return to_num_ratio(x, zint); });
        } else {
            auto r = run_box(sys, g, s, allowed, W);
            zint = r.z;
            if (zint == 0) throw Error("EmptySupport", "no configuration satisfies the boundary condition");
            finish_marginals([&](int v, int i) { return r.counts[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]; },
                             [&](const mpz_class& x, int v) { return to_num_ratio(x, r.norm[static_cast<std::size_t>(v)]); });
        }
        mpq_class z(zint, scale_a * scale_b);
        z.canonicalize();
        out.Z = Num(z);
        out.log_Z = log_q(z);
    } else {
        auto W = float_weights(sys);
        if (torus) {
            auto r = run_torus(sys, s, allowed, W);
            double tr = 0;
            for (std::size_t a = 0; a < r.slice.K; ++a) tr += r.power[a][a];
            if (tr == 0) throw Error("EmptySupport", "no configuration has positive weight");
            const std::size_t M = static_cast<std::size_t>(s.M);
            std::vector<std::vector<double>> c(M, std::vector<double>(static_cast<std::size_t>(n), 0.0));
            for (std::size_t a = 0; a < r.slice.K; ++a)
                for (std::size_t p = 0; p < M; ++p) c[p][r.slice.states[a * M + p]] += r.power[a][a];
            auto pos_of = [&](int v) {
                auto rest = g.coords(v);
                rest[0] = 0;
                int base = g.index(rest);
                const auto& sl = s.slices[0];
                return static_cast<std::size_t>(std::find(sl.begin(), sl.end(), base) - sl.begin());
            };
            finish_marginals([&](int v, int i) { return c[pos_of(v)][static_cast<std::size_t>(i)]; },
                             [&](double x, int) { return Num(x / tr); });
            out.log_Z = std::log(tr) + r.log_scale;
        } else {
            auto r = run_box(sys, g, s, allowed, W);
            if (r.z == 0) throw Error("EmptySupport", "no configuration satisfies the boundary condition");
            finish_marginals([&](int v, int i) { return r.counts[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)]; },
                             [&](double x, int v) { return Num(x / r.norm[static_cast<std::size_t>(v)]); });
            out.log_Z = std::log(r.z) + r.log_scale;
        }
        out.Z = Num(std::exp(out.log_Z));
    }
    return out;
}

mpq_class torus_partition_function(const SpinSystem& sys, const Lattice& torus) {
    if (torus.kind() != Lattice::Kind::torus) throw Error("InvalidLattice", "expected a torus");
    if (!sys.exact()) throw Error("SchemaError", "exact torus partition functions need a rational system");
    return exact_measure(sys, torus, std::nullopt).Z.q();
}

double log_z_per_vertex(const SpinSystem& sys, const Lattice& torus) {
    if (torus.kind() != Lattice::Kind::torus) throw Error("InvalidLattice", "expected a torus");
    auto m = exact_measure(sys, torus, std::nullopt);
    return m.log_Z / static_cast<double>(torus.size());
}

Configuration pattern_tiling(const SpinSystem& sys, const Lattice& g, const Pattern& P) {
    auto best = [&](Mask side) {
        int b = -1;
        for (int i : members(side))
            if (b < 0 || sys.activity(i) > sys.activity(b)) b = i;
        return b;
    };
    const int a = best(P.A), b = best(P.B);
    if (a < 0 || b < 0) throw Error("NoAdmissibleStart", "pattern side is empty");
    Configuration f(static_cast<std::size_t>(g.size()), -1);
    for (int v = 0; v < g.size(); ++v)
        if (!g.exterior(v)) f[static_cast<std::size_t>(v)] = g.is_even(v) ? a : b;
    return f;
}

bool local_irreducibility_probe(const SpinSystem& sys, const Lattice& g, const std::vector<Mask>& allowed) {
    for (int v = 0; v < g.size(); ++v) {
        if (g.exterior(v)) continue;
        Mask nbvals = 0;
        for (int u : g.neighbors(v)) nbvals |= allowed[static_cast<std::size_t>(u)];
        bool found = false;
        for (int i : members(allowed[static_cast<std::size_t>(v)])) {
            bool safe = true;
            for (int j : members(nbvals))
                if (sys.interaction(i, j).is_zero()) {
                    safe = false;
                    break;
                }
            if (safe) {
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

std::vector<double> heat_bath_kernel(const SpinSystem& sys, const Lattice& g, const std::vector<Mask>& allowed,
                                     const Configuration& f, int v) {
    const int n = sys.size();
    std::vector<double> p(static_cast<std::size_t>(n), 0.0);
    double tot = 0;
    for (int i : members(allowed[static_cast<std::size_t>(v)])) {
        double w = sys.activity(i).d();
        for (int u : g.neighbors(v))
            if (!g.exterior(u)) w *= sys.interaction(i, f[static_cast<std::size_t>(u)]).d();
        p[static_cast<std::size_t>(i)] = w;
        tot += w;
    }
    if (tot > 0)
        for (double& x : p) x /= tot;
    return p;
}

McmcResult mcmc_sample(const SpinSystem& sys, const Lattice& g, const std::optional<Pattern>& boundary,
                       const McmcOptions& opt, const SampleSink& sink) {
    auto allowed = allowed_values(sys, g, boundary);
    McmcResult res;
    bool positive = true;
    for (int i = 0; i < sys.size(); ++i)
        for (int j = 0; j < sys.size(); ++j)
            if (sys.interaction(i, j).is_zero()) positive = false;
    res.irreducibility_proven = positive || local_irreducibility_probe(sys, g, allowed);
    if (!res.irreducibility_proven) {
        if (!opt.waiver)
            throw Error("IrreducibilityUnknown",
                        "hard constraints present and the local probe could not certify irreducibility; pass the waiver to proceed");
        res.caveat = "irreducibility not certified: hard constraints may freeze the chain; estimates assume mixing";
    } else if (!positive) {
        res.caveat = "hard constraints present; irreducibility certified by the local probe";
    }

    Pattern tile_with;
    if (boundary) {
        tile_with = *boundary;
    } else {
        tile_with = analyze_patterns(sys).dominant.front();
    }
    Configuration f = opt.initial ? *opt.initial : pattern_tiling(sys, g, tile_with);
    if (static_cast<int>(f.size()) != g.size()) throw Error("DomainMismatch", "initial configuration has the wrong size");
    for (int v = 0; v < g.size(); ++v)
        if (!g.exterior(v) && !contains(allowed[static_cast<std::size_t>(v)], f[static_cast<std::size_t>(v)]))
            throw Error("NoAdmissibleStart", "initial configuration violates the boundary condition");
    if (!admissible(sys, g, f)) throw Error("NoAdmissibleStart", "initial configuration has zero weight");

    const int n = sys.size();
    std::vector<int> domain;
    for (int v = 0; v < g.size(); ++v)
        if (!g.exterior(v)) domain.push_back(v);
    // Dense float tables for the inner loop.
    std::vector<double> act(static_cast<std::size_t>(n));
    std::vector<double> inter(static_cast<std::size_t>(n * n));
    for (int i = 0; i < n; ++i) {
        act[static_cast<std::size_t>(i)] = sys.activity(i).d();
        for (int j = 0; j < n; ++j) inter[static_cast<std::size_t>(i * n + j)] = sys.interaction(i, j).d();
    }
    std::vector<std::vector<int>> inner_nb(static_cast<std::size_t>(g.size()));
    std::vector<std::vector<int>> choices(static_cast<std::size_t>(g.size()));
    for (int v : domain) {
        for (int u : g.neighbors(v))
            if (!g.exterior(u)) inner_nb[static_cast<std::size_t>(v)].push_back(u);
        choices[static_cast<std::size_t>(v)] = members(allowed[static_cast<std::size_t>(v)]);
    }

    Philox rng(opt.seed, 0);
    std::vector<double> w(static_cast<std::size_t>(n));
    auto update = [&](int v) {
        const auto& ch = choices[static_cast<std::size_t>(v)];
        double tot = 0;
        for (std::size_t t = 0; t < ch.size(); ++t) {
            int i = ch[t];
            double x = act[static_cast<std::size_t>(i)];
            for (int u : inner_nb[static_cast<std::size_t>(v)]) x *= inter[static_cast<std::size_t>(i * n + f[static_cast<std::size_t>(u)])];
            w[t] = x;
            tot += x;
        }
        double r = rng.uniform() * tot;
        std::size_t pick = 0;
        while (pick + 1 < ch.size() && (r -= w[pick]) >= 0) ++pick;
        if (w[pick] > 0) f[static_cast<std::size_t>(v)] = ch[pick];
        ++res.updates;
    };

    const std::int64_t kept = std::max<std::int64_t>(0, opt.sweeps - opt.burn_in);
    const int B = std::max(1, opt.batches);
    const std::int64_t batch_len = kept / B;
    struct Acc {
        std::vector<std::vector<double>> batch_sums;  // [batch][value]
        std::vector<double> off_sums;
    };
    std::vector<Acc> acc(opt.sites.size());
    for (auto& a : acc) {
        a.batch_sums.assign(static_cast<std::size_t>(B), std::vector<double>(static_cast<std::size_t>(n), 0.0));
        a.off_sums.assign(static_cast<std::size_t>(B), 0.0);
    }
    for (int v : opt.sites)
        if (v < 0 || v >= g.size() || g.exterior(v)) throw Error("InvalidVertex", "tracked site outside the domain");

    for (std::int64_t sweep = 0; sweep < opt.sweeps; ++sweep) {
        if (opt.random_site) {
            for (std::size_t t = 0; t < domain.size(); ++t) update(domain[rng.below(domain.size())]);
        } else {
            for (int v : domain) update(v);
        }
        const std::int64_t k = sweep - opt.burn_in;
        if (k >= 0 && batch_len > 0 && k < batch_len * B) {
            const std::size_t b = static_cast<std::size_t>(k / batch_len);
            for (std::size_t s = 0; s < opt.sites.size(); ++s) {
                int v = opt.sites[s];
                int x = f[static_cast<std::size_t>(v)];
                acc[s].batch_sums[b][static_cast<std::size_t>(x)] += 1.0;
                if (!in_pattern(g, v, x, tile_with)) acc[s].off_sums[b] += 1.0;
            }
        }
        if (sink && opt.thin > 0 && (sweep + 1) % opt.thin == 0) sink(sweep + 1, f);
    }
    res.sweeps = opt.sweeps;
    res.final_state = f;

    auto mean_se = [&](const std::vector<double>& xs) {
        double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
        double v = 0;
        for (double x : xs) v += (x - m) * (x - m);
        double se = xs.size() > 1 ? std::sqrt(v / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size())) : 0.0;
        return std::pair<double, double>(m, se);
    };
    for (std::size_t s = 0; s < opt.sites.size(); ++s) {
        SiteEstimate e;
        e.site = opt.sites[s];
        e.mean.assign(static_cast<std::size_t>(n), 0.0);
        e.std_error.assign(static_cast<std::size_t>(n), 0.0);
        if (batch_len > 0) {
            for (int i = 0; i < n; ++i) {
                std::vector<double> xs;
                for (int b = 0; b < B; ++b)
                    xs.push_back(acc[s].batch_sums[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)] / static_cast<double>(batch_len));
                auto [m, se] = mean_se(xs);
                e.mean[static_cast<std::size_t>(i)] = m;
                e.std_error[static_cast<std::size_t>(i)] = se;
            }
            std::vector<double> xs;
            for (int b = 0; b < B; ++b) xs.push_back(acc[s].off_sums[static_cast<std::size_t>(b)] / static_cast<double>(batch_len));
            auto [m, se] = mean_se(xs);
            e.not_in_pattern = m;
            e.not_in_pattern_se = se;
        }
        res.estimates.push_back(std::move(e));
    }
    return res;
}

void extend_outside(const SpinSystem& sys, const Lattice& g, Configuration& f, const Pattern& P, Philox& rng) {
    for (int v = 0; v < g.size(); ++v) {
        if (!g.exterior(v)) continue;
        Mask side = g.is_even(v) ? P.A : P.B;
        double tot = 0;
        for (int i : members(side)) tot += sys.activity(i).d();
        double r = rng.uniform() * tot;
        int pick = -1;
        for (int i : members(side)) {
            pick = i;
            if ((r -= sys.activity(i).d()) < 0) break;
        }
        f[static_cast<std::size_t>(v)] = pick;
    }
}

}  // namespace spinlab
