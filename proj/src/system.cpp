#include "spinlab/system.hpp"

#include "spinlab/error.hpp"

#include <cmath>
#include <functional>
#include <set>

namespace spinlab {

const char* mode_name(Mode m) { return m == Mode::Rational ? "rational" : "float"; }

SpinSystem::SpinSystem(std::vector<std::string> states, std::vector<Num> activities,
                       std::vector<std::vector<Num>> interactions, Mode mode)
    : states_(std::move(states)), act_(std::move(activities)), inter_(std::move(interactions)), mode_(mode) {
    const std::size_t n = states_.size();
    if (n == 0) throw Error("SchemaError", "spin system has no states");
    if (n > static_cast<std::size_t>(kMaxStates))
        throw Error("SpinSpaceTooLarge", "at most 64 states are supported");
    if (act_.size() != n) throw Error("SchemaError", "activities length differs from number of states");
    if (inter_.size() != n) throw Error("SchemaError", "interaction matrix has wrong number of rows");
    for (const auto& row : inter_)
        if (row.size() != n) throw Error("SchemaError", "interaction matrix is not square");
    std::set<std::string> seen(states_.begin(), states_.end());
    if (seen.size() != n) throw Error("SchemaError", "duplicate state labels");

    auto conform = [&](Num& x) {
        if (mode_ == Mode::Float) {
            x = x.to_float();
            if (!std::isfinite(x.d())) throw Error("SchemaError", "non-finite value");
        } else if (!x.exact()) {
            throw Error("SchemaError", "rational-mode system contains a floating value");
        }
    };
    for (auto& a : act_) {
        conform(a);
        if (a.sign() <= 0) throw Error("NonPositiveActivity", "activities must be strictly positive");
    }
    for (auto& row : inter_)
        for (auto& x : row) {
            conform(x);
            if (x.sign() < 0) throw Error("NegativeInteraction", "interactions must be non-negative");
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            bool same = inter_[i][j].exact() ? inter_[i][j].q() == inter_[j][i].q() : inter_[i][j].d() == inter_[j][i].d();
            if (!same)
                throw Error("NonSymmetricInteractions",
                            "interaction(" + states_[i] + "," + states_[j] + ") differs from its transpose");
        }

    int bi = 0, bj = 0;
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j)
            if (interaction(i, j) > interaction(bi, bj)) bi = i, bj = j;
    if (interaction(bi, bj).is_zero()) throw Error("AllZeroInteractions", "at least one interaction must be positive");
    max_index_ = {bi, bj};

    hmax_.assign(n, 0);
    hpos_.assign(n, 0);
    const Num& mx = interaction(bi, bj);
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j) {
            if (near_equal(interaction(i, j), mx)) hmax_[static_cast<std::size_t>(i)] |= bit(j);
            if (interaction(i, j).sign() > 0) hpos_[static_cast<std::size_t>(i)] |= bit(j);
        }
}

int SpinSystem::index_of(const std::string& label) const {
    for (int i = 0; i < size(); ++i)
        if (states_[static_cast<std::size_t>(i)] == label) return i;
    throw Error("UnknownState", "no state labelled '" + label + "'");
}

Num SpinSystem::activity_sum(Mask m) const {
    Num s = exact() ? Num(0) : Num(0.0);
    for (int i : members(m)) s += activity(i);
    return s;
}

bool SpinSystem::is_homomorphism() const {
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j)
            if (!is_max_interaction(i, j) && !interaction(i, j).is_zero()) return false;
    return true;
}

std::optional<Num> SpinSystem::second_interaction() const {
    std::optional<Num> best;
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j)
            if (!is_max_interaction(i, j) && (!best || interaction(i, j) > *best)) best = interaction(i, j);
    return best;
}

bool SpinSystem::near_tie() const {
    if (exact()) return false;
    auto s = second_interaction();
    if (!s || s->is_zero()) return false;
    double mx = lambda_max().d();
    return (mx - s->d()) <= 1e-9 * mx;
}

SpinSystem SpinSystem::normalized() const {
    auto inter = inter_;
    Num mx = lambda_max();
    for (int i = 0; i < size(); ++i)
        for (int j = 0; j < size(); ++j) {
            auto& x = inter[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            x = is_max_interaction(i, j) ? (exact() ? Num(1) : Num(1.0)) : x / mx;
        }
    return SpinSystem(states_, act_, std::move(inter), mode_);
}

SpinSystem SpinSystem::to_float() const { return SpinSystem(states_, act_, inter_, Mode::Float); }

void WeightedGraph::validate() const {
    if (n < 0) throw Error("SchemaError", "negative vertex count");
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n) throw Error("SchemaError", "edge endpoint out of range");
        if (u == v) throw Error("SchemaError", "graph has a self-loop");
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second) throw Error("SchemaError", "repeated edge");
    }
    if (!parity.empty()) {
        if (static_cast<int>(parity.size()) != n) throw Error("SchemaError", "parity labelling has wrong length");
        for (auto [u, v] : edges)
            if (parity[static_cast<std::size_t>(u)] == parity[static_cast<std::size_t>(v)])
                throw Error("SchemaError", "parity labelling is not a proper 2-colouring");
    }
}

Num config_weight(const SpinSystem& sys, const WeightedGraph& g, const Configuration& f) {
    if (static_cast<int>(f.size()) != g.n) throw Error("DomainMismatch", "configuration does not cover the graph");
    for (int x : f)
        if (x < 0 || x >= sys.size()) throw Error("DomainMismatch", "configuration value out of range");
    Num w = sys.exact() ? Num(1) : Num(1.0);
    for (int x : f) w *= sys.activity(x);
    for (auto [u, v] : g.edges) {
        const Num& e = sys.interaction(f[static_cast<std::size_t>(u)], f[static_cast<std::size_t>(v)]);
        if (e.is_zero()) return sys.exact() ? Num(0) : Num(0.0);
        w *= e;
    }
    return w;
}

SpinSystem reweight(const SpinSystem& sys, const std::vector<Num>& m, int d) {
    if (static_cast<int>(m.size()) != sys.size()) throw Error("SchemaError", "one multiplier per state is required");
    if (d < 1) throw Error("SchemaError", "d must be positive");
    for (const auto& x : m)
        if (x.sign() <= 0) throw Error("NonPositiveMultiplier", "multipliers must be positive");
    const int n = sys.size();
    std::vector<Num> act;
    std::vector<std::vector<Num>> inter(static_cast<std::size_t>(n), std::vector<Num>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) act.push_back(Num(m[static_cast<std::size_t>(i)].d() * sys.activity(i).d()));
    const double expo = -1.0 / (2.0 * d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double f = std::pow(m[static_cast<std::size_t>(i)].d() * m[static_cast<std::size_t>(j)].d(), expo);
            inter[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = Num(f * sys.interaction(i, j).d());
        }
    return SpinSystem(sys.labels(), std::move(act), std::move(inter), Mode::Float);
}

namespace {

std::string pair_label(const std::string& a, const std::string& b) { return "(" + a + "," + b + ")"; }

Mode joint_mode(const SpinSystem& a, const SpinSystem& b) {
    return a.exact() && b.exact() ? Mode::Rational : Mode::Float;
}

}  // namespace

SpinSystem product(const SpinSystem& a, const SpinSystem& b) {
    const int na = a.size(), nb = b.size();
    if (na * nb > kMaxStates) throw Error("SpinSpaceTooLarge", "product has more than 64 states");
    std::vector<std::string> labels;
    std::vector<Num> act;
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j) {
            labels.push_back(pair_label(a.label(i), b.label(j)));
            act.push_back(a.activity(i) * b.activity(j));
        }
    const auto n = static_cast<std::size_t>(na * nb);
    std::vector<std::vector<Num>> inter(n, std::vector<Num>(n));
    for (int i = 0; i < na; ++i)
        for (int j = 0; j < nb; ++j)
            for (int k = 0; k < na; ++k)
                for (int l = 0; l < nb; ++l)
                    inter[static_cast<std::size_t>(i * nb + j)][static_cast<std::size_t>(k * nb + l)] =
                        a.interaction(i, k) * b.interaction(j, l);
    return SpinSystem(std::move(labels), std::move(act), std::move(inter), joint_mode(a, b));
}

SpinSystem project_from_doubled(const SpinSystem& sys) {
    std::vector<std::pair<int, int>> states;
    for (int i = 0; i < sys.size(); ++i)
        for (int j = 0; j < sys.size(); ++j)
            if (sys.interaction(i, j).sign() > 0) states.push_back({i, j});
    if (states.empty()) throw Error("EmptyProjectedSpace", "no pair of states interacts positively");
    if (states.size() > static_cast<std::size_t>(kMaxStates))
        throw Error("SpinSpaceTooLarge", "projection has more than 64 states");
    std::vector<std::string> labels;
    std::vector<Num> act;
    for (auto [i, j] : states) {
        labels.push_back(pair_label(sys.label(i), sys.label(j)));
        act.push_back(sys.activity(i) * sys.activity(j) * sys.interaction(i, j));
    }
    const auto n = states.size();
    std::vector<std::vector<Num>> inter(n, std::vector<Num>(n));
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            inter[x][y] = sys.interaction(states[x].first, states[y].first) *
                          sys.interaction(states[x].second, states[y].second);
    return SpinSystem(std::move(labels), std::move(act), std::move(inter), sys.mode());
}

Cover bipartite_cover(const SpinSystem& sys) {
    const int n = sys.size();
    if (2 * n > kMaxStates) throw Error("SpinSpaceTooLarge", "cover has more than 64 states");
    std::vector<std::string> labels;
    std::vector<Num> act;
    std::vector<int> phi;
    for (int p = 0; p < 2; ++p)
        for (int i = 0; i < n; ++i) {
            labels.push_back(pair_label(sys.label(i), std::to_string(p)));
            act.push_back(sys.activity(i));
            phi.push_back(i);
        }
    const Num zero = sys.exact() ? Num(0) : Num(0.0);
    const auto m = static_cast<std::size_t>(2 * n);
    std::vector<std::vector<Num>> inter(m, std::vector<Num>(m, zero));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            inter[static_cast<std::size_t>(i)][static_cast<std::size_t>(n + j)] = sys.interaction(i, j);
            inter[static_cast<std::size_t>(n + j)][static_cast<std::size_t>(i)] = sys.interaction(i, j);
        }
    return Cover{SpinSystem(std::move(labels), std::move(act), std::move(inter), sys.mode()), std::move(phi)};
}

std::optional<std::vector<int>> find_isomorphism(const SpinSystem& a, const SpinSystem& b) {
    const int n = a.size();
    if (b.size() != n) return std::nullopt;
    std::vector<int> map(static_cast<std::size_t>(n), -1);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::function<bool(int)> go = [&](int i) -> bool {
        if (i == n) return true;
        for (int c = 0; c < n; ++c) {
            if (used[static_cast<std::size_t>(c)] || !near_equal(a.activity(i), b.activity(c))) continue;
            if (!near_equal(a.interaction(i, i), b.interaction(c, c))) continue;
            bool ok = true;
            for (int k = 0; k < i && ok; ++k)
                ok = near_equal(a.interaction(i, k), b.interaction(c, map[static_cast<std::size_t>(k)]));
            if (!ok) continue;
            map[static_cast<std::size_t>(i)] = c;
            used[static_cast<std::size_t>(c)] = 1;
            if (go(i + 1)) return true;
            used[static_cast<std::size_t>(c)] = 0;
        }
        return false;
    };
    if (!go(0)) return std::nullopt;
    return map;
}

const char* lift_status_name(LiftStatus s) {
    switch (s) {
        case LiftStatus::Ok: return "Ok";
        case LiftStatus::NotACover: return "NotACover";
        case LiftStatus::NotLiftPermitting: return "NotLiftPermitting";
    }
    return "?";
}

LiftCheck check_lift_permitting(const SpinSystem& sys, int cover_states,
                                const std::vector<std::pair<int, int>>& cover_edges, const std::vector<int>& phi) {
    const auto cn = static_cast<std::size_t>(cover_states);
    if (phi.size() != cn) throw Error("SchemaError", "covering map must have one entry per cover state");
    std::vector<char> hit(static_cast<std::size_t>(sys.size()), 0);
    for (int x : phi) {
        if (x < 0 || x >= sys.size()) throw Error("SchemaError", "covering map value out of range");
        hit[static_cast<std::size_t>(x)] = 1;
    }
    for (char h : hit)
        if (!h) return {LiftStatus::NotACover, "covering map is not surjective"};

    std::vector<std::vector<int>> adj(cn);
    std::set<std::pair<int, int>> seen;
    for (auto [u, v] : cover_edges) {
        if (u < 0 || v < 0 || u >= cover_states || v >= cover_states)
            throw Error("SchemaError", "cover edge endpoint out of range");
        if (!seen.insert({std::min(u, v), std::max(u, v)}).second) continue;
        adj[static_cast<std::size_t>(u)].push_back(v);
        if (u != v) adj[static_cast<std::size_t>(v)].push_back(u);
    }

    for (std::size_t v = 0; v < cn; ++v) {
        Mask image = 0;
        for (int w : adj[v]) {
            Mask b = bit(phi[static_cast<std::size_t>(w)]);
            if (image & b)
                return {LiftStatus::NotACover, "two neighbours of cover state " + std::to_string(v) + " share an image"};
            image |= b;
        }
        if (image != sys.pos_neighbors(phi[v]))
            return {LiftStatus::NotACover, "neighbourhood of cover state " + std::to_string(v) + " does not map onto its image's"};
    }

    // Endpoints of four-step walks from each start.
    for (std::size_t s = 0; s < cn; ++s) {
        std::vector<char> cur(cn, 0), nxt(cn, 0);
        cur[s] = 1;
        for (int step = 0; step < 4; ++step) {
            std::fill(nxt.begin(), nxt.end(), 0);
            for (std::size_t v = 0; v < cn; ++v)
                if (cur[v])
                    for (int w : adj[v]) nxt[static_cast<std::size_t>(w)] = 1;
            std::swap(cur, nxt);
        }
        for (std::size_t e = 0; e < cn; ++e)
            if (cur[e] && e != s && phi[e] == phi[s])
                return {LiftStatus::NotLiftPermitting,
                        "walk from cover state " + std::to_string(s) + " to " + std::to_string(e) + " closes in the base"};
    }
    return {};
}

}  // namespace spinlab
