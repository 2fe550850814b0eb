#pragma once

#include "spinlab/number.hpp"
#include "spinlab/subset.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spinlab {

enum class Mode { Rational, Float };

const char* mode_name(Mode m);

// A finite spin space with single-site activities and symmetric pair
// interactions. Construction validates; instances are immutable.
class SpinSystem {
public:
    SpinSystem(std::vector<std::string> states, std::vector<Num> activities,
               std::vector<std::vector<Num>> interactions, Mode mode);

    int size() const { return static_cast<int>(states_.size()); }
    Mode mode() const { return mode_; }
    bool exact() const { return mode_ == Mode::Rational; }

    const std::vector<std::string>& labels() const { return states_; }
    const std::string& label(int i) const { return states_[static_cast<std::size_t>(i)]; }
    int index_of(const std::string& label) const;

    const Num& activity(int i) const { return act_[static_cast<std::size_t>(i)]; }
    const Num& interaction(int i, int j) const {
        return inter_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    const std::vector<Num>& activities() const { return act_; }
    const std::vector<std::vector<Num>>& interactions() const { return inter_; }

    // Position of the (first) largest interaction and its value.
    std::pair<int, int> max_index() const { return max_index_; }
    const Num& lambda_max() const { return interaction(max_index_.first, max_index_.second); }

    // Sum of activities over a subset.
    Num activity_sum(Mask m) const;
    Mask all() const { return full_mask(size()); }

    // Neighbourhood of i in the graph of maximal interactions (self-loops allowed).
    Mask max_neighbors(int i) const { return hmax_[static_cast<std::size_t>(i)]; }
    // Neighbourhood of i in the graph of positive interactions.
    Mask pos_neighbors(int i) const { return hpos_[static_cast<std::size_t>(i)]; }

    bool is_max_interaction(int i, int j) const { return contains(hmax_[static_cast<std::size_t>(i)], j); }

    // Every interaction is 0 or the maximum.
    bool is_homomorphism() const;

    // Largest interaction value strictly below the maximum, if any.
    std::optional<Num> second_interaction() const;

    // Float mode only: the two largest distinct interaction values are within
    // 1e-9 relative of each other, so the maximal graph is fragile.
    bool near_tie() const;

    // Same system with every interaction divided by the maximum.
    SpinSystem normalized() const;

    SpinSystem to_float() const;

private:
    std::vector<std::string> states_;
    std::vector<Num> act_;
    std::vector<std::vector<Num>> inter_;
    Mode mode_;
    std::pair<int, int> max_index_{0, 0};
    std::vector<Mask> hmax_;
    std::vector<Mask> hpos_;
};

// A simple undirected host graph with an optional proper 2-colouring.
struct WeightedGraph {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> parity;  // empty, or one 0/1 entry per vertex

    void validate() const;
};

using Configuration = std::vector<int>;

// Product of activities over vertices and interactions over edges.
Num config_weight(const SpinSystem& sys, const WeightedGraph& g, const Configuration& f);

// Reweighting by per-state multipliers on 2d-regular hosts; the result is float-mode.
SpinSystem reweight(const SpinSystem& sys, const std::vector<Num>& multipliers, int d);

SpinSystem product(const SpinSystem& a, const SpinSystem& b);

// System on G equivalent to `sys` on G x {0,1}: states are the pairs with
// positive interaction.
SpinSystem project_from_doubled(const SpinSystem& sys);

struct Cover {
    SpinSystem system;
    std::vector<int> phi;  // cover state -> base state
};

Cover bipartite_cover(const SpinSystem& sys);

// Bijection b[i] mapping states of `a` to states of `b` that preserves
// activities and interactions.
std::optional<std::vector<int>> find_isomorphism(const SpinSystem& a, const SpinSystem& b);

enum class LiftStatus { Ok, NotACover, NotLiftPermitting };

struct LiftCheck {
    LiftStatus status = LiftStatus::Ok;
    std::string detail;
    bool ok() const { return status == LiftStatus::Ok; }
};

const char* lift_status_name(LiftStatus s);

// Checks that (cover graph, phi) covers the positive-interaction graph of
// `sys` and that every four-step walk with distinct endpoints projects to
// distinct endpoints.
LiftCheck check_lift_permitting(const SpinSystem& sys, int cover_states,
                                const std::vector<std::pair<int, int>>& cover_edges,
                                const std::vector<int>& phi);

}  // namespace spinlab
