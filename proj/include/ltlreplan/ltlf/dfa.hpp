#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ltlreplan/ltlf/formula.hpp"

namespace ltlreplan::ltlf {

using State = int;
/// Label set encoded over the DFA alphabet: bit i set iff alphabet()[i] holds.
using LabelMask = std::uint32_t;

inline constexpr std::size_t kMaxAtoms = 8;
inline constexpr std::size_t kDefaultStateBudget = std::size_t{1} << 16;

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Complete deterministic automaton over 2^AP with a precomputed bad set.
///
/// States are dense ids [0, num_states). The bad set B holds every state that
/// cannot reach an accepting state; B and the accepting set are disjoint.
/// `delta` is the unpruned transition function, `step` and `run` the pruned one.
class Dfa {
public:
    /// `transitions[q * 2^|AP| + mask]` is the successor of q on mask.
    Dfa(std::vector<std::string> alphabet, int num_states, State initial, std::vector<bool> accepting,
        std::vector<State> transitions);

    const std::vector<std::string>& alphabet() const { return alphabet_; }
    int num_states() const { return num_states_; }
    State initial() const { return initial_; }
    LabelMask num_masks() const { return LabelMask{1} << alphabet_.size(); }

    bool is_accepting(State q) const { return accepting_.at(q); }
    bool is_bad(State q) const { return bad_.at(q); }
    std::set<State> bad_states() const;

    State delta(State q, LabelMask mask) const { return transitions_[index(q, mask)]; }

    /// Pruned successor; nullopt when the transition leads into B. Throws if q is bad.
    std::optional<State> step(State q, LabelMask mask) const;
    bool accepting_one_hop(State q, LabelMask mask) const;

    /// Pruned run over a mask sequence; nullopt as soon as B would be entered.
    std::optional<State> run(State q, std::span<const LabelMask> masks) const;
    /// Unpruned run.
    State run_unpruned(State q, std::span<const LabelMask> masks) const;

    /// Labels outside the alphabet are ignored.
    LabelMask mask_of(const LabelSet& labels) const;
    LabelSet labels_of(LabelMask mask) const;

    /// Acceptance of a non-empty trace read from the initial state.
    bool accepts(const Trace& trace) const;

    /// GraphViz export: accepting states double circles, bad states dashed.
    std::string to_dot() const;

private:
    std::size_t index(State q, LabelMask mask) const {
        return static_cast<std::size_t>(q) * num_masks() + mask;
    }

    std::vector<std::string> alphabet_;
    int num_states_;
    State initial_;
    std::vector<bool> accepting_;
    std::vector<bool> bad_;
    std::vector<State> transitions_;
};

/// Minimal DFA for the formula; alphabet is atoms(f) in first-appearance order.
/// States are numbered breadth-first from the initial state (labels ascending)
/// with bad states last.
Dfa to_dfa(const Formula& f, std::size_t state_budget = kDefaultStateBudget);

/// Partition-refinement minimization of the reachable part, canonically renumbered.
Dfa minimize(const Dfa& d);

/// States not co-reachable to an accepting state, by reverse reachability.
std::set<State> compute_bad_states(const Dfa& d);

struct RegionLabel {
    std::string id;
    LabelMask mask;
};

/// Regions whose label drives the unpruned successor of (q_cur, mask_cur) into B.
std::set<std::string> forbidden_zones(const Dfa& d, State q_cur, LabelMask mask_cur,
                                      const std::vector<RegionLabel>& regions);

}  // namespace ltlreplan::ltlf
