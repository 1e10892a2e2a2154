#include "ltlreplan/ltlf/dfa.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>
#include <tuple>

namespace ltlreplan::ltlf {

// ---------------------------------------------------------------------------
// Dfa

Dfa::Dfa(std::vector<std::string> alphabet, int num_states, State initial, std::vector<bool> accepting,
         std::vector<State> transitions)
    : alphabet_(std::move(alphabet)),
      num_states_(num_states),
      initial_(initial),
      accepting_(std::move(accepting)),
      transitions_(std::move(transitions)) {
    if (alphabet_.size() > kMaxAtoms) throw std::invalid_argument("alphabet exceeds 8 atoms");
    if (num_states_ <= 0) throw std::invalid_argument("automaton needs at least one state");
    if (initial_ < 0 || initial_ >= num_states_) throw std::invalid_argument("initial state out of range");
    if (accepting_.size() != static_cast<std::size_t>(num_states_))
        throw std::invalid_argument("accepting flags size mismatch");
    if (transitions_.size() != static_cast<std::size_t>(num_states_) * num_masks())
        throw std::invalid_argument("transition table size mismatch");
    for (State t : transitions_)
        if (t < 0 || t >= num_states_) throw std::invalid_argument("transition target out of range");
    bad_.assign(num_states_, false);
    for (State q : compute_bad_states(*this)) bad_[q] = true;
}

std::set<State> Dfa::bad_states() const {
    std::set<State> out;
    for (State q = 0; q < num_states_; ++q)
        if (bad_[q]) out.insert(q);
    return out;
}

std::optional<State> Dfa::step(State q, LabelMask mask) const {
    if (is_bad(q)) throw std::logic_error("step from bad state " + std::to_string(q));
    const State next = delta(q, mask);
    if (bad_[next]) return std::nullopt;
    return next;
}

bool Dfa::accepting_one_hop(State q, LabelMask mask) const {
    const auto next = step(q, mask);
    return next && accepting_[*next];
}

std::optional<State> Dfa::run(State q, std::span<const LabelMask> masks) const {
    if (bad_.at(q)) return std::nullopt;
    for (LabelMask m : masks) {
        q = delta(q, m);
        if (bad_[q]) return std::nullopt;
    }
    return q;
}

State Dfa::run_unpruned(State q, std::span<const LabelMask> masks) const {
    for (LabelMask m : masks) q = delta(q, m);
    return q;
}

LabelMask Dfa::mask_of(const LabelSet& labels) const {
    LabelMask mask = 0;
    for (std::size_t i = 0; i < alphabet_.size(); ++i)
        if (labels.count(alphabet_[i])) mask |= LabelMask{1} << i;
    return mask;
}

LabelSet Dfa::labels_of(LabelMask mask) const {
    LabelSet out;
    for (std::size_t i = 0; i < alphabet_.size(); ++i)
        if (mask & (LabelMask{1} << i)) out.insert(alphabet_[i]);
    return out;
}

bool Dfa::accepts(const Trace& trace) const {
    if (trace.empty()) throw std::invalid_argument("accepts: trace must be non-empty");
    State q = initial_;
    for (const auto& labels : trace) q = delta(q, mask_of(labels));
    return accepting_[q];
}

std::string Dfa::to_dot() const {
    std::ostringstream out;
    out << "digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n  __start -> " << initial_ << ";\n";
    for (State q = 0; q < num_states_; ++q) {
        out << "  " << q << " [shape=" << (accepting_[q] ? "doublecircle" : "circle");
        if (bad_[q]) out << ", style=dashed";
        out << "];\n";
    }
    for (State q = 0; q < num_states_; ++q) {
        std::map<State, std::vector<LabelMask>> by_target;
        for (LabelMask m = 0; m < num_masks(); ++m) by_target[delta(q, m)].push_back(m);
        for (const auto& [target, masks] : by_target) {
            out << "  " << q << " -> " << target << " [label=\"";
            for (std::size_t i = 0; i < masks.size(); ++i) {
                if (i) out << "\\n";
                out << "{";
                bool first = true;
                for (const auto& name : labels_of(masks[i])) {
                    out << (first ? "" : ",") << name;
                    first = false;
                }
                out << "}";
            }
            out << "\"";
            if (bad_[target] && !bad_[q]) out << ", style=dashed";
            out << "];\n";
        }
    }
    out << "}\n";
    return out.str();
}

std::set<State> compute_bad_states(const Dfa& d) {
    const int n = d.num_states();
    std::vector<std::vector<State>> reverse(n);
    for (State q = 0; q < n; ++q)
        for (LabelMask m = 0; m < d.num_masks(); ++m) reverse[d.delta(q, m)].push_back(q);
    std::vector<bool> live(n, false);
    std::deque<State> queue;
    for (State q = 0; q < n; ++q)
        if (d.is_accepting(q)) {
            live[q] = true;
            queue.push_back(q);
        }
    while (!queue.empty()) {
        const State q = queue.front();
        queue.pop_front();
        for (State p : reverse[q])
            if (!live[p]) {
                live[p] = true;
                queue.push_back(p);
            }
    }
    std::set<State> bad;
    for (State q = 0; q < n; ++q)
        if (!live[q]) bad.insert(q);
    return bad;
}

std::set<std::string> forbidden_zones(const Dfa& d, State q_cur, LabelMask mask_cur,
                                      const std::vector<RegionLabel>& regions) {
    if (d.is_bad(q_cur)) throw std::logic_error("forbidden_zones from bad state");
    const State q_next = d.delta(q_cur, mask_cur);
    std::set<std::string> out;
    for (const auto& region : regions)
        if (d.is_bad(d.delta(q_next, region.mask))) out.insert(region.id);
    return out;
}

// ---------------------------------------------------------------------------
// Minimization

Dfa minimize(const Dfa& d) {
    const LabelMask masks = d.num_masks();

    std::vector<State> reachable;
    std::vector<int> seen(d.num_states(), -1);
    std::deque<State> queue{d.initial()};
    seen[d.initial()] = 0;
    while (!queue.empty()) {
        const State q = queue.front();
        queue.pop_front();
        reachable.push_back(q);
        for (LabelMask m = 0; m < masks; ++m) {
            const State t = d.delta(q, m);
            if (seen[t] < 0) {
                seen[t] = 0;
                queue.push_back(t);
            }
        }
    }

    // Moore refinement: blocks split by (own block, successor blocks) until stable.
    std::vector<int> block(d.num_states(), -1);
    for (State q : reachable) block[q] = d.is_accepting(q) ? 1 : 0;
    std::size_t count = 0;
    while (true) {
        std::map<std::vector<int>, int> signatures;
        std::vector<int> next(d.num_states(), -1);
        for (State q : reachable) {
            std::vector<int> sig;
            sig.reserve(masks + 1);
            sig.push_back(block[q]);
            for (LabelMask m = 0; m < masks; ++m) sig.push_back(block[d.delta(q, m)]);
            auto [it, inserted] = signatures.emplace(std::move(sig), static_cast<int>(signatures.size()));
            next[q] = it->second;
        }
        block.swap(next);
        if (signatures.size() == count) break;
        count = signatures.size();
    }

    const int num_blocks = static_cast<int>(count);
    std::vector<State> representative(num_blocks, -1);
    for (State q : reachable)
        if (representative[block[q]] < 0) representative[block[q]] = q;
    std::vector<bool> accepting(num_blocks);
    std::vector<State> transitions(static_cast<std::size_t>(num_blocks) * masks);
    for (int b = 0; b < num_blocks; ++b) {
        accepting[b] = d.is_accepting(representative[b]);
        for (LabelMask m = 0; m < masks; ++m)
            transitions[static_cast<std::size_t>(b) * masks + m] = block[d.delta(representative[b], m)];
    }
    const Dfa quotient(d.alphabet(), num_blocks, block[d.initial()], accepting, transitions);

    // Canonical numbering: breadth-first over ascending masks, bad states moved last.
    std::vector<State> order;
    std::vector<bool> visited(num_blocks, false);
    queue = {quotient.initial()};
    visited[quotient.initial()] = true;
    while (!queue.empty()) {
        const State q = queue.front();
        queue.pop_front();
        order.push_back(q);
        for (LabelMask m = 0; m < masks; ++m) {
            const State t = quotient.delta(q, m);
            if (!visited[t]) {
                visited[t] = true;
                queue.push_back(t);
            }
        }
    }
    std::stable_partition(order.begin(), order.end(), [&](State q) { return !quotient.is_bad(q); });
    std::vector<State> rename(num_blocks);
    for (std::size_t i = 0; i < order.size(); ++i) rename[order[i]] = static_cast<State>(i);

    std::vector<bool> acc2(num_blocks);
    std::vector<State> tr2(transitions.size());
    for (int b = 0; b < num_blocks; ++b) {
        acc2[rename[b]] = accepting[b];
        for (LabelMask m = 0; m < masks; ++m)
            tr2[static_cast<std::size_t>(rename[b]) * masks + m] = rename[quotient.delta(b, m)];
    }
    return Dfa(d.alphabet(), num_blocks, rename[quotient.initial()], std::move(acc2), std::move(tr2));
}

// ---------------------------------------------------------------------------
// Translation: negation normal form, one-step expansion into next-position
// obligations, subset construction over sets of obligation cubes.

namespace {

enum class NOp { True, False, Atom, NegAtom, And, Or, Eventually, Always, Until, Release };

struct NNode {
    NOp op;
    int a;
    int b;
};

using Cube = std::vector<int>;  // sorted obligation ids, conjunctive
using Dnf = std::vector<Cube>;  // sorted, no cube a superset of another

void normalize(Dnf& dnf) {
    std::sort(dnf.begin(), dnf.end(),
              [](const Cube& x, const Cube& y) { return x.size() != y.size() ? x.size() < y.size() : x < y; });
    dnf.erase(std::unique(dnf.begin(), dnf.end()), dnf.end());
    Dnf kept;
    for (const Cube& c : dnf) {
        const bool subsumed = std::any_of(kept.begin(), kept.end(), [&](const Cube& k) {
            return std::includes(c.begin(), c.end(), k.begin(), k.end());
        });
        if (!subsumed) kept.push_back(c);
    }
    std::sort(kept.begin(), kept.end());
    dnf.swap(kept);
}

Dnf disjoin(Dnf x, const Dnf& y) {
    x.insert(x.end(), y.begin(), y.end());
    normalize(x);
    return x;
}

Dnf conjoin(const Dnf& x, const Dnf& y) {
    Dnf out;
    for (const Cube& cx : x)
        for (const Cube& cy : y) {
            Cube c;
            std::set_union(cx.begin(), cx.end(), cy.begin(), cy.end(), std::back_inserter(c));
            out.push_back(std::move(c));
        }
    normalize(out);
    return out;
}

class Translator {
public:
    explicit Translator(const Formula& f) : alphabet_(atoms(f)) {
        if (alphabet_.size() > kMaxAtoms) throw std::invalid_argument("formula uses more than 8 atoms");
        root_ = nnf(f, false);
    }

    Dfa build(std::size_t budget) {
        const LabelMask masks = LabelMask{1} << alphabet_.size();
        std::map<Dnf, State> ids;
        std::vector<Dnf> states;
        std::vector<State> transitions;

        auto intern = [&](Dnf s) {
            auto it = ids.find(s);
            if (it != ids.end()) return it->second;
            if (states.size() >= budget)
                throw CapacityError("automaton construction exceeded state budget of " + std::to_string(budget));
            const State id = static_cast<State>(states.size());
            ids.emplace(s, id);
            states.push_back(std::move(s));
            return id;
        };

        intern(Dnf{Cube{root_}});
        for (std::size_t q = 0; q < states.size(); ++q) {
            for (LabelMask m = 0; m < masks; ++m) {
                Dnf next;
                for (const Cube& cube : states[q]) {
                    Dnf acc{Cube{}};
                    for (int ob : cube) {
                        acc = conjoin(acc, expand(ob, m));
                        if (acc.empty()) break;
                    }
                    next.insert(next.end(), acc.begin(), acc.end());
                }
                normalize(next);
                transitions.push_back(intern(std::move(next)));
            }
        }

        std::vector<bool> accepting;
        accepting.reserve(states.size());
        for (const Dnf& s : states)
            accepting.push_back(std::any_of(s.begin(), s.end(), [&](const Cube& c) {
                return std::all_of(c.begin(), c.end(), [&](int ob) { return accepts_empty(ob); });
            }));
        return Dfa(alphabet_, static_cast<int>(states.size()), 0, std::move(accepting), std::move(transitions));
    }

private:
    int make(NOp op, int a = -1, int b = -1) {
        // Local simplification keeps the obligation space small.
        if (op == NOp::And) {
            if (nodes_[a].op == NOp::False || nodes_[b].op == NOp::False) return make(NOp::False);
            if (nodes_[a].op == NOp::True) return b;
            if (nodes_[b].op == NOp::True || a == b) return a;
            if (a > b) std::swap(a, b);
        } else if (op == NOp::Or) {
            if (nodes_[a].op == NOp::True || nodes_[b].op == NOp::True) return make(NOp::True);
            if (nodes_[a].op == NOp::False) return b;
            if (nodes_[b].op == NOp::False || a == b) return a;
            if (a > b) std::swap(a, b);
        }
        const auto key = std::make_tuple(op, a, b);
        auto it = index_.find(key);
        if (it != index_.end()) return it->second;
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({op, a, b});
        index_.emplace(key, id);
        return id;
    }

    int atom_index(const std::string& name) const {
        return static_cast<int>(std::find(alphabet_.begin(), alphabet_.end(), name) - alphabet_.begin());
    }

    int nnf(const Formula& f, bool neg) {
        switch (f.op()) {
            case Op::True: return make(neg ? NOp::False : NOp::True);
            case Op::Atom: return make(neg ? NOp::NegAtom : NOp::Atom, atom_index(f.name()));
            case Op::Not: return nnf(f.lhs(), !neg);
            case Op::And: {
                const int l = nnf(f.lhs(), neg);
                const int r = nnf(f.rhs(), neg);
                return make(neg ? NOp::Or : NOp::And, l, r);
            }
            case Op::Or: {
                const int l = nnf(f.lhs(), neg);
                const int r = nnf(f.rhs(), neg);
                return make(neg ? NOp::And : NOp::Or, l, r);
            }
            case Op::Eventually: return make(neg ? NOp::Always : NOp::Eventually, nnf(f.lhs(), neg));
            case Op::Always: return make(neg ? NOp::Eventually : NOp::Always, nnf(f.lhs(), neg));
            case Op::Until: {
                const int l = nnf(f.lhs(), neg);
                const int r = nnf(f.rhs(), neg);
                return make(neg ? NOp::Release : NOp::Until, l, r);
            }
        }
        throw std::logic_error("unknown operator");
    }

    // Obligations that hold on the empty remainder: only the weak (G, R) ones.
    bool accepts_empty(int id) const {
        const NNode& n = nodes_[id];
        switch (n.op) {
            case NOp::True:
            case NOp::Always:
            case NOp::Release: return true;
            case NOp::And: return accepts_empty(n.a) && accepts_empty(n.b);
            case NOp::Or: return accepts_empty(n.a) || accepts_empty(n.b);
            default: return false;
        }
    }

    // Formula `id` holds at the current position with label `m` iff some cube
    // of the result holds at the next position (or is weak and the trace ends).
    const Dnf& expand(int id, LabelMask m) {
        const auto key = std::make_pair(id, m);
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        const NNode n = nodes_[id];
        Dnf out;
        switch (n.op) {
            case NOp::True: out = {Cube{}}; break;
            case NOp::False: break;
            case NOp::Atom:
                if (m & (LabelMask{1} << n.a)) out = {Cube{}};
                break;
            case NOp::NegAtom:
                if (!(m & (LabelMask{1} << n.a))) out = {Cube{}};
                break;
            case NOp::And: out = conjoin(expand(n.a, m), expand(n.b, m)); break;
            case NOp::Or: out = disjoin(expand(n.a, m), expand(n.b, m)); break;
            case NOp::Eventually: out = disjoin(expand(n.a, m), Dnf{Cube{id}}); break;
            case NOp::Always: out = conjoin(expand(n.a, m), Dnf{Cube{id}}); break;
            case NOp::Until: out = disjoin(expand(n.b, m), conjoin(expand(n.a, m), Dnf{Cube{id}})); break;
            case NOp::Release: out = conjoin(expand(n.b, m), disjoin(expand(n.a, m), Dnf{Cube{id}})); break;
        }
        return memo_.emplace(key, std::move(out)).first->second;
    }

    std::vector<std::string> alphabet_;
    std::vector<NNode> nodes_;
    std::map<std::tuple<NOp, int, int>, int> index_;
    std::map<std::pair<int, LabelMask>, Dnf> memo_;
    int root_ = -1;
};

}  // namespace

Dfa to_dfa(const Formula& f, std::size_t state_budget) { return minimize(Translator(f).build(state_budget)); }

}  // namespace ltlreplan::ltlf
