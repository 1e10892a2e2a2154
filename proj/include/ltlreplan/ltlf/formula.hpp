#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

namespace ltlreplan::ltlf {

enum class Op { True, Atom, Not, And, Or, Eventually, Always, Until };

/// Immutable LTL_f syntax tree. Copies share structure.
class Formula {
public:
    static Formula truth();
    static Formula atom(std::string name);
    static Formula negation(Formula f);
    static Formula conjunction(Formula lhs, Formula rhs);
    static Formula disjunction(Formula lhs, Formula rhs);
    static Formula eventually(Formula f);
    static Formula always(Formula f);
    static Formula until(Formula lhs, Formula rhs);

    Op op() const { return node_->op; }
    const std::string& name() const { return node_->name; }
    // Unary operators keep their operand in lhs().
    const Formula& lhs() const { return *node_->lhs; }
    const Formula& rhs() const { return *node_->rhs; }

    bool operator==(const Formula& other) const;
    bool operator!=(const Formula& other) const { return !(*this == other); }

    std::string to_string() const;

private:
    struct Node {
        Op op;
        std::string name;
        std::shared_ptr<const Formula> lhs;
        std::shared_ptr<const Formula> rhs;
    };
    explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

    std::shared_ptr<const Node> node_;
};

/// Atom names in order of first appearance (left to right).
std::vector<std::string> atoms(const Formula& f);

/// Atom names must match [a-z][a-z0-9_]*.
bool is_valid_atom_name(const std::string& name);

using LabelSet = std::set<std::string>;
/// Finite, non-empty sequence of label sets.
using Trace = std::vector<LabelSet>;

}  // namespace ltlreplan::ltlf
