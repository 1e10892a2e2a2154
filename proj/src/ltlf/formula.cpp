#include "ltlreplan/ltlf/formula.hpp"

#include <algorithm>
#include <stdexcept>

namespace ltlreplan::ltlf {

Formula Formula::truth() { return Formula(std::make_shared<Node>(Node{Op::True, {}, nullptr, nullptr})); }

Formula Formula::atom(std::string name) {
    if (!is_valid_atom_name(name)) throw std::invalid_argument("invalid atom name '" + name + "'");
    return Formula(std::make_shared<Node>(Node{Op::Atom, std::move(name), nullptr, nullptr}));
}

Formula Formula::negation(Formula f) {
    return Formula(std::make_shared<Node>(Node{Op::Not, {}, std::make_shared<Formula>(std::move(f)), nullptr}));
}

Formula Formula::conjunction(Formula lhs, Formula rhs) {
    return Formula(std::make_shared<Node>(Node{Op::And, {}, std::make_shared<Formula>(std::move(lhs)),
                                               std::make_shared<Formula>(std::move(rhs))}));
}

Formula Formula::disjunction(Formula lhs, Formula rhs) {
    return Formula(std::make_shared<Node>(Node{Op::Or, {}, std::make_shared<Formula>(std::move(lhs)),
                                               std::make_shared<Formula>(std::move(rhs))}));
}

Formula Formula::eventually(Formula f) {
    return Formula(std::make_shared<Node>(Node{Op::Eventually, {}, std::make_shared<Formula>(std::move(f)), nullptr}));
}

Formula Formula::always(Formula f) {
    return Formula(std::make_shared<Node>(Node{Op::Always, {}, std::make_shared<Formula>(std::move(f)), nullptr}));
}

Formula Formula::until(Formula lhs, Formula rhs) {
    return Formula(std::make_shared<Node>(Node{Op::Until, {}, std::make_shared<Formula>(std::move(lhs)),
                                               std::make_shared<Formula>(std::move(rhs))}));
}

bool Formula::operator==(const Formula& other) const {
    if (node_ == other.node_) return true;
    if (op() != other.op()) return false;
    switch (op()) {
        case Op::True: return true;
        case Op::Atom: return name() == other.name();
        case Op::Not:
        case Op::Eventually:
        case Op::Always: return lhs() == other.lhs();
        case Op::And:
        case Op::Or:
        case Op::Until: return lhs() == other.lhs() && rhs() == other.rhs();
    }
    return false;
}

std::string Formula::to_string() const {
    switch (op()) {
        case Op::True: return "true";
        case Op::Atom: return name();
        case Op::Not: return "!" + lhs().to_string();
        case Op::Eventually: return "F " + lhs().to_string();
        case Op::Always: return "G " + lhs().to_string();
        case Op::And: return "(" + lhs().to_string() + " & " + rhs().to_string() + ")";
        case Op::Or: return "(" + lhs().to_string() + " | " + rhs().to_string() + ")";
        case Op::Until: return "(" + lhs().to_string() + " U " + rhs().to_string() + ")";
    }
    return {};
}

namespace {

void collect_atoms(const Formula& f, std::vector<std::string>& out) {
    switch (f.op()) {
        case Op::True: return;
        case Op::Atom:
            if (std::find(out.begin(), out.end(), f.name()) == out.end()) out.push_back(f.name());
            return;
        case Op::Not:
        case Op::Eventually:
        case Op::Always: collect_atoms(f.lhs(), out); return;
        case Op::And:
        case Op::Or:
        case Op::Until:
            collect_atoms(f.lhs(), out);
            collect_atoms(f.rhs(), out);
            return;
    }
}

}  // namespace

std::vector<std::string> atoms(const Formula& f) {
    std::vector<std::string> out;
    collect_atoms(f, out);
    return out;
}

bool is_valid_atom_name(const std::string& name) {
    if (name.empty() || name.front() < 'a' || name.front() > 'z') return false;
    return std::all_of(name.begin(), name.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    });
}

}  // namespace ltlreplan::ltlf
