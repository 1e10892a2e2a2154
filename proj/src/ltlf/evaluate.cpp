#include "ltlreplan/ltlf/evaluate.hpp"

#include <stdexcept>

namespace ltlreplan::ltlf {

namespace {

bool holds(const Formula& f, const Trace& t, std::size_t i) {
    switch (f.op()) {
        case Op::True: return true;
        case Op::Atom: return t[i].count(f.name()) > 0;
        case Op::Not: return !holds(f.lhs(), t, i);
        case Op::And: return holds(f.lhs(), t, i) && holds(f.rhs(), t, i);
        case Op::Or: return holds(f.lhs(), t, i) || holds(f.rhs(), t, i);
        case Op::Eventually:
            for (std::size_t j = i; j < t.size(); ++j)
                if (holds(f.lhs(), t, j)) return true;
            return false;
        case Op::Always:
            for (std::size_t j = i; j < t.size(); ++j)
                if (!holds(f.lhs(), t, j)) return false;
            return true;
        case Op::Until:
            for (std::size_t j = i; j < t.size(); ++j) {
                if (holds(f.rhs(), t, j)) return true;
                if (!holds(f.lhs(), t, j)) return false;
            }
            return false;
    }
    return false;
}

}  // namespace

bool evaluate(const Formula& f, const Trace& trace) {
    if (trace.empty()) throw std::invalid_argument("evaluate: trace must be non-empty");
    return holds(f, trace, 0);
}

}  // namespace ltlreplan::ltlf
