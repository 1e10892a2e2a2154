#pragma once

#include "ltlreplan/ltlf/formula.hpp"

namespace ltlreplan::ltlf {

/// Finite-trace satisfaction at position 0. Temporal operators range over the
/// remaining suffix; the trace must be non-empty.
bool evaluate(const Formula& f, const Trace& trace);

}  // namespace ltlreplan::ltlf
