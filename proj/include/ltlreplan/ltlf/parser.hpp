#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ltlreplan/ltlf/formula.hpp"

namespace ltlreplan::ltlf {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t offset, const std::string& message)
        : std::runtime_error("offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Grammar (ASCII):
//   disj  := conj ('|' conj)*
//   conj  := until ('&' until)*
//   until := unary ('U' until)?          right-associative
//   unary := ('!' | 'F' | 'G') unary | atom | 'true' | '(' disj ')'
Formula parse(std::string_view text);

}  // namespace ltlreplan::ltlf
