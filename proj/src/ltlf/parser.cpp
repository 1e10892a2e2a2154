#include "ltlreplan/ltlf/parser.hpp"

#include <cctype>

namespace ltlreplan::ltlf {

namespace {

enum class Tok { End, LParen, RParen, Not, And, Or, Eventually, Always, Until, True, Atom };

struct Token {
    Tok kind;
    std::size_t offset;
    std::string text;
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) { advance(); }

    Formula parse_all() {
        Formula f = disjunction();
        if (current_.kind != Tok::End) fail("expected end of input, '&', '|' or 'U'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& message) const {
        throw ParseError(current_.offset, message + describe_found());
    }

    std::string describe_found() const {
        if (current_.kind == Tok::End) return " (found end of input)";
        return " (found '" + current_.text + "')";
    }

    void advance() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        const std::size_t start = pos_;
        if (pos_ >= text_.size()) {
            current_ = {Tok::End, start, {}};
            return;
        }
        const char c = text_[pos_];
        auto single = [&](Tok kind) {
            ++pos_;
            current_ = {kind, start, std::string(1, c)};
        };
        switch (c) {
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case '!': return single(Tok::Not);
            case '&': return single(Tok::And);
            case '|': return single(Tok::Or);
            default: break;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                ++pos_;
            std::string word(text_.substr(start, pos_ - start));
            if (word == "F") current_ = {Tok::Eventually, start, word};
            else if (word == "G") current_ = {Tok::Always, start, word};
            else if (word == "U") current_ = {Tok::Until, start, word};
            else if (word == "true") current_ = {Tok::True, start, word};
            else if (word == "X" || word == "next" || word == "N" || word == "WX")
                throw ParseError(start, "the next operator '" + word + "' is not supported");
            else if (word == "false")
                throw ParseError(start, "'false' is reserved; write '!true'");
            else if (is_valid_atom_name(word)) current_ = {Tok::Atom, start, word};
            else
                throw ParseError(start, "invalid identifier '" + word +
                                            "' (atoms are lowercase [a-z][a-z0-9_]*; operators are F, G, U)");
            return;
        }
        throw ParseError(start, std::string("unexpected character '") + c + "'");
    }

    Formula disjunction() {
        Formula f = conjunction();
        while (current_.kind == Tok::Or) {
            advance();
            f = Formula::disjunction(std::move(f), conjunction());
        }
        return f;
    }

    Formula conjunction() {
        Formula f = until();
        while (current_.kind == Tok::And) {
            advance();
            f = Formula::conjunction(std::move(f), until());
        }
        return f;
    }

    Formula until() {
        Formula lhs = unary();
        if (current_.kind != Tok::Until) return lhs;
        advance();
        return Formula::until(std::move(lhs), until());
    }

    Formula unary() {
        switch (current_.kind) {
            case Tok::Not: advance(); return Formula::negation(unary());
            case Tok::Eventually: advance(); return Formula::eventually(unary());
            case Tok::Always: advance(); return Formula::always(unary());
            case Tok::True: advance(); return Formula::truth();
            case Tok::Atom: {
                std::string name = current_.text;
                advance();
                return Formula::atom(std::move(name));
            }
            case Tok::LParen: {
                advance();
                Formula inner = disjunction();
                if (current_.kind != Tok::RParen) fail("expected ')'");
                advance();
                return inner;
            }
            default: fail("expected an atom, 'true', '(', '!', 'F' or 'G'");
        }
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token current_{Tok::End, 0, {}};
};

}  // namespace

Formula parse(std::string_view text) { return Parser(text).parse_all(); }

}  // namespace ltlreplan::ltlf
