#pragma once

#include <map>
#include <string>
#include <vector>

#include "vx/source.hpp"

namespace vx {

enum class TokenKind {
    Identifier,
    Keyword,
    IntegerLiteral,
    StringLiteral,
    CharLiteral,
    Punctuator,
    Eof,
};

struct Token {
    TokenKind kind = TokenKind::Eof;
    std::string text;
    SourceLocation loc;

    bool is(TokenKind k, const std::string& t) const { return kind == k && text == t; }
};

// Object-like macros only; a body may reference other macros but never
// itself (checked at definition time).
struct MacroTable {
    std::map<std::string, std::vector<Token>> entries;
};

std::vector<Token> tokenize(const std::string& source_text, const std::string& file);

// Consumes `#define NAME token...` directives and substitutes every later use.
// Replacement tokens take the use-site location.
std::vector<Token> expand_macros(const std::vector<Token>& tokens);

} // namespace vx
