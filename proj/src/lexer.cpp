#include "vx/lexer.hpp"

#include <cctype>
#include <set>

#include "vx/diag.hpp"

namespace vx {

namespace {

const std::set<std::string> kKeywords = {
    "struct", "if", "else", "while", "return",
    "char", "short", "int", "unsigned", "long", "size_t", "void",
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_cont(char c) { return ident_start(c) || std::isdigit(static_cast<unsigned char>(c)); }

struct Cursor {
    const std::string& src;
    std::string file;
    size_t pos = 0;
    int line = 1;
    int col = 1;

    bool eof() const { return pos >= src.size(); }
    char peek(size_t ahead = 0) const {
        return pos + ahead < src.size() ? src[pos + ahead] : '\0';
    }
    char advance() {
        char c = src[pos++];
        if (c == '\n') {
            line++;
            col = 1;
        } else {
            col++;
        }
        return c;
    }
    SourceLocation here() const { return {file, line, col}; }
};

} // namespace

std::vector<Token> tokenize(const std::string& source_text, const std::string& file) {
    Cursor cur{source_text, file};
    std::vector<Token> out;

    while (!cur.eof()) {
        char c = cur.peek();
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '/') {
            while (!cur.eof() && cur.peek() != '\n') cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '*') {
            SourceLocation start = cur.here();
            cur.advance();
            cur.advance();
            while (!(cur.peek() == '*' && cur.peek(1) == '/')) {
                if (cur.eof()) throw LexError(start, "unterminated block comment");
                cur.advance();
            }
            cur.advance();
            cur.advance();
            continue;
        }

        SourceLocation loc = cur.here();
        if (ident_start(c)) {
            std::string text;
            while (ident_cont(cur.peek())) text += cur.advance();
            TokenKind kind = kKeywords.count(text) ? TokenKind::Keyword : TokenKind::Identifier;
            out.push_back({kind, text, loc});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string text;
            while (ident_cont(cur.peek())) text += cur.advance();
            out.push_back({TokenKind::IntegerLiteral, text, loc});
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = cur.advance();
            std::string text(1, quote);
            while (true) {
                if (cur.eof() || cur.peek() == '\n')
                    throw LexError(loc, quote == '"' ? "unterminated string literal"
                                                     : "unterminated char literal");
                char d = cur.advance();
                text += d;
                if (d == '\\') {
                    if (cur.eof()) throw LexError(loc, "unterminated escape");
                    text += cur.advance();
                    continue;
                }
                if (d == quote) break;
            }
            out.push_back({quote == '"' ? TokenKind::StringLiteral : TokenKind::CharLiteral,
                           text, loc});
            continue;
        }

        // Multi-char punctuators first.
        static const char* two[] = {"==", "!=", "<=", ">=", "->"};
        bool matched = false;
        for (const char* t : two) {
            if (c == t[0] && cur.peek(1) == t[1]) {
                cur.advance();
                cur.advance();
                out.push_back({TokenKind::Punctuator, t, loc});
                matched = true;
                break;
            }
        }
        if (matched) continue;

        static const std::string single = "#(){}[];,=<>+-*/%&|!.";
        if (single.find(c) != std::string::npos) {
            cur.advance();
            out.push_back({TokenKind::Punctuator, std::string(1, c), loc});
            continue;
        }
        throw LexError(loc, std::string("illegal character '") + c + "'");
    }

    out.push_back({TokenKind::Eof, "", cur.here()});
    return out;
}

std::vector<Token> expand_macros(const std::vector<Token>& tokens) {
    MacroTable table;
    std::vector<Token> out;

    size_t i = 0;
    while (i < tokens.size()) {
        const Token& t = tokens[i];
        if (t.is(TokenKind::Punctuator, "#")) {
            // Directive runs to the end of its source line.
            size_t j = i + 1;
            int dir_line = t.loc.line;
            std::vector<Token> dir;
            while (j < tokens.size() && tokens[j].kind != TokenKind::Eof &&
                   tokens[j].loc.line == dir_line && tokens[j].loc.file == t.loc.file) {
                dir.push_back(tokens[j]);
                j++;
            }
            if (dir.empty() || dir[0].text != "define")
                throw MacroError(t.loc, "unsupported preprocessor directive");
            if (dir.size() < 2 || dir[1].kind != TokenKind::Identifier)
                throw MacroError(t.loc, "#define requires a macro name");
            std::string name = dir[1].text;
            std::vector<Token> body(dir.begin() + 2, dir.end());
            for (const Token& b : body) {
                if (b.kind == TokenKind::Identifier && b.text == name)
                    throw MacroError(b.loc, "recursive macro definition of '" + name + "'");
            }
            auto it = table.entries.find(name);
            if (it != table.entries.end()) {
                bool same = it->second.size() == body.size();
                for (size_t k = 0; same && k < body.size(); k++)
                    same = it->second[k].kind == body[k].kind && it->second[k].text == body[k].text;
                if (!same)
                    throw MacroError(t.loc, "redefinition of macro '" + name + "' with a different body");
            }
            table.entries[name] = std::move(body);
            i = j;
            continue;
        }

        if (t.kind == TokenKind::Identifier && table.entries.count(t.text)) {
            // Splice at the use site; bodies may reference other macros.
            std::vector<Token> pending = table.entries[t.text];
            for (size_t depth = 0; depth < 64; depth++) {
                bool changed = false;
                std::vector<Token> next;
                for (const Token& p : pending) {
                    if (p.kind == TokenKind::Identifier && table.entries.count(p.text)) {
                        for (const Token& q : table.entries[p.text]) next.push_back(q);
                        changed = true;
                    } else {
                        next.push_back(p);
                    }
                }
                pending = std::move(next);
                if (!changed) break;
            }
            for (Token p : pending) {
                p.loc = t.loc;
                out.push_back(std::move(p));
            }
            i++;
            continue;
        }

        out.push_back(t);
        i++;
    }
    return out;
}

} // namespace vx
