#include "vx/parser.hpp"

#include <fstream>
#include <sstream>

#include "vx/diag.hpp"

namespace vx {

namespace {

SourceLocation token_end(const Token& t) {
    return {t.loc.file, t.loc.line, t.loc.column + static_cast<int>(t.text.size())};
}

bool is_type_start(const Token& t) {
    if (t.kind != TokenKind::Keyword) return false;
    return t.text == "struct" || t.text == "char" || t.text == "short" ||
           t.text == "int" || t.text == "unsigned" || t.text == "long" ||
           t.text == "size_t" || t.text == "void";
}

long long unescape_char(const std::string& body, size_t& i) {
    char c = body[i++];
    if (c != '\\') return static_cast<unsigned char>(c);
    char e = body[i++];
    switch (e) {
    case 'n': return '\n';
    case 't': return '\t';
    case 'r': return '\r';
    case '0': return 0;
    case '\\': return '\\';
    case '\'': return '\'';
    case '"': return '"';
    default: return static_cast<unsigned char>(e);
    }
}

class Parser {
public:
    Parser(const std::vector<Token>& tokens, const std::string& file)
        : tokens_(tokens) {
        tu_.file = file;
    }

    TranslationUnit run() {
        int root = make(NodeKind::TranslationUnit, SourceLocation{tu_.file, 1, 1});
        std::vector<int> top;
        while (!at_eof()) {
            top.push_back(parse_top_level());
        }
        node(root).children = std::move(top);
        node(root).end_loc = token_end(peek());
        tu_.root = root;
        compute_parents(tu_);
        return std::move(tu_);
    }

private:
    const std::vector<Token>& tokens_;
    size_t pos_ = 0;
    TranslationUnit tu_;

    const Token& peek(size_t ahead = 0) const {
        size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    const Token& prev() const { return tokens_[pos_ ? pos_ - 1 : 0]; }
    bool at_eof() const { return peek().kind == TokenKind::Eof; }

    const Token& advance() {
        const Token& t = tokens_[pos_];
        if (!at_eof()) pos_++;
        return t;
    }

    [[noreturn]] void fail(const std::string& expected) {
        const Token& t = peek();
        std::string found = t.kind == TokenKind::Eof ? "end of file" : "'" + t.text + "'";
        throw ParseError(t.loc, expected, found);
    }

    const Token& expect_punct(const std::string& text) {
        if (!peek().is(TokenKind::Punctuator, text)) fail("'" + text + "'");
        return advance();
    }
    const Token& expect_keyword(const std::string& text) {
        if (!peek().is(TokenKind::Keyword, text)) fail("'" + text + "'");
        return advance();
    }
    const Token& expect_identifier() {
        if (peek().kind != TokenKind::Identifier) fail("identifier");
        return advance();
    }

    bool accept_punct(const std::string& text) {
        if (peek().is(TokenKind::Punctuator, text)) {
            advance();
            return true;
        }
        return false;
    }

    int make(NodeKind kind, SourceLocation loc) {
        AstNode n;
        n.id = static_cast<int>(tu_.nodes.size());
        n.kind = kind;
        n.loc = loc;
        n.end_loc = loc;
        tu_.nodes.push_back(std::move(n));
        return tu_.nodes.back().id;
    }

    AstNode& node(int id) { return tu_.nodes[id]; }

    void close(int id) { node(id).end_loc = token_end(prev()); }

    // type := ("struct" ident | base-keyword) "*"*
    TypeRef parse_type() {
        TypeRef type;
        const Token& t = peek();
        if (!is_type_start(t)) fail("type");
        advance();
        if (t.text == "struct") {
            type.base = BaseType::Record;
            type.record_name = "struct " + expect_identifier().text;
        } else if (t.text == "char") {
            type.base = BaseType::Char;
        } else if (t.text == "short") {
            type.base = BaseType::Short;
        } else if (t.text == "int") {
            type.base = BaseType::Int;
        } else if (t.text == "unsigned") {
            type.base = BaseType::Unsigned;
        } else if (t.text == "long") {
            type.base = BaseType::Long;
        } else if (t.text == "size_t") {
            type.base = BaseType::SizeT;
        } else {
            type.base = BaseType::Void;
        }
        while (accept_punct("*")) type.pointer_depth++;
        return type;
    }

    int parse_top_level() {
        const Token& t = peek();
        if (t.is(TokenKind::Keyword, "struct") && peek(2).is(TokenKind::Punctuator, "{"))
            return parse_record();
        if (!is_type_start(t)) fail("declaration");
        SourceLocation start = t.loc;
        TypeRef type = parse_type();
        const Token& name_tok = expect_identifier();
        if (peek().is(TokenKind::Punctuator, "("))
            return parse_function(start, type, name_tok.text);
        return parse_var_decl_tail(start, type, name_tok.text);
    }

    int parse_record() {
        SourceLocation start = peek().loc;
        expect_keyword("struct");
        std::string name = "struct " + expect_identifier().text;
        int rec = make(NodeKind::RecordDecl, start);
        node(rec).name = name;
        expect_punct("{");
        std::vector<int> fields;
        std::vector<FieldInfo> infos;
        while (!peek().is(TokenKind::Punctuator, "}")) {
            SourceLocation floc = peek().loc;
            TypeRef ftype = parse_type();
            std::string fname = expect_identifier().text;
            if (accept_punct("[")) {
                const Token& len = advance();
                if (len.kind != TokenKind::IntegerLiteral) fail("array length");
                ftype.array_len = std::stoll(len.text);
                expect_punct("]");
            }
            expect_punct(";");
            int f = make(NodeKind::FieldDecl, floc);
            node(f).name = fname;
            node(f).type_annot = ftype;
            close(f);
            fields.push_back(f);
            infos.push_back({fname, ftype, 0});
        }
        expect_punct("}");
        expect_punct(";");
        node(rec).children = std::move(fields);
        close(rec);
        tu_.records[name] = std::move(infos);
        return rec;
    }

    int parse_function(SourceLocation start, const TypeRef& ret, const std::string& name) {
        int fn = make(NodeKind::FunctionDecl, start);
        node(fn).name = name;
        node(fn).type_annot = ret;
        expect_punct("(");
        std::vector<int> children;
        if (!peek().is(TokenKind::Punctuator, ")")) {
            while (true) {
                SourceLocation ploc = peek().loc;
                TypeRef ptype = parse_type();
                std::string pname = expect_identifier().text;
                int p = make(NodeKind::ParamDecl, ploc);
                node(p).name = pname;
                node(p).type_annot = ptype;
                close(p);
                children.push_back(p);
                if (!accept_punct(",")) break;
            }
        }
        expect_punct(")");
        children.push_back(parse_compound());
        node(fn).children = std::move(children);
        close(fn);
        if (tu_.functions.count(name))
            throw ParseError(start, "unique function name", "redefinition of '" + name + "'");
        tu_.functions[name] = fn;
        return fn;
    }

    // Shared by globals and local declarations; the type and name are consumed.
    int parse_var_decl_tail(SourceLocation start, TypeRef type, const std::string& name) {
        int var = make(NodeKind::VarDecl, start);
        node(var).name = name;
        if (accept_punct("[")) {
            const Token& len = advance();
            if (len.kind != TokenKind::IntegerLiteral) fail("array length");
            type.array_len = std::stoll(len.text);
            expect_punct("]");
        }
        node(var).type_annot = type;
        if (accept_punct("=")) {
            int init = parse_expr();
            node(var).children.push_back(init);
        }
        expect_punct(";");
        close(var);
        return var;
    }

    int parse_compound() {
        SourceLocation start = peek().loc;
        expect_punct("{");
        int c = make(NodeKind::CompoundStmt, start);
        std::vector<int> stmts;
        while (!peek().is(TokenKind::Punctuator, "}")) {
            if (at_eof()) fail("'}'");
            stmts.push_back(parse_stmt());
        }
        expect_punct("}");
        node(c).children = std::move(stmts);
        close(c);
        return c;
    }

    int parse_stmt() {
        const Token& t = peek();
        if (t.is(TokenKind::Punctuator, "{")) return parse_compound();
        if (t.is(TokenKind::Keyword, "if")) return parse_if();
        if (t.is(TokenKind::Keyword, "while")) return parse_while();
        if (t.is(TokenKind::Keyword, "return")) return parse_return();
        if (is_type_start(t)) {
            SourceLocation start = t.loc;
            int ds = make(NodeKind::DeclStmt, start);
            TypeRef type = parse_type();
            std::string name = expect_identifier().text;
            int var = parse_var_decl_tail(start, type, name);
            node(ds).children.push_back(var);
            close(ds);
            return ds;
        }
        SourceLocation start = t.loc;
        int es = make(NodeKind::ExprStmt, start);
        int e = parse_expr();
        node(es).children.push_back(e);
        expect_punct(";");
        close(es);
        return es;
    }

    int parse_if() {
        SourceLocation start = peek().loc;
        expect_keyword("if");
        int s = make(NodeKind::IfStmt, start);
        expect_punct("(");
        int cond = parse_expr();
        expect_punct(")");
        int then = parse_stmt();
        node(s).children = {cond, then};
        if (peek().is(TokenKind::Keyword, "else")) {
            advance();
            int alt = parse_stmt();
            node(s).children.push_back(alt);
        }
        close(s);
        return s;
    }

    int parse_while() {
        SourceLocation start = peek().loc;
        expect_keyword("while");
        int s = make(NodeKind::WhileStmt, start);
        expect_punct("(");
        int cond = parse_expr();
        expect_punct(")");
        int body = parse_stmt();
        node(s).children = {cond, body};
        close(s);
        return s;
    }

    int parse_return() {
        SourceLocation start = peek().loc;
        expect_keyword("return");
        int s = make(NodeKind::ReturnStmt, start);
        if (!peek().is(TokenKind::Punctuator, ";")) {
            int value = parse_expr();
            node(s).children.push_back(value);
        }
        expect_punct(";");
        close(s);
        return s;
    }

    // Precedence climbing; assignment is lowest and right-associative.
    int parse_expr() { return parse_assign(); }

    int parse_assign() {
        int lhs = parse_binary(0);
        if (peek().is(TokenKind::Punctuator, "=")) {
            advance();
            int rhs = parse_assign();
            int b = make(NodeKind::BinaryOperator, node(lhs).loc);
            node(b).op = "=";
            node(b).children = {lhs, rhs};
            node(b).end_loc = node(rhs).end_loc;
            return b;
        }
        return lhs;
    }

    static int binary_prec(const Token& t) {
        if (t.kind != TokenKind::Punctuator) return -1;
        const std::string& s = t.text;
        if (s == "|") return 1;
        if (s == "&") return 2;
        if (s == "==" || s == "!=") return 3;
        if (s == "<" || s == "<=" || s == ">" || s == ">=") return 4;
        if (s == "+" || s == "-") return 5;
        if (s == "*" || s == "/" || s == "%") return 6;
        return -1;
    }

    int parse_binary(int min_prec) {
        int lhs = parse_unary();
        while (true) {
            int prec = binary_prec(peek());
            if (prec < 0 || prec < min_prec) break;
            std::string op = advance().text;
            int rhs = parse_binary(prec + 1);
            int b = make(NodeKind::BinaryOperator, node(lhs).loc);
            node(b).op = op;
            node(b).children = {lhs, rhs};
            node(b).end_loc = node(rhs).end_loc;
            lhs = b;
        }
        return lhs;
    }

    bool at_cast() const {
        return peek().is(TokenKind::Punctuator, "(") && is_type_start(peek(1));
    }

    int parse_unary() {
        const Token& t = peek();
        if (t.is(TokenKind::Punctuator, "!") || t.is(TokenKind::Punctuator, "-") ||
            t.is(TokenKind::Punctuator, "*") || t.is(TokenKind::Punctuator, "&")) {
            SourceLocation start = t.loc;
            std::string op = advance().text;
            int operand = parse_unary();
            int u = make(NodeKind::UnaryOperator, start);
            node(u).op = op;
            node(u).children = {operand};
            node(u).end_loc = node(operand).end_loc;
            return u;
        }
        if (at_cast()) {
            SourceLocation start = t.loc;
            advance(); // (
            TypeRef type = parse_type();
            expect_punct(")");
            int operand = parse_unary();
            int c = make(NodeKind::CastExpr, start);
            node(c).type_annot = type;
            node(c).children = {operand};
            node(c).end_loc = node(operand).end_loc;
            return c;
        }
        return parse_postfix();
    }

    int parse_postfix() {
        int e = parse_primary();
        while (true) {
            const Token& t = peek();
            if (t.is(TokenKind::Punctuator, "(")) {
                advance();
                int call = make(NodeKind::CallExpr, node(e).loc);
                node(call).name = node(e).kind == NodeKind::DeclRefExpr ? node(e).name : "";
                std::vector<int> children = {e};
                if (!peek().is(TokenKind::Punctuator, ")")) {
                    while (true) {
                        children.push_back(parse_assign());
                        if (!accept_punct(",")) break;
                    }
                }
                expect_punct(")");
                node(call).children = std::move(children);
                close(call);
                e = call;
            } else if (t.is(TokenKind::Punctuator, "[")) {
                advance();
                int idx = parse_expr();
                expect_punct("]");
                int sub = make(NodeKind::ArraySubscriptExpr, node(e).loc);
                node(sub).children = {e, idx};
                close(sub);
                e = sub;
            } else if (t.is(TokenKind::Punctuator, ".") || t.is(TokenKind::Punctuator, "->")) {
                bool arrow = t.text == "->";
                advance();
                std::string member = expect_identifier().text;
                int m = make(NodeKind::MemberExpr, node(e).loc);
                node(m).name = member;
                node(m).arrow = arrow;
                node(m).children = {e};
                close(m);
                e = m;
            } else {
                break;
            }
        }
        return e;
    }

    int parse_primary() {
        const Token& t = peek();
        if (t.kind == TokenKind::Identifier) {
            advance();
            int r = make(NodeKind::DeclRefExpr, t.loc);
            node(r).name = t.text;
            close(r);
            return r;
        }
        if (t.kind == TokenKind::IntegerLiteral) {
            advance();
            int l = make(NodeKind::IntegerLiteral, t.loc);
            node(l).int_value = std::stoll(t.text);
            close(l);
            return l;
        }
        if (t.kind == TokenKind::CharLiteral) {
            advance();
            int l = make(NodeKind::IntegerLiteral, t.loc);
            std::string body = t.text.substr(1, t.text.size() - 2);
            size_t i = 0;
            node(l).int_value = body.empty() ? 0 : unescape_char(body, i);
            close(l);
            return l;
        }
        if (t.kind == TokenKind::StringLiteral) {
            advance();
            int l = make(NodeKind::StringLiteral, t.loc);
            std::string body = t.text.substr(1, t.text.size() - 2);
            std::string bytes;
            for (size_t i = 0; i < body.size();)
                bytes += static_cast<char>(unescape_char(body, i));
            node(l).string_value = std::move(bytes);
            close(l);
            return l;
        }
        if (t.is(TokenKind::Punctuator, "(")) {
            advance();
            int e = parse_expr();
            expect_punct(")");
            return e;
        }
        fail("expression");
    }
};

// ---------------------------------------------------------------------------
// Type resolution

// Sequential byte offsets, no padding. Must run for every unit before any of
// them resolves member accesses, since records are visible across units.
void compute_record_offsets(TranslationUnit& tu) {
    for (auto& [name, fields] : tu.records) {
        long long offset = 0;
        for (FieldInfo& f : fields) {
            f.offset = offset;
            offset += storage_size_of(f.type);
        }
    }
}

class Resolver {
public:
    Resolver(TranslationUnit& tu, const std::vector<const TranslationUnit*>& includes)
        : tu_(tu), includes_(includes) {}

    void run() {
        compute_offsets();
        for (auto& [name, fn_id] : tu_.functions) {
            scopes_.clear();
            scopes_.emplace_back();
            AstNode& fn = tu_.node(fn_id);
            for (int c : fn.children) {
                AstNode& child = tu_.node(c);
                if (child.kind == NodeKind::ParamDecl)
                    scopes_.back()[child.name] = *child.type_annot;
            }
            int body = fn.children.empty() ? -1 : fn.children.back();
            if (body >= 0 && tu_.node(body).kind == NodeKind::CompoundStmt)
                resolve_stmt(body);
        }
        // Globals are visible to snippets that dump them; annotate initializers.
        for (int c : tu_.node(tu_.root).children) {
            if (tu_.node(c).kind == NodeKind::VarDecl) {
                scopes_.clear();
                scopes_.emplace_back();
                for (int init : tu_.node(c).children) resolve_expr(init);
            }
        }
    }

private:
    TranslationUnit& tu_;
    const std::vector<const TranslationUnit*>& includes_;
    std::vector<std::map<std::string, TypeRef>> scopes_;

    const std::vector<FieldInfo>* find_record(const std::string& name) const {
        auto it = tu_.records.find(name);
        if (it != tu_.records.end()) return &it->second;
        for (const TranslationUnit* inc : includes_) {
            auto jt = inc->records.find(name);
            if (jt != inc->records.end()) return &jt->second;
        }
        return nullptr;
    }

    void compute_offsets() { compute_record_offsets(tu_); }

    std::optional<TypeRef> lookup(const std::string& name) const {
        for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
            auto jt = it->find(name);
            if (jt != it->end()) return jt->second;
        }
        // Globals.
        for (int c : tu_.node(tu_.root).children) {
            const AstNode& n = tu_.node(c);
            if (n.kind == NodeKind::VarDecl && n.name == name) return n.type_annot;
        }
        return std::nullopt;
    }

    void resolve_stmt(int id) {
        AstNode& n = tu_.node(id);
        switch (n.kind) {
        case NodeKind::CompoundStmt: {
            scopes_.emplace_back();
            for (int c : n.children) resolve_stmt(c);
            scopes_.pop_back();
            break;
        }
        case NodeKind::DeclStmt: {
            int var = n.children[0];
            AstNode& v = tu_.node(var);
            for (int init : v.children) resolve_expr(init);
            scopes_.back()[v.name] = *v.type_annot;
            break;
        }
        case NodeKind::IfStmt:
        case NodeKind::WhileStmt: {
            resolve_expr(n.children[0]);
            for (size_t i = 1; i < n.children.size(); i++) resolve_stmt(n.children[i]);
            break;
        }
        case NodeKind::ReturnStmt:
        case NodeKind::ExprStmt: {
            for (int c : n.children) resolve_expr(c);
            break;
        }
        default:
            break;
        }
    }

    // Returns the static type of the expression when known.
    std::optional<TypeRef> resolve_expr(int id) {
        AstNode& n = tu_.node(id);
        switch (n.kind) {
        case NodeKind::DeclRefExpr: {
            auto type = lookup(n.name);
            if (type) n.type_annot = type;
            return type;
        }
        case NodeKind::IntegerLiteral:
            return TypeRef{BaseType::Long};
        case NodeKind::StringLiteral:
            return TypeRef{BaseType::Char, "", 1};
        case NodeKind::CastExpr: {
            resolve_expr(n.children[0]);
            return n.type_annot;
        }
        case NodeKind::UnaryOperator: {
            auto inner = resolve_expr(n.children[0]);
            if (!inner) return std::nullopt;
            if (n.op == "*") {
                if (inner->pointer_depth == 0)
                    throw TypeError(n.loc, "cannot dereference non-pointer");
                TypeRef t = *inner;
                t.pointer_depth--;
                t.array_len.reset();
                n.type_annot = t;
                return t;
            }
            if (n.op == "&") {
                TypeRef t = *inner;
                t.pointer_depth++;
                t.array_len.reset();
                n.type_annot = t;
                return t;
            }
            n.type_annot = TypeRef{BaseType::Long};
            return n.type_annot;
        }
        case NodeKind::BinaryOperator: {
            auto lhs = resolve_expr(n.children[0]);
            resolve_expr(n.children[1]);
            n.type_annot = n.op == "=" ? lhs : std::optional<TypeRef>(TypeRef{BaseType::Long});
            return n.type_annot;
        }
        case NodeKind::ArraySubscriptExpr: {
            auto base = resolve_expr(n.children[0]);
            resolve_expr(n.children[1]);
            if (base) {
                TypeRef t = *base;
                if (t.array_len && t.pointer_depth == 0) {
                    t.array_len.reset();
                } else if (t.pointer_depth > 0) {
                    t.pointer_depth--;
                } else {
                    throw TypeError(n.loc, "subscript of non-array, non-pointer value");
                }
                n.type_annot = t;
                return t;
            }
            return std::nullopt;
        }
        case NodeKind::MemberExpr: {
            auto object = resolve_expr(n.children[0]);
            if (!object)
                throw TypeError(n.loc, "member access on value of unknown type");
            TypeRef obj = *object;
            if (n.arrow) {
                if (obj.pointer_depth != 1 || obj.base != BaseType::Record)
                    throw TypeError(n.loc, "'->' requires a pointer to a record, got " +
                                               to_string(obj));
            } else {
                if (obj.pointer_depth != 0 || obj.base != BaseType::Record)
                    throw TypeError(n.loc, "'.' requires a record value, got " + to_string(obj));
            }
            const std::vector<FieldInfo>* fields = find_record(obj.record_name);
            if (!fields)
                throw TypeError(n.loc, "unknown record '" + obj.record_name + "'");
            for (const FieldInfo& f : *fields) {
                if (f.name == n.name) {
                    n.type_annot = f.type;
                    n.object_record = obj.record_name;
                    n.member_offset = f.offset;
                    return f.type;
                }
            }
            throw TypeError(n.loc, "no member '" + n.name + "' in '" + obj.record_name + "'");
        }
        case NodeKind::CallExpr: {
            for (size_t i = 1; i < n.children.size(); i++) resolve_expr(n.children[i]);
            // Direct callees keep the DeclRefExpr untyped; it names a function.
            if (n.name.empty()) resolve_expr(n.children[0]);
            n.type_annot = TypeRef{BaseType::Long};
            return n.type_annot;
        }
        default:
            return std::nullopt;
        }
    }
};

} // namespace

TranslationUnit parse(const std::vector<Token>& tokens, const std::string& file) {
    return Parser(tokens, file).run();
}

void resolve_types(TranslationUnit& tu, const std::vector<const TranslationUnit*>& includes) {
    Resolver(tu, includes).run();
}

TranslationUnit parse_source(const std::string& source_text, const std::string& file,
                             const std::vector<const TranslationUnit*>& includes) {
    TranslationUnit tu = parse(expand_macros(tokenize(source_text, file)), file);
    std::istringstream lines(source_text);
    std::string line;
    while (std::getline(lines, line)) tu.source_lines.push_back(line);
    resolve_types(tu, includes);
    return tu;
}

TranslationUnit parse_file(const std::string& path,
                           const std::vector<const TranslationUnit*>& includes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open source file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_source(buf.str(), path, includes);
}

std::vector<std::unique_ptr<TranslationUnit>> parse_program(
    const std::vector<std::string>& paths) {
    std::vector<std::unique_ptr<TranslationUnit>> tus;
    for (const std::string& path : paths) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open source file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string text = buf.str();
        auto tu = std::make_unique<TranslationUnit>(
            parse(expand_macros(tokenize(text, path)), path));
        std::istringstream lines(text);
        std::string line;
        while (std::getline(lines, line)) tu->source_lines.push_back(line);
        tus.push_back(std::move(tu));
    }
    // Record declarations are visible across the whole include list.
    for (auto& tu : tus) compute_record_offsets(*tu);
    for (size_t i = 0; i < tus.size(); i++) {
        std::vector<const TranslationUnit*> includes;
        for (size_t j = 0; j < tus.size(); j++) {
            if (j != i) includes.push_back(tus[j].get());
        }
        resolve_types(*tus[i], includes);
    }
    return tus;
}

} // namespace vx
