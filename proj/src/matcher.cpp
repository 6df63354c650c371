#include "vx/matcher.hpp"

#include <algorithm>
#include <cctype>
#include <future>
#include <map>

#include "vx/diag.hpp"

namespace vx {

namespace {

const std::map<std::string, NodeKind> kDslKinds = {
    {"declStmt", NodeKind::DeclStmt},
    {"exprStmt", NodeKind::ExprStmt},
    {"returnStmt", NodeKind::ReturnStmt},
    {"ifStmt", NodeKind::IfStmt},
    {"callExpr", NodeKind::CallExpr},
    {"memberExpr", NodeKind::MemberExpr},
    {"binaryOperator", NodeKind::BinaryOperator},
    {"varDecl", NodeKind::VarDecl},
    {"declRefExpr", NodeKind::DeclRefExpr},
};

const char* dsl_name(NodeKind kind) {
    for (const auto& [name, k] : kDslKinds) {
        if (k == kind) return name.c_str();
    }
    return "?";
}

class DslParser {
public:
    explicit DslParser(const std::string& text) : text_(text) {}

    MatcherExpr run() {
        MatcherExpr m = parse(/*enclosing=*/std::nullopt);
        skip_ws();
        if (pos_ != text_.size())
            throw DslError(pos_, "trailing input after matcher expression");
        return m;
    }

private:
    const std::string& text_;
    size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            pos_++;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c) {
        if (peek() != c)
            throw DslError(pos_, std::string("expected '") + c + "'");
        pos_++;
    }

    std::string parse_name() {
        skip_ws();
        size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            pos_++;
        if (pos_ == start) throw DslError(pos_, "expected a matcher name");
        return text_.substr(start, pos_ - start);
    }

    std::string parse_string() {
        expect('"');
        std::string out;
        while (peek() != '"') {
            if (peek() == '\0') throw DslError(pos_, "unterminated string literal");
            out += text_[pos_++];
        }
        pos_++;
        return out;
    }

    // `enclosing` is the nearest NodeKind matcher above, through combinators.
    MatcherExpr parse(std::optional<NodeKind> enclosing) {
        size_t name_pos = pos_;
        std::string name = parse_name();
        skip_ws();
        expect('(');

        MatcherExpr m;
        auto kind_it = kDslKinds.find(name);
        if (kind_it != kDslKinds.end()) {
            m.op = MatcherOp::Node;
            m.node_kind = kind_it->second;
        } else if (name == "member" || name == "objectType") {
            if (enclosing != NodeKind::MemberExpr)
                throw DslError(name_pos, "'" + name + "' is only valid beneath memberExpr");
            m.op = name == "member" ? MatcherOp::Member : MatcherOp::ObjectType;
        } else if (name == "callee") {
            if (enclosing != NodeKind::CallExpr)
                throw DslError(name_pos, "'callee' is only valid beneath callExpr");
            m.op = MatcherOp::Callee;
        } else if (name == "hasDescendant") {
            m.op = MatcherOp::HasDescendant;
        } else if (name == "allOf") {
            m.op = MatcherOp::AllOf;
        } else if (name == "anyOf") {
            m.op = MatcherOp::AnyOf;
        } else if (name == "unless") {
            m.op = MatcherOp::Unless;
        } else {
            throw DslError(name_pos, "unknown matcher '" + name + "'");
        }

        std::optional<NodeKind> inner_enclosing =
            m.op == MatcherOp::Node ? std::optional<NodeKind>(m.node_kind) : enclosing;
        bool want_string = m.op == MatcherOp::Member || m.op == MatcherOp::ObjectType ||
                           m.op == MatcherOp::Callee;

        skip_ws();
        if (peek() != ')') {
            while (true) {
                skip_ws();
                if (peek() == '"') {
                    size_t str_pos = pos_;
                    std::string s = parse_string();
                    if (want_string || m.op == MatcherOp::Node) {
                        if (m.has_text)
                            throw DslError(str_pos, "duplicate string argument");
                        m.text = s;
                        m.has_text = true;
                    } else {
                        throw DslError(str_pos, "string argument not allowed here");
                    }
                } else {
                    if (want_string)
                        throw DslError(pos_, "expected a string argument");
                    m.args.push_back(parse(inner_enclosing));
                }
                skip_ws();
                if (peek() == ',') {
                    pos_++;
                    continue;
                }
                break;
            }
        }
        expect(')');

        if (want_string && !m.has_text)
            throw DslError(name_pos, "'" + name + "' requires a string argument");
        if ((m.op == MatcherOp::HasDescendant || m.op == MatcherOp::Unless) &&
            m.args.size() != 1)
            throw DslError(name_pos, "'" + name + "' requires exactly one matcher argument");
        if ((m.op == MatcherOp::AllOf || m.op == MatcherOp::AnyOf) && m.args.empty())
            throw DslError(name_pos, "'" + name + "' requires at least one matcher argument");
        return m;
    }
};

enum class Ctx { Self, Inner };

bool eval_matcher(const TranslationUnit& tu, const AstNode& node, const MatcherExpr& m,
                  Ctx ctx);

bool descendant_matches(const TranslationUnit& tu, const AstNode& node,
                        const MatcherExpr& m) {
    for (int c : node.children) {
        const AstNode& child = tu.node(c);
        if (eval_matcher(tu, child, m, Ctx::Self)) return true;
        if (descendant_matches(tu, child, m)) return true;
    }
    return false;
}

bool eval_matcher(const TranslationUnit& tu, const AstNode& node, const MatcherExpr& m,
                  Ctx ctx) {
    switch (m.op) {
    case MatcherOp::Node: {
        if (ctx == Ctx::Inner) {
            // A bare node matcher inside another node's argument list
            // constrains a direct child.
            for (int c : node.children) {
                if (eval_matcher(tu, tu.node(c), m, Ctx::Self)) return true;
            }
            return false;
        }
        if (node.kind != m.node_kind) return false;
        if (m.has_text && node.name != m.text) return false;
        for (const MatcherExpr& arg : m.args) {
            if (!eval_matcher(tu, node, arg, Ctx::Inner)) return false;
        }
        return true;
    }
    case MatcherOp::Member:
        return node.kind == NodeKind::MemberExpr && node.name == m.text;
    case MatcherOp::ObjectType:
        return node.object_record == m.text;
    case MatcherOp::Callee:
        return node.kind == NodeKind::CallExpr && node.name == m.text;
    case MatcherOp::HasDescendant:
        return descendant_matches(tu, node, m.args[0]);
    case MatcherOp::AllOf:
        for (const MatcherExpr& arg : m.args) {
            if (!eval_matcher(tu, node, arg, ctx)) return false;
        }
        return true;
    case MatcherOp::AnyOf:
        for (const MatcherExpr& arg : m.args) {
            if (eval_matcher(tu, node, arg, ctx)) return true;
        }
        return false;
    case MatcherOp::Unless:
        return !eval_matcher(tu, node, m.args[0], ctx);
    }
    return false;
}

void render(const MatcherExpr& m, std::string& out) {
    switch (m.op) {
    case MatcherOp::Node: out += dsl_name(m.node_kind); break;
    case MatcherOp::Member: out += "member"; break;
    case MatcherOp::ObjectType: out += "objectType"; break;
    case MatcherOp::Callee: out += "callee"; break;
    case MatcherOp::HasDescendant: out += "hasDescendant"; break;
    case MatcherOp::AllOf: out += "allOf"; break;
    case MatcherOp::AnyOf: out += "anyOf"; break;
    case MatcherOp::Unless: out += "unless"; break;
    }
    out += "(";
    bool first = true;
    if (m.has_text) {
        out += "\"" + m.text + "\"";
        first = false;
    }
    for (const MatcherExpr& arg : m.args) {
        if (!first) out += ", ";
        first = false;
        render(arg, out);
    }
    out += ")";
}

std::vector<Match> match_tu(const TranslationUnit& tu, const MatcherExpr& m) {
    std::vector<Match> out;
    for (const AstNode& n : tu.nodes) {
        if (n.kind == NodeKind::TranslationUnit) continue;
        if (!eval_matcher(tu, n, m, Ctx::Self)) continue;
        Match match;
        match.loc = n.loc;
        match.end_loc = n.end_loc;
        match.node_id = n.id;
        int fn = tu.enclosing_function(n.id);
        match.enclosing_function = {tu.file, fn >= 0 ? tu.node(fn).name : ""};
        match.snippet = tu.snippet(n.id);
        out.push_back(std::move(match));
    }
    return out;
}

} // namespace

MatcherExpr parse_matcher(const std::string& text) { return DslParser(text).run(); }

std::string render_matcher(const MatcherExpr& m) {
    std::string out;
    render(m, out);
    return out;
}

bool matcher_matches(const TranslationUnit& tu, const AstNode& node, const MatcherExpr& m) {
    return eval_matcher(tu, node, m, Ctx::Self);
}

MatchSet match_template(const std::vector<const TranslationUnit*>& tus, const MatcherExpr& m,
                        int jobs) {
    std::vector<std::vector<Match>> per_tu(tus.size());
    if (jobs > 1) {
        std::vector<std::future<std::vector<Match>>> futures;
        for (const TranslationUnit* tu : tus) {
            futures.push_back(std::async(std::launch::async,
                                         [tu, &m] { return match_tu(*tu, m); }));
        }
        for (size_t i = 0; i < futures.size(); i++) per_tu[i] = futures[i].get();
    } else {
        for (size_t i = 0; i < tus.size(); i++) per_tu[i] = match_tu(*tus[i], m);
    }

    MatchSet set;
    for (std::vector<Match>& part : per_tu) {
        for (Match& match : part) set.matches.push_back(std::move(match));
    }
    std::sort(set.matches.begin(), set.matches.end(), [](const Match& a, const Match& b) {
        return std::tie(a.loc.file, a.loc.line, a.loc.column, a.node_id) <
               std::tie(b.loc.file, b.loc.line, b.loc.column, b.node_id);
    });
    set.matches.erase(std::unique(set.matches.begin(), set.matches.end(),
                                  [](const Match& a, const Match& b) {
                                      return a.loc.file == b.loc.file &&
                                             a.node_id == b.node_id;
                                  }),
                      set.matches.end());
    return set;
}

namespace {

bool is_anchor_kind(NodeKind kind) {
    return kind == NodeKind::DeclStmt || kind == NodeKind::ExprStmt ||
           kind == NodeKind::ReturnStmt || kind == NodeKind::IfStmt;
}

// Smallest anchor-kind statement whose range covers the line.
const AstNode* find_anchor(const TranslationUnit& tu, int line) {
    const AstNode* best = nullptr;
    for (const AstNode& n : tu.nodes) {
        if (!is_anchor_kind(n.kind)) continue;
        if (n.loc.line > line || n.end_loc.line < line) continue;
        if (!best) {
            best = &n;
            continue;
        }
        auto span = [](const AstNode& x) {
            return std::make_pair(x.end_loc.line - x.loc.line,
                                  x.end_loc.column - x.loc.column);
        };
        if (span(n) < span(*best)) best = &n;
    }
    return best;
}

const AstNode* find_first_of_kind(const TranslationUnit& tu, const AstNode& root,
                                  NodeKind kind) {
    for (int c : root.children) {
        const AstNode& child = tu.node(c);
        if (child.kind == kind) return &child;
        if (const AstNode* found = find_first_of_kind(tu, child, kind)) return found;
    }
    return nullptr;
}

MatcherExpr node_matcher(NodeKind kind) {
    MatcherExpr m;
    m.op = MatcherOp::Node;
    m.node_kind = kind;
    return m;
}

MatcherExpr string_matcher(MatcherOp op, std::string text) {
    MatcherExpr m;
    m.op = op;
    m.text = std::move(text);
    m.has_text = true;
    return m;
}

// For IfStmt anchors only the condition subtree is templated.
const AstNode& template_root(const TranslationUnit& tu, const AstNode& anchor) {
    if (anchor.kind == NodeKind::IfStmt) return tu.node(anchor.children[0]);
    return anchor;
}

std::optional<MatcherExpr> derive_member(const TranslationUnit& tu, const AstNode& anchor,
                                         const FaultLocus& locus) {
    std::string record, field;
    if (locus.faulty_member) {
        record = locus.faulty_member->first;
        field = locus.faulty_member->second;
    } else {
        const AstNode& root = template_root(tu, anchor);
        const AstNode* member =
            root.kind == NodeKind::MemberExpr ? &root
                                              : find_first_of_kind(tu, root, NodeKind::MemberExpr);
        if (!member || member->object_record.empty()) return std::nullopt;
        record = member->object_record;
        field = member->name;
    }
    MatcherExpr inner = node_matcher(NodeKind::MemberExpr);
    inner.args.push_back(string_matcher(MatcherOp::Member, field));
    inner.args.push_back(string_matcher(MatcherOp::ObjectType, record));
    MatcherExpr descend;
    descend.op = MatcherOp::HasDescendant;
    descend.args.push_back(std::move(inner));
    MatcherExpr m = node_matcher(anchor.kind);
    m.args.push_back(std::move(descend));
    return m;
}

std::optional<MatcherExpr> derive_call(const TranslationUnit& tu, const AstNode& anchor) {
    const AstNode& root = template_root(tu, anchor);
    const AstNode* call = root.kind == NodeKind::CallExpr
                              ? &root
                              : find_first_of_kind(tu, root, NodeKind::CallExpr);
    if (!call || call->name.empty()) return std::nullopt;
    MatcherExpr inner = node_matcher(NodeKind::CallExpr);
    inner.args.push_back(string_matcher(MatcherOp::Callee, call->name));
    MatcherExpr m = node_matcher(anchor.kind);
    m.args.push_back(std::move(inner));
    return m;
}

std::optional<MatcherExpr> derive_declref(const TranslationUnit& tu, const AstNode& anchor) {
    const AstNode& root = template_root(tu, anchor);
    const AstNode* ref = root.kind == NodeKind::DeclRefExpr
                             ? &root
                             : find_first_of_kind(tu, root, NodeKind::DeclRefExpr);
    if (!ref) return std::nullopt;
    MatcherExpr inner = node_matcher(NodeKind::DeclRefExpr);
    inner.text = ref->name;
    inner.has_text = true;
    MatcherExpr descend;
    descend.op = MatcherOp::HasDescendant;
    descend.args.push_back(std::move(inner));
    MatcherExpr m = node_matcher(anchor.kind);
    m.args.push_back(std::move(descend));
    return m;
}

} // namespace

MatcherExpr derive_syntactic_template(const std::vector<const TranslationUnit*>& tus,
                                      const FaultLocus& locus, TemplateRule rule) {
    std::vector<MatcherExpr> per_line;
    std::vector<std::string> seen;
    for (const auto& [file, line] : locus.lines) {
        const TranslationUnit* tu = nullptr;
        for (const TranslationUnit* t : tus) {
            if (t->file == file) {
                tu = t;
                break;
            }
        }
        if (!tu) continue;
        const AstNode* anchor = find_anchor(*tu, line);
        if (!anchor) continue;

        std::optional<MatcherExpr> m;
        switch (rule) {
        case TemplateRule::Member:
            m = derive_member(*tu, *anchor, locus);
            break;
        case TemplateRule::Call:
            m = derive_call(*tu, *anchor);
            break;
        case TemplateRule::DeclRef:
            m = derive_declref(*tu, *anchor);
            break;
        case TemplateRule::Auto:
            m = derive_member(*tu, *anchor, locus);
            if (!m) m = derive_call(*tu, *anchor);
            if (!m) m = derive_declref(*tu, *anchor);
            break;
        }
        if (!m) continue;
        std::string rendered = render_matcher(*m);
        if (std::find(seen.begin(), seen.end(), rendered) == seen.end()) {
            seen.push_back(rendered);
            per_line.push_back(std::move(*m));
        }
    }
    if (per_line.empty())
        throw NoAnchor("no statement covers any locus line");
    if (per_line.size() == 1) return per_line[0];
    MatcherExpr any;
    any.op = MatcherOp::AnyOf;
    any.args = std::move(per_line);
    return any;
}

} // namespace vx
