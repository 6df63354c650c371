#include "vx/ast.hpp"

#include <sstream>

namespace vx {

const char* to_string(NodeKind kind) {
    switch (kind) {
    case NodeKind::TranslationUnit: return "TranslationUnit";
    case NodeKind::FunctionDecl: return "FunctionDecl";
    case NodeKind::ParamDecl: return "ParamDecl";
    case NodeKind::RecordDecl: return "RecordDecl";
    case NodeKind::FieldDecl: return "FieldDecl";
    case NodeKind::VarDecl: return "VarDecl";
    case NodeKind::DeclStmt: return "DeclStmt";
    case NodeKind::CompoundStmt: return "CompoundStmt";
    case NodeKind::IfStmt: return "IfStmt";
    case NodeKind::WhileStmt: return "WhileStmt";
    case NodeKind::ReturnStmt: return "ReturnStmt";
    case NodeKind::ExprStmt: return "ExprStmt";
    case NodeKind::CallExpr: return "CallExpr";
    case NodeKind::MemberExpr: return "MemberExpr";
    case NodeKind::ArraySubscriptExpr: return "ArraySubscriptExpr";
    case NodeKind::DeclRefExpr: return "DeclRefExpr";
    case NodeKind::BinaryOperator: return "BinaryOperator";
    case NodeKind::UnaryOperator: return "UnaryOperator";
    case NodeKind::CastExpr: return "CastExpr";
    case NodeKind::IntegerLiteral: return "IntegerLiteral";
    case NodeKind::StringLiteral: return "StringLiteral";
    }
    return "?";
}

std::string to_string(const TypeRef& type) {
    std::string s;
    switch (type.base) {
    case BaseType::Char: s = "char"; break;
    case BaseType::Short: s = "short"; break;
    case BaseType::Int: s = "int"; break;
    case BaseType::Unsigned: s = "unsigned"; break;
    case BaseType::Long: s = "long"; break;
    case BaseType::SizeT: s = "size_t"; break;
    case BaseType::Record: s = type.record_name; break;
    case BaseType::Void: s = "void"; break;
    }
    for (int i = 0; i < type.pointer_depth; i++) s += "*";
    if (type.array_len) s += "[" + std::to_string(*type.array_len) + "]";
    return s;
}

long long size_of(const TypeRef& type) {
    if (type.pointer_depth > 0) return 8;
    switch (type.base) {
    case BaseType::Char: return 1;
    case BaseType::Short: return 2;
    case BaseType::Int:
    case BaseType::Unsigned: return 4;
    case BaseType::Long:
    case BaseType::SizeT: return 8;
    case BaseType::Record:
    case BaseType::Void: return 0; // computed from fields by resolve_types
    }
    return 0;
}

long long storage_size_of(const TypeRef& type) {
    long long n = size_of(type);
    if (type.array_len && type.pointer_depth == 0) n *= *type.array_len;
    return n;
}

int TranslationUnit::enclosing_function(int id) const {
    for (int cur = id; cur >= 0; cur = parent[cur]) {
        if (nodes[cur].kind == NodeKind::FunctionDecl) return cur;
    }
    return -1;
}

std::string TranslationUnit::snippet(int id) const {
    const AstNode& n = nodes[id];
    if (n.loc.line < 1 || n.end_loc.line > static_cast<int>(source_lines.size()))
        return "";
    if (n.loc.line == n.end_loc.line) {
        const std::string& line = source_lines[n.loc.line - 1];
        int from = n.loc.column - 1;
        int to = std::min<int>(n.end_loc.column - 1, static_cast<int>(line.size()));
        if (from < 0 || from > to) return "";
        return line.substr(from, to - from);
    }
    std::string out = source_lines[n.loc.line - 1].substr(
        std::min<size_t>(n.loc.column - 1, source_lines[n.loc.line - 1].size()));
    for (int l = n.loc.line + 1; l < n.end_loc.line; l++)
        out += "\n" + source_lines[l - 1];
    const std::string& last = source_lines[n.end_loc.line - 1];
    out += "\n" + last.substr(0, std::min<size_t>(n.end_loc.column - 1, last.size()));
    return out;
}

void compute_parents(TranslationUnit& tu) {
    tu.parent.assign(tu.nodes.size(), -1);
    for (const AstNode& n : tu.nodes) {
        for (int c : n.children) tu.parent[c] = n.id;
    }
}

namespace {

void dump_node(const TranslationUnit& tu, int id, int depth, std::ostringstream& out) {
    const AstNode& n = tu.node(id);
    for (int i = 0; i < depth; i++) out << "  ";
    out << to_string(n.kind) << " " << to_string(n.loc);
    if (!n.name.empty()) out << " name=" << n.name;
    if (n.type_annot) out << " type=" << to_string(*n.type_annot);
    if (!n.op.empty()) out << " op=" << n.op;
    out << "\n";
    for (int c : n.children) dump_node(tu, c, depth + 1, out);
}

} // namespace

std::string dump_ast(const TranslationUnit& tu) {
    std::ostringstream out;
    dump_node(tu, tu.root, 0, out);
    return out.str();
}

} // namespace vx
