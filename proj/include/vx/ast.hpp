#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vx/source.hpp"

namespace vx {

enum class NodeKind {
    TranslationUnit,
    FunctionDecl,
    ParamDecl,
    RecordDecl,
    FieldDecl,
    VarDecl,
    DeclStmt,
    CompoundStmt,
    IfStmt,
    WhileStmt,
    ReturnStmt,
    ExprStmt,
    CallExpr,
    MemberExpr,
    ArraySubscriptExpr,
    DeclRefExpr,
    BinaryOperator,
    UnaryOperator,
    CastExpr,
    IntegerLiteral,
    StringLiteral,
};

const char* to_string(NodeKind kind);

enum class BaseType { Char, Short, Int, Unsigned, Long, SizeT, Record, Void };

// Fixed sizes, no struct padding: char 1, short 2, int/unsigned 4,
// long/size_t 8.
struct TypeRef {
    BaseType base = BaseType::Int;
    std::string record_name; // "struct foo" iff base == Record
    int pointer_depth = 0;
    std::optional<long long> array_len;

    bool operator==(const TypeRef&) const = default;

    bool is_pointer() const { return pointer_depth > 0; }
    bool is_signed() const {
        return base == BaseType::Char || base == BaseType::Short ||
               base == BaseType::Int || base == BaseType::Long;
    }
};

std::string to_string(const TypeRef& type);

// Scalar size in bytes (ignores array_len); pointers are 8.
long long size_of(const TypeRef& type);

// Full storage size, array_len included.
long long storage_size_of(const TypeRef& type);

struct AstNode {
    int id = 0;
    NodeKind kind = NodeKind::TranslationUnit;
    SourceLocation loc;
    SourceLocation end_loc;
    std::vector<int> children;

    std::string name; // decl name, member name, referenced name, callee name
    std::string op;   // operator spelling
    std::optional<TypeRef> type_annot;

    long long int_value = 0;     // IntegerLiteral / CharLiteral
    std::string string_value;    // StringLiteral, unescaped bytes
    bool arrow = false;          // MemberExpr: -> vs .
    std::string object_record;   // MemberExpr: record of the object, set by resolve_types
    long long member_offset = -1; // MemberExpr: byte offset, set by resolve_types
};

struct FieldInfo {
    std::string name;
    TypeRef type;
    long long offset = 0;
};

struct TranslationUnit {
    std::string file;
    std::vector<AstNode> nodes; // arena; node id == index
    int root = 0;
    std::vector<int> parent;    // parent id per node, -1 for root
    std::vector<std::string> source_lines;

    std::map<std::string, std::vector<FieldInfo>> records; // keyed "struct foo"
    std::map<std::string, int> functions;                  // name -> FunctionDecl id

    const AstNode& node(int id) const { return nodes[id]; }
    AstNode& node(int id) { return nodes[id]; }

    // Nearest enclosing FunctionDecl, or -1.
    int enclosing_function(int id) const;

    // Source text covered by [node.loc, node.end_loc], single file.
    std::string snippet(int id) const;

    std::string source_line(int line) const {
        return line >= 1 && line <= static_cast<int>(source_lines.size())
                   ? source_lines[line - 1]
                   : std::string();
    }
};

void compute_parents(TranslationUnit& tu);

std::string dump_ast(const TranslationUnit& tu);

} // namespace vx
