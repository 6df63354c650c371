#pragma once

#include <string>
#include <vector>

#include "vx/ast.hpp"
#include "vx/localize.hpp"
#include "vx/trace.hpp"

namespace vx {

enum class MatcherOp {
    Node,          // kind test, optional name constraint, inner matchers
    Member,        // member name, beneath memberExpr
    ObjectType,    // object record, beneath memberExpr
    Callee,        // callee name, beneath callExpr
    HasDescendant, // any strict descendant matches
    AllOf,
    AnyOf,
    Unless,
};

struct MatcherExpr {
    MatcherOp op = MatcherOp::Node;
    NodeKind node_kind = NodeKind::DeclStmt; // op == Node
    std::string text;                        // string argument
    bool has_text = false;
    std::vector<MatcherExpr> args;

    bool operator==(const MatcherExpr&) const = default;
};

struct Match {
    SourceLocation loc;
    SourceLocation end_loc;
    int node_id = 0;
    FunctionKey enclosing_function;
    std::string snippet;
    bool known = false; // the fuzzer-discovered site itself

    bool operator==(const Match&) const = default;
};

struct MatchSet {
    std::vector<Match> matches; // sorted by (file, line, column, node_id)
};

enum class TemplateRule { Auto, Member, Call, DeclRef };

MatcherExpr parse_matcher(const std::string& text);
std::string render_matcher(const MatcherExpr& m);

// True when `m` holds of this node (top-level semantics).
bool matcher_matches(const TranslationUnit& tu, const AstNode& node, const MatcherExpr& m);

MatchSet match_template(const std::vector<const TranslationUnit*>& tus, const MatcherExpr& m,
                        int jobs = 1);

MatcherExpr derive_syntactic_template(const std::vector<const TranslationUnit*>& tus,
                                      const FaultLocus& locus,
                                      TemplateRule rule = TemplateRule::Auto);

} // namespace vx
