#pragma once

// Brute-force reference semantics for the matcher DSL plus a random matcher
// generator. Kept deliberately naive and separate from the production
// evaluator: descendant sets are materialised per node and every rule is
// restated from the documented contract rather than shared.

#include <random>
#include <string>
#include <vector>

#include "vx/ast.hpp"
#include "vx/matcher.hpp"

namespace testutil {

inline void collect_descendants(const vx::TranslationUnit& tu, int id,
                                std::vector<int>& out) {
    for (int c : tu.node(id).children) {
        out.push_back(c);
        collect_descendants(tu, c, out);
    }
}

// `inner` is true when the matcher occurs in another node matcher's argument
// list; a bare node matcher there asserts the existence of a direct child.
inline bool oracle_eval(const vx::TranslationUnit& tu, int id, const vx::MatcherExpr& m,
                        bool inner) {
    using vx::MatcherOp;
    const vx::AstNode& n = tu.node(id);
    switch (m.op) {
    case MatcherOp::Node:
        if (inner) {
            for (int c : n.children) {
                if (oracle_eval(tu, c, m, false)) return true;
            }
            return false;
        }
        if (n.kind != m.node_kind) return false;
        if (m.has_text && n.name != m.text) return false;
        for (const vx::MatcherExpr& arg : m.args) {
            if (!oracle_eval(tu, id, arg, true)) return false;
        }
        return true;
    case MatcherOp::Member:
        return n.kind == vx::NodeKind::MemberExpr && n.name == m.text;
    case MatcherOp::ObjectType:
        return n.object_record == m.text;
    case MatcherOp::Callee:
        return n.kind == vx::NodeKind::CallExpr && n.name == m.text;
    case MatcherOp::HasDescendant: {
        std::vector<int> descendants;
        collect_descendants(tu, id, descendants);
        for (int d : descendants) {
            if (oracle_eval(tu, d, m.args[0], false)) return true;
        }
        return false;
    }
    case MatcherOp::AllOf:
        for (const vx::MatcherExpr& arg : m.args) {
            if (!oracle_eval(tu, id, arg, inner)) return false;
        }
        return true;
    case MatcherOp::AnyOf:
        for (const vx::MatcherExpr& arg : m.args) {
            if (oracle_eval(tu, id, arg, inner)) return true;
        }
        return false;
    case MatcherOp::Unless:
        return !oracle_eval(tu, id, m.args[0], inner);
    }
    return false;
}

inline std::vector<int> oracle_match_ids(const vx::TranslationUnit& tu,
                                         const vx::MatcherExpr& m) {
    std::vector<int> out;
    for (const vx::AstNode& n : tu.nodes) {
        if (n.kind == vx::NodeKind::TranslationUnit) continue;
        if (oracle_eval(tu, n.id, m, false)) out.push_back(n.id);
    }
    return out;
}

// Name pools drawn from the fixture sources plus a few misses.
struct MatcherGen {
    std::mt19937 rng;
    std::vector<std::string> names = {"udp", "buf", "len", "udp_len", "check_l4_udp",
                                      "abort", "memcpy", "parse", "nothing", "x"};
    std::vector<std::string> records = {"struct udp_header", "struct missing"};
    std::vector<vx::NodeKind> kinds = {
        vx::NodeKind::DeclStmt,       vx::NodeKind::ExprStmt,
        vx::NodeKind::ReturnStmt,     vx::NodeKind::IfStmt,
        vx::NodeKind::CallExpr,       vx::NodeKind::MemberExpr,
        vx::NodeKind::BinaryOperator, vx::NodeKind::VarDecl,
        vx::NodeKind::DeclRefExpr,
    };

    explicit MatcherGen(uint32_t seed) : rng(seed) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    std::string name() { return names[pick(static_cast<int>(names.size()))]; }

    vx::MatcherExpr string_arg(vx::MatcherOp op, std::string text) {
        vx::MatcherExpr m;
        m.op = op;
        m.text = std::move(text);
        m.has_text = true;
        return m;
    }

    // `enclosing` mirrors the DSL placement rule: member/objectType need a
    // memberExpr above, callee a callExpr.
    vx::MatcherExpr gen(int depth, std::optional<vx::NodeKind> enclosing) {
        using vx::MatcherOp;
        using vx::NodeKind;
        int choice = depth <= 0 ? 0 : pick(10);
        if (choice <= 4) { // node matcher
            vx::MatcherExpr m;
            m.op = MatcherOp::Node;
            m.node_kind = kinds[pick(static_cast<int>(kinds.size()))];
            if (pick(3) == 0) {
                m.text = name();
                m.has_text = true;
            }
            if (depth > 0) {
                int n_args = pick(3);
                for (int i = 0; i < n_args; i++)
                    m.args.push_back(gen(depth - 1, m.node_kind));
            }
            return m;
        }
        if (choice == 5 && enclosing == NodeKind::MemberExpr)
            return string_arg(MatcherOp::Member, name());
        if (choice == 6 && enclosing == NodeKind::MemberExpr)
            return string_arg(MatcherOp::ObjectType,
                              records[pick(static_cast<int>(records.size()))]);
        if (choice == 7 && enclosing == NodeKind::CallExpr)
            return string_arg(MatcherOp::Callee, name());
        if (choice == 8) {
            vx::MatcherExpr m;
            m.op = pick(2) ? MatcherOp::HasDescendant : MatcherOp::Unless;
            m.args.push_back(gen(depth - 1, enclosing));
            return m;
        }
        vx::MatcherExpr m;
        m.op = pick(2) ? MatcherOp::AllOf : MatcherOp::AnyOf;
        int n_args = 1 + pick(2);
        for (int i = 0; i < n_args; i++) m.args.push_back(gen(depth - 1, enclosing));
        return m;
    }
};

} // namespace testutil
