#include "vx/taint.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "vx/diag.hpp"

namespace vx {

MatchSet callsite_matches(const CrashReport& report,
                          const std::vector<const TranslationUnit*>& tus) {
    MatcherExpr callee;
    callee.op = MatcherOp::Callee;
    callee.text = report.stack[0].function;
    callee.has_text = true;
    MatcherExpr m;
    m.op = MatcherOp::Node;
    m.node_kind = NodeKind::CallExpr;
    m.args.push_back(std::move(callee));

    MatchSet set = match_template(tus, m);
    if (report.stack.size() > 1) {
        const Frame& caller = report.stack[1];
        for (Match& match : set.matches) {
            if (match.loc.file == caller.file && match.loc.line == caller.line)
                match.known = true;
        }
    }
    return set;
}

std::vector<std::string> default_sinks() { return {"memcpy", "strcpy"}; }

namespace {

bool record_declared(const std::vector<const TranslationUnit*>& tus, const std::string& name) {
    for (const TranslationUnit* tu : tus) {
        if (tu->records.count(name)) return true;
    }
    return false;
}

struct FunctionScan {
    const TranslationUnit* tu;
    const std::string* tainted_record;
    const std::vector<std::string>* sinks;

    bool tainted_type(const std::optional<TypeRef>& type) const {
        return type && type->pointer_depth >= 1 && type->base == BaseType::Record &&
               type->record_name == *tainted_record;
    }

    bool expr_tainted(const AstNode& n, const std::set<std::string>& taint) const {
        if (tainted_type(n.type_annot)) return true;
        if (n.kind == NodeKind::MemberExpr && n.object_record == *tainted_record) return true;
        if (n.kind == NodeKind::DeclRefExpr && taint.count(n.name)) return true;
        for (int c : n.children) {
            if (expr_tainted(tu->node(c), taint)) return true;
        }
        return false;
    }

    // Strong update per assignment; join at block entry is union.
    void transfer(int stmt_id, std::set<std::string>& taint) const {
        const AstNode& n = tu->node(stmt_id);
        if (n.kind == NodeKind::DeclStmt) {
            const AstNode& var = tu->node(n.children[0]);
            if (!var.children.empty() && expr_tainted(tu->node(var.children[0]), taint))
                taint.insert(var.name);
            else
                taint.erase(var.name);
            return;
        }
        if (n.kind == NodeKind::ExprStmt) {
            const AstNode& e = tu->node(n.children[0]);
            if (e.kind == NodeKind::BinaryOperator && e.op == "=") {
                const AstNode& lhs = tu->node(e.children[0]);
                if (lhs.kind == NodeKind::DeclRefExpr) {
                    if (expr_tainted(tu->node(e.children[1]), taint))
                        taint.insert(lhs.name);
                    else
                        taint.erase(lhs.name);
                }
            }
        }
    }

    void collect_sink_calls(const AstNode& n, const std::set<std::string>& taint,
                            std::vector<TaintFinding>& out) const {
        if (n.kind == NodeKind::CallExpr &&
            std::find(sinks->begin(), sinks->end(), n.name) != sinks->end()) {
            for (size_t i = 1; i < n.children.size(); i++) {
                if (expr_tainted(tu->node(n.children[i]), taint)) {
                    TaintFinding f;
                    f.sink_call = n.loc;
                    f.sink_name = n.name;
                    f.tainted_arg_index = static_cast<int>(i) - 1;
                    f.source_type = *tainted_record;
                    out.push_back(std::move(f));
                    break;
                }
            }
        }
        for (int c : n.children) collect_sink_calls(tu->node(c), taint, out);
    }

    bool has_relational_guard(const AstNode& n, const std::set<std::string>& taint) const {
        if (n.kind == NodeKind::BinaryOperator &&
            (n.op == "<" || n.op == "<=" || n.op == ">" || n.op == ">=")) {
            if (expr_tainted(tu->node(n.children[0]), taint) ||
                expr_tainted(tu->node(n.children[1]), taint))
                return true;
        }
        for (int c : n.children) {
            if (has_relational_guard(tu->node(c), taint)) return true;
        }
        return false;
    }

    void run(int fn_id, TaintScanResult& result) const {
        Cfg cfg = build_cfg(*tu, fn_id);
        size_t n = cfg.blocks.size();

        std::vector<std::set<std::string>> in(n), out(n);
        bool changed = true;
        while (changed) {
            changed = false;
            for (size_t b = 0; b < n; b++) {
                std::set<std::string> state;
                for (int p : cfg.predecessors(static_cast<int>(b)))
                    state.insert(out[p].begin(), out[p].end());
                in[b] = state;
                for (int stmt : cfg.blocks[b].stmts) transfer(stmt, state);
                if (state != out[b]) {
                    out[b] = std::move(state);
                    changed = true;
                }
            }
        }

        // Second pass: findings against the fixed point, guard check per block.
        std::set<std::string> all_tainted;
        for (const auto& s : out) all_tainted.insert(s.begin(), s.end());

        for (size_t b = 0; b < n; b++) {
            std::set<std::string> state = in[b];
            for (int stmt : cfg.blocks[b].stmts) {
                // Branch statements only contribute their condition here;
                // their bodies live in other blocks.
                const AstNode& s = tu->node(stmt);
                const AstNode& scan_root =
                    s.kind == NodeKind::IfStmt || s.kind == NodeKind::WhileStmt
                        ? tu->node(s.children[0])
                        : s;
                std::vector<TaintFinding> found;
                collect_sink_calls(scan_root, state, found);
                for (TaintFinding& f : found) {
                    bool guarded = false;
                    for (size_t g = 0; g < n && !guarded; g++) {
                        if (!cfg.strictly_dominates(static_cast<int>(g), static_cast<int>(b)))
                            continue;
                        for (int gs : cfg.blocks[g].stmts) {
                            const AstNode& guard_stmt = tu->node(gs);
                            if (guard_stmt.kind != NodeKind::IfStmt &&
                                guard_stmt.kind != NodeKind::WhileStmt)
                                continue;
                            if (has_relational_guard(tu->node(guard_stmt.children[0]),
                                                     all_tainted)) {
                                guarded = true;
                                break;
                            }
                        }
                    }
                    f.guarded = guarded;
                    (guarded ? result.guarded : result.findings).push_back(std::move(f));
                }
                transfer(stmt, state);
            }
        }
    }
};

void sort_findings(std::vector<TaintFinding>& findings) {
    std::sort(findings.begin(), findings.end(),
              [](const TaintFinding& a, const TaintFinding& b) {
                  return std::tie(a.sink_call.file, a.sink_call.line, a.sink_call.column,
                                  a.sink_name) < std::tie(b.sink_call.file, b.sink_call.line,
                                                          b.sink_call.column, b.sink_name);
              });
}

} // namespace

TaintScanResult taint_scan(const std::vector<const TranslationUnit*>& tus,
                           const std::string& tainted_record,
                           const std::vector<std::string>& sinks) {
    if (!record_declared(tus, tainted_record))
        throw UnknownRecord("tainted record '" + tainted_record + "' is not declared");

    TaintScanResult result;
    for (const TranslationUnit* tu : tus) {
        for (const auto& [name, fn_id] : tu->functions) {
            FunctionScan scan{tu, &tainted_record, &sinks};
            scan.run(fn_id, result);
        }
    }
    sort_findings(result.findings);
    sort_findings(result.guarded);
    return result;
}

std::string render_taint_finding(const TaintFinding& finding) {
    return "TAINT " + to_string(finding.sink_call) + " sink=" + finding.sink_name +
           " arg=" + std::to_string(finding.tainted_arg_index) +
           " source=" + finding.source_type;
}

} // namespace vx
