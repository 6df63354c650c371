#include "vx/cfg.hpp"

#include <algorithm>
#include <set>

namespace vx {

std::vector<int> Cfg::successors(int block) const {
    std::vector<int> out;
    for (const CfgEdge& e : edges) {
        if (e.from == block) out.push_back(e.to);
    }
    return out;
}

std::vector<int> Cfg::predecessors(int block) const {
    std::vector<int> out;
    for (const CfgEdge& e : edges) {
        if (e.to == block) out.push_back(e.from);
    }
    return out;
}

bool Cfg::strictly_dominates(int a, int b) const {
    int cur = b;
    while (cur != entry) {
        auto it = idom.find(cur);
        if (it == idom.end()) return false;
        cur = it->second;
        if (cur == a) return true;
    }
    return false;
}

namespace {

class CfgBuilder {
public:
    explicit CfgBuilder(const TranslationUnit& tu) : tu_(tu) {}

    Cfg run(int fn_id) {
        const AstNode& fn = tu_.node(fn_id);
        cfg_.entry = new_block();
        current_ = cfg_.entry;
        terminated_ = false;
        if (!fn.children.empty()) {
            const AstNode& body = tu_.node(fn.children.back());
            if (body.kind == NodeKind::CompoundStmt) walk(body);
        }
        // An empty fall-off block doubles as the exit.
        if (cfg_.blocks[current_].stmts.empty() && !terminated_) {
            cfg_.exit = current_;
        } else {
            cfg_.exit = new_block();
            if (!terminated_) edge(current_, cfg_.exit, EdgeLabel::Fallthrough);
        }
        for (int from : return_blocks_) edge(from, cfg_.exit, EdgeLabel::Fallthrough);
        compute_dominators();
        return std::move(cfg_);
    }

private:
    const TranslationUnit& tu_;
    Cfg cfg_;
    int current_ = 0;
    bool terminated_ = false; // current block ends in a return
    std::vector<int> return_blocks_;

    int new_block() {
        BasicBlock b;
        b.id = static_cast<int>(cfg_.blocks.size());
        cfg_.blocks.push_back(std::move(b));
        return cfg_.blocks.back().id;
    }

    void edge(int from, int to, EdgeLabel label) { cfg_.edges.push_back({from, to, label}); }

    void walk(const AstNode& stmt) {
        switch (stmt.kind) {
        case NodeKind::CompoundStmt:
            for (int c : stmt.children) {
                if (terminated_) {
                    // Unreachable continuation gets its own block.
                    current_ = new_block();
                    terminated_ = false;
                }
                walk(tu_.node(c));
            }
            break;
        case NodeKind::DeclStmt:
        case NodeKind::ExprStmt:
            cfg_.blocks[current_].stmts.push_back(stmt.id);
            break;
        case NodeKind::ReturnStmt:
            cfg_.blocks[current_].stmts.push_back(stmt.id);
            return_blocks_.push_back(current_);
            terminated_ = true;
            break;
        case NodeKind::IfStmt: {
            cfg_.blocks[current_].stmts.push_back(stmt.id);
            int cond = current_;

            int then_entry = new_block();
            edge(cond, then_entry, EdgeLabel::True);
            current_ = then_entry;
            terminated_ = false;
            walk(tu_.node(stmt.children[1]));
            int then_exit = current_;
            bool then_done = terminated_;

            int else_exit = -1;
            bool else_done = false;
            if (stmt.children.size() > 2) {
                int else_entry = new_block();
                edge(cond, else_entry, EdgeLabel::False);
                current_ = else_entry;
                terminated_ = false;
                walk(tu_.node(stmt.children[2]));
                else_exit = current_;
                else_done = terminated_;
            }

            int join = new_block();
            if (else_exit < 0) edge(cond, join, EdgeLabel::False);
            if (!then_done) edge(then_exit, join, EdgeLabel::Fallthrough);
            if (else_exit >= 0 && !else_done) edge(else_exit, join, EdgeLabel::Fallthrough);
            current_ = join;
            terminated_ = false;
            break;
        }
        case NodeKind::WhileStmt: {
            int cond;
            if (cfg_.blocks[current_].stmts.empty()) {
                cond = current_;
            } else {
                cond = new_block();
                edge(current_, cond, EdgeLabel::Fallthrough);
            }
            cfg_.blocks[cond].stmts.push_back(stmt.id);

            int body = new_block();
            edge(cond, body, EdgeLabel::True);
            current_ = body;
            terminated_ = false;
            walk(tu_.node(stmt.children[1]));
            if (!terminated_) edge(current_, cond, EdgeLabel::Fallthrough);

            int after = new_block();
            edge(cond, after, EdgeLabel::False);
            current_ = after;
            terminated_ = false;
            break;
        }
        default:
            break;
        }
    }

    void compute_dominators() {
        size_t n = cfg_.blocks.size();
        std::vector<std::set<int>> preds(n);
        for (const CfgEdge& e : cfg_.edges) preds[e.to].insert(e.from);

        // Reachable set.
        std::set<int> reachable;
        std::vector<int> work = {cfg_.entry};
        while (!work.empty()) {
            int b = work.back();
            work.pop_back();
            if (!reachable.insert(b).second) continue;
            for (int s : successors_of(b)) work.push_back(s);
        }

        std::vector<std::set<int>> dom(n);
        for (int b : reachable) {
            if (b == cfg_.entry) {
                dom[b] = {b};
            } else {
                dom[b] = reachable;
            }
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (int b : reachable) {
                if (b == cfg_.entry) continue;
                std::set<int> next = reachable;
                bool any_pred = false;
                for (int p : preds[b]) {
                    if (!reachable.count(p)) continue;
                    any_pred = true;
                    std::set<int> inter;
                    std::set_intersection(next.begin(), next.end(), dom[p].begin(),
                                          dom[p].end(), std::inserter(inter, inter.begin()));
                    next = std::move(inter);
                }
                if (!any_pred) next.clear();
                next.insert(b);
                if (next != dom[b]) {
                    dom[b] = std::move(next);
                    changed = true;
                }
            }
        }

        for (int b : reachable) {
            if (b == cfg_.entry) continue;
            int best = -1;
            size_t best_size = 0;
            for (int d : dom[b]) {
                if (d == b) continue;
                if (best < 0 || dom[d].size() > best_size) {
                    best = d;
                    best_size = dom[d].size();
                }
            }
            if (best >= 0) cfg_.idom[b] = best;
        }
    }

    std::vector<int> successors_of(int b) const {
        std::vector<int> out;
        for (const CfgEdge& e : cfg_.edges) {
            if (e.from == b) out.push_back(e.to);
        }
        return out;
    }
};

void collect_calls(const TranslationUnit& tu, const AstNode& node, const FunctionKey& caller,
                   CallGraph& graph) {
    if (node.kind == NodeKind::CallExpr && !node.name.empty())
        graph.edges.push_back({caller, node.name, node.loc});
    for (int c : node.children) collect_calls(tu, tu.node(c), caller, graph);
}

} // namespace

Cfg build_cfg(const TranslationUnit& tu, int fn_id) { return CfgBuilder(tu).run(fn_id); }

CallGraph build_callgraph(const std::vector<const TranslationUnit*>& tus) {
    CallGraph graph;
    for (const TranslationUnit* tu : tus) {
        for (const auto& [name, fn_id] : tu->functions) {
            collect_calls(*tu, tu->node(fn_id), {tu->file, name}, graph);
        }
    }
    std::sort(graph.edges.begin(), graph.edges.end(), [](const CallSite& a, const CallSite& b) {
        return std::tie(a.loc.file, a.loc.line, a.loc.column, a.callee) <
               std::tie(b.loc.file, b.loc.line, b.loc.column, b.callee);
    });
    return graph;
}

} // namespace vx
