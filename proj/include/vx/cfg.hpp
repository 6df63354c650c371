#pragma once

#include <map>
#include <vector>

#include "vx/ast.hpp"
#include "vx/trace.hpp"

namespace vx {

enum class EdgeLabel { Fallthrough, True, False };

struct BasicBlock {
    int id = 0;
    std::vector<int> stmts; // statement node ids, in execution order
};

struct CfgEdge {
    int from = 0;
    int to = 0;
    EdgeLabel label = EdgeLabel::Fallthrough;
};

struct Cfg {
    std::vector<BasicBlock> blocks;
    std::vector<CfgEdge> edges;
    int entry = 0;
    int exit = 0;
    std::map<int, int> idom; // reachable block -> immediate dominator; entry absent

    std::vector<int> successors(int block) const;
    std::vector<int> predecessors(int block) const;

    // a strictly dominates b (a != b, both reachable).
    bool strictly_dominates(int a, int b) const;
};

// Structured control flow only: if splits true/false, while adds a back edge.
Cfg build_cfg(const TranslationUnit& tu, int fn_id);

struct CallSite {
    FunctionKey caller;
    std::string callee;
    SourceLocation loc;
};

struct CallGraph {
    std::vector<CallSite> edges;
};

CallGraph build_callgraph(const std::vector<const TranslationUnit*>& tus);

} // namespace vx
