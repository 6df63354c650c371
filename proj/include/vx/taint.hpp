#pragma once

#include <string>
#include <vector>

#include "vx/ast.hpp"
#include "vx/cfg.hpp"
#include "vx/interp.hpp"
#include "vx/matcher.hpp"

namespace vx {

struct TaintFinding {
    SourceLocation sink_call;
    std::string sink_name;
    int tainted_arg_index = 0;
    std::string source_type; // the tainted record
    bool guarded = false;

    bool operator==(const TaintFinding&) const = default;
};

struct TaintScanResult {
    std::vector<TaintFinding> findings; // unguarded, reported
    std::vector<TaintFinding> guarded;  // suppressed, kept for diagnostics
};

// All call sites of the crash stack's top-frame function; the call in the
// report's own stack (frame #1) is flagged known.
MatchSet callsite_matches(const CrashReport& report,
                          const std::vector<const TranslationUnit*>& tus);

// Forward may-taint dataflow per function: values typed pointer-to-record,
// member reads of the record, and anything derived from them taint local
// variables; calls to a sink with a tainted argument are findings unless a
// strictly dominating block guards a tainted expression with a relational
// comparison.
TaintScanResult taint_scan(const std::vector<const TranslationUnit*>& tus,
                           const std::string& tainted_record,
                           const std::vector<std::string>& sinks);

std::vector<std::string> default_sinks();

std::string render_taint_finding(const TaintFinding& finding);

} // namespace vx
