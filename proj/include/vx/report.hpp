#pragma once

#include <string>
#include <vector>

#include "vx/localize.hpp"
#include "vx/matcher.hpp"
#include "vx/rank.hpp"
#include "vx/taint.hpp"

namespace vx {

struct CrashSection {
    std::string entry_id;
    CrashReport report;
    bool unlocalized = false;
    std::string unlocalized_reason;
    FaultLocus locus;
    std::string syntactic_template; // rendered matcher
    bool semantic = false;
    std::string callsite_template; // rendered, when semantic
    MatchSet matches;              // syntactic ∪ semantic, known flags set
    TaintScanResult taint;
    RankedMatches ranked;
    int explored = 0;    // |matches| − known
    int ranked_high = 0; // |high| − known among high
};

struct ExploreReport {
    std::vector<CrashSection> sections;
};

// The clang-query style four-line block:
//   Match #<n>:
//   <file>:<line>:<col>: note: "root" binds here
//   <source line text>
//   <caret under the match column>
std::string render_match_block(int index, const Match& match,
                               const std::vector<const TranslationUnit*>& tus);

std::string render_report_text(const ExploreReport& report,
                               const std::vector<const TranslationUnit*>& tus);
std::string render_report_json(const ExploreReport& report,
                               const std::vector<const TranslationUnit*>& tus);

} // namespace vx
