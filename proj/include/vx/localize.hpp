#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "vx/ast.hpp"
#include "vx/corpus.hpp"
#include "vx/interp.hpp"

namespace vx {

struct FaultDice {
    std::set<std::pair<std::string, int>> lines;
};

struct FaultLocus {
    std::set<std::pair<std::string, int>> lines;
    FunctionKey focus_function;
    CrashKind crash_kind = CrashKind::Abort;
    std::vector<Frame> stack;
    // (record_name, field_name) at the crash site; buffer-overflow kinds only.
    std::optional<std::pair<std::string, std::string>> faulty_member;
    bool report_based = false;
};

// Inverse of render_report.
CrashReport parse_crash_report(const std::string& text);

FaultDice obtain_dice(const ExecutionSlice& slice1, const ExecutionSlice& slice2);

// Report-based localization for buffer overflows, differential dicing
// otherwise. Dice lines are restricted to files of the analyzed TUs.
FaultLocus localize_failure(const CorpusEntry& crash_entry, const FuzzCorpus& corpus,
                            const std::vector<const TranslationUnit*>& tus);

std::string render_locus(const FaultLocus& locus);

} // namespace vx
