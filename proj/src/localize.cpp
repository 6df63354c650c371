#include "vx/localize.hpp"

#include <fstream>
#include <sstream>

#include "vx/diag.hpp"

namespace vx {

namespace {

// Splits "<file>:<line>:<col>" from the right; the file part may contain '/'.
bool split_location(const std::string& text, std::string& file, int& line, int& col) {
    size_t c2 = text.rfind(':');
    if (c2 == std::string::npos || c2 == 0) return false;
    size_t c1 = text.rfind(':', c2 - 1);
    if (c1 == std::string::npos) return false;
    try {
        line = std::stoi(text.substr(c1 + 1, c2 - c1 - 1));
        col = std::stoi(text.substr(c2 + 1));
    } catch (const std::exception&) {
        return false;
    }
    file = text.substr(0, c1);
    return !file.empty();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open crash report: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

CrashReport parse_crash_report(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line))
        throw ReportFormatError("empty crash report", 1);

    const std::string prefix = "ERROR: MiniSan: ";
    if (line.rfind(prefix, 0) != 0)
        throw ReportFormatError("missing 'ERROR: MiniSan:' header", 1);
    size_t at = line.find(" at ", prefix.size());
    if (at == std::string::npos)
        throw ReportFormatError("missing ' at ' in header", 1);

    CrashReport report;
    std::string kind_text = line.substr(prefix.size(), at - prefix.size());
    auto kind = crash_kind_from_string(kind_text);
    if (!kind) throw ReportFormatError("unknown crash kind '" + kind_text + "'", 1);
    report.kind = *kind;
    if (!split_location(line.substr(at + 4), report.site.file, report.site.line,
                        report.site.column))
        throw ReportFormatError("malformed crash site location", 1);

    int line_no = 1;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string index, in_word, function, loc_text;
        if (!(fields >> index >> in_word >> function >> loc_text) || in_word != "in" ||
            index != "#" + std::to_string(report.stack.size()))
            throw ReportFormatError("malformed stack frame '" + line + "'", line_no);
        Frame frame;
        frame.function = function;
        if (!split_location(loc_text, frame.file, frame.line, frame.column))
            throw ReportFormatError("malformed frame location '" + loc_text + "'", line_no);
        report.stack.push_back(std::move(frame));
    }
    if (report.stack.empty())
        throw ReportFormatError("crash report has no stack frames", line_no);
    return report;
}

FaultDice obtain_dice(const ExecutionSlice& slice1, const ExecutionSlice& slice2) {
    FaultDice dice;
    for (const auto& line : slice1.lines) {
        if (!slice2.lines.count(line)) dice.lines.insert(line);
    }
    return dice;
}

namespace {

const TranslationUnit* tu_for_file(const std::vector<const TranslationUnit*>& tus,
                                   const std::string& file) {
    for (const TranslationUnit* tu : tus) {
        if (tu->file == file) return tu;
    }
    return nullptr;
}

std::optional<std::pair<std::string, std::string>> find_faulty_member(
    const std::vector<const TranslationUnit*>& tus, const SourceLocation& site) {
    const TranslationUnit* tu = tu_for_file(tus, site.file);
    if (!tu) return std::nullopt;
    // Prefer the MemberExpr whose column matches the report; else the leftmost.
    const AstNode* best = nullptr;
    for (const AstNode& n : tu->nodes) {
        if (n.kind != NodeKind::MemberExpr || n.loc.line != site.line) continue;
        if (n.object_record.empty()) continue;
        if (n.loc.column == site.column) {
            best = &n;
            break;
        }
        if (!best || n.loc.column < best->loc.column) best = &n;
    }
    if (!best) return std::nullopt;
    return std::make_pair(best->object_record, best->name);
}

} // namespace

FaultLocus localize_failure(const CorpusEntry& crash_entry, const FuzzCorpus& corpus,
                            const std::vector<const TranslationUnit*>& tus) {
    if (!crash_entry.crash)
        throw EmptyDice("entry '" + crash_entry.id + "' did not crash");

    std::optional<CrashReport> report;
    if (crash_entry.report_path)
        report = parse_crash_report(read_file(*crash_entry.report_path));

    FaultLocus locus;
    if (report) {
        locus.crash_kind = report->kind;
        locus.stack = report->stack;
        locus.focus_function = {report->stack[0].file, report->stack[0].function};
    }

    bool overflow = report && (report->kind == CrashKind::BufferOverflowRead ||
                               report->kind == CrashKind::BufferOverflowWrite);
    if (overflow) {
        locus.report_based = true;
        locus.lines.insert({report->stack[0].file, report->stack[0].line});
        locus.faulty_member = find_faulty_member(tus, report->site);
        return locus;
    }

    // Differential dicing against the nearest non-crashing ancestor.
    std::optional<FaultDice> dice;
    try {
        const CorpusEntry& parent = obtain_parent_mutation(crash_entry, corpus);
        dice = obtain_dice(obtain_slice(crash_entry), obtain_slice(parent));
    } catch (const NoParent&) {
        dice.reset();
    }
    if (dice) {
        // Keep application code only; harness scaffolding has no TU.
        for (auto it = dice->lines.begin(); it != dice->lines.end();) {
            if (!tu_for_file(tus, it->first))
                it = dice->lines.erase(it);
            else
                ++it;
        }
    }

    if (dice && !dice->lines.empty()) {
        locus.report_based = false;
        locus.lines = std::move(dice->lines);
        return locus;
    }
    if (report) {
        // Empty dice but the sanitizer still pinned the crash site.
        locus.report_based = true;
        locus.lines.insert({report->stack[0].file, report->stack[0].line});
        return locus;
    }
    throw EmptyDice("entry '" + crash_entry.id +
                    "': dice is empty and no crash report is available");
}

std::string render_locus(const FaultLocus& locus) {
    std::string out = "locus (";
    out += locus.report_based ? "report-based" : "dice-based";
    out += "): kind=";
    out += to_string(locus.crash_kind);
    out += " focus=" + locus.focus_function.file + ":" + locus.focus_function.function;
    out += " lines=[";
    bool first = true;
    for (const auto& [file, line] : locus.lines) {
        if (!first) out += ",";
        first = false;
        out += file + ":" + std::to_string(line);
    }
    out += "]";
    if (locus.faulty_member)
        out += " member=" + locus.faulty_member->first + "." + locus.faulty_member->second;
    return out;
}

} // namespace vx
