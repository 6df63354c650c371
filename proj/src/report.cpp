#include "vx/report.hpp"

#include <json.hpp>

namespace vx {

namespace {

std::string source_line_text(const std::vector<const TranslationUnit*>& tus,
                             const SourceLocation& loc) {
    for (const TranslationUnit* tu : tus) {
        if (tu->file == loc.file) return tu->source_line(loc.line);
    }
    return "";
}

std::string location_list(const std::vector<Match>& matches) {
    std::string out;
    for (const Match& m : matches) {
        out += "  " + to_string(m.loc) + " in " + m.enclosing_function.function;
        if (m.known) out += " (known)";
        out += "\n";
    }
    return out;
}

} // namespace

std::string render_match_block(int index, const Match& match,
                               const std::vector<const TranslationUnit*>& tus) {
    std::string out = "Match #" + std::to_string(index) + ":\n";
    out += to_string(match.loc) + ": note: \"root\" binds here\n";
    out += source_line_text(tus, match.loc) + "\n";
    out += std::string(match.loc.column - 1, ' ') + "^\n";
    return out;
}

std::string render_report_text(const ExploreReport& report,
                               const std::vector<const TranslationUnit*>& tus) {
    std::string out = "explore report\n";
    if (report.sections.empty()) {
        out += "no crashes to explore\n";
        return out;
    }
    out += "crashes=" + std::to_string(report.sections.size()) + "\n";
    for (const CrashSection& section : report.sections) {
        const Frame& top = section.report.stack[0];
        out += "-- crash: kind=" + std::string(to_string(section.report.kind)) +
               " function=" + top.file + ":" + top.function +
               " line=" + std::to_string(top.line) + " --\n";
        if (section.unlocalized) {
            out += "unlocalized: " + section.unlocalized_reason + "\n";
            continue;
        }
        out += render_locus(section.locus) + "\n";
        out += "template: " + section.syntactic_template + "\n";
        if (section.semantic)
            out += "template: callsite " + section.callsite_template + "\n";
        int index = 1;
        for (const Match& match : section.matches.matches) {
            out += render_match_block(index, match, tus);
            if (match.known) out += "(known fuzzer-discovered site)\n";
            index++;
        }
        for (const TaintFinding& finding : section.taint.findings)
            out += render_taint_finding(finding) + "\n";
        if (!section.taint.guarded.empty())
            out += "taint: guarded=" + std::to_string(section.taint.guarded.size()) + "\n";
        out += "ranked high:\n" + location_list(section.ranked.high);
        out += "ranked low:\n" + location_list(section.ranked.low);
        out += "explored=" + std::to_string(section.explored) +
               " high=" + std::to_string(section.ranked_high) + "\n";
    }
    return out;
}

namespace {

nlohmann::ordered_json location_json(const SourceLocation& loc) {
    return {{"file", loc.file}, {"line", loc.line}, {"column", loc.column}};
}

nlohmann::ordered_json match_json(const Match& match) {
    nlohmann::ordered_json j;
    j["loc"] = location_json(match.loc);
    j["function"] = match.enclosing_function.function;
    j["snippet"] = match.snippet;
    j["known"] = match.known;
    return j;
}

} // namespace

std::string render_report_json(const ExploreReport& report,
                               const std::vector<const TranslationUnit*>& tus) {
    (void)tus;
    nlohmann::ordered_json root;
    root["crashes"] = report.sections.size();
    root["sections"] = nlohmann::ordered_json::array();
    for (const CrashSection& section : report.sections) {
        nlohmann::ordered_json j;
        const Frame& top = section.report.stack[0];
        j["kind"] = to_string(section.report.kind);
        j["function"] = top.file + ":" + top.function;
        j["line"] = top.line;
        if (section.unlocalized) {
            j["unlocalized"] = section.unlocalized_reason;
            root["sections"].push_back(std::move(j));
            continue;
        }
        j["locus"] = render_locus(section.locus);
        j["template"] = section.syntactic_template;
        if (section.semantic) j["callsite_template"] = section.callsite_template;
        j["matches"] = nlohmann::ordered_json::array();
        for (const Match& match : section.matches.matches)
            j["matches"].push_back(match_json(match));
        j["taint"] = nlohmann::ordered_json::array();
        for (const TaintFinding& finding : section.taint.findings) {
            j["taint"].push_back({{"loc", location_json(finding.sink_call)},
                                  {"sink", finding.sink_name},
                                  {"arg", finding.tainted_arg_index},
                                  {"source", finding.source_type}});
        }
        j["taint_guarded"] = section.taint.guarded.size();
        j["high"] = nlohmann::ordered_json::array();
        for (const Match& match : section.ranked.high) j["high"].push_back(match_json(match));
        j["low"] = nlohmann::ordered_json::array();
        for (const Match& match : section.ranked.low) j["low"].push_back(match_json(match));
        j["explored"] = section.explored;
        j["ranked_high"] = section.ranked_high;
        root["sections"].push_back(std::move(j));
    }
    return root.dump(2) + "\n";
}

} // namespace vx
