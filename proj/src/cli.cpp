#include "vx/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "vx/diag.hpp"
#include "vx/interp.hpp"
#include "vx/parser.hpp"
#include "vx/rank.hpp"

namespace fs = std::filesystem;

namespace vx {

namespace {

std::vector<uint8_t> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string s = buf.str();
    return std::vector<uint8_t>(s.begin(), s.end());
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

TemplateRule rule_from_string(const std::string& text) {
    if (text == "auto") return TemplateRule::Auto;
    if (text == "member") return TemplateRule::Member;
    if (text == "call") return TemplateRule::Call;
    if (text == "declref") return TemplateRule::DeclRef;
    throw Error("cli", "unknown template rule '" + text + "'");
}

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

RunResult run_program(const std::vector<std::unique_ptr<TranslationUnit>>& tus,
                      const std::string& entry, const std::vector<uint8_t>& input) {
    std::vector<const TranslationUnit*> extra;
    for (size_t i = 1; i < tus.size(); i++) extra.push_back(tus[i].get());
    return execute(*tus[0], extra, input, entry);
}

// ---------------------------------------------------------------------------
// explore pipeline

void flag_known_site(MatchSet& matches, const CrashReport& report,
                     const std::pair<std::string, int>& known_line) {
    (void)report;
    for (Match& match : matches.matches) {
        if (match.loc.file == known_line.first && match.loc.line <= known_line.second &&
            match.end_loc.line >= known_line.second)
            match.known = true;
    }
}

MatchSet union_matches(const MatchSet& a, const MatchSet& b) {
    MatchSet out;
    out.matches = a.matches;
    out.matches.insert(out.matches.end(), b.matches.begin(), b.matches.end());
    std::sort(out.matches.begin(), out.matches.end(), [](const Match& x, const Match& y) {
        return std::tie(x.loc.file, x.loc.line, x.loc.column, x.node_id) <
               std::tie(y.loc.file, y.loc.line, y.loc.column, y.node_id);
    });
    std::vector<Match> dedup;
    for (Match& match : out.matches) {
        if (!dedup.empty() && dedup.back().loc.file == match.loc.file &&
            dedup.back().node_id == match.node_id) {
            dedup.back().known = dedup.back().known || match.known;
        } else {
            dedup.push_back(std::move(match));
        }
    }
    out.matches = std::move(dedup);
    return out;
}

} // namespace

ExploreOutcome run_explore(const ExploreConfig& config) {
    ExploreOutcome outcome;
    outcome.tus = parse_program(config.sources);
    std::vector<const TranslationUnit*> tus = outcome.tu_ptrs();

    FuzzCorpus corpus = load_corpus(config.manifest);
    Coverset coverset = compute_coverset(corpus);

    // One section per distinct crash; entries are id-sorted so the
    // representative choice does not depend on manifest line order.
    using DedupKey = std::tuple<std::string, std::string, std::string, int>;
    std::map<DedupKey, const CorpusEntry*> crashes;
    std::map<DedupKey, CrashReport> reports;
    for (const auto& [id, entry] : corpus.entries) {
        if (!entry.crash || !entry.report_path) continue;
        CrashReport report = parse_crash_report(read_text(*entry.report_path));
        DedupKey key{to_string(report.kind), report.stack[0].file,
                     report.stack[0].function, report.site.line};
        if (!crashes.count(key)) {
            crashes[key] = &entry;
            reports[key] = std::move(report);
        }
    }

    for (const auto& [key, entry] : crashes) {
        CrashSection section;
        section.entry_id = entry->id;
        section.report = reports[key];
        bool overflow = section.report.kind == CrashKind::BufferOverflowRead ||
                        section.report.kind == CrashKind::BufferOverflowWrite;
        try {
            section.locus = localize_failure(*entry, corpus, tus);
            MatcherExpr syntactic =
                derive_syntactic_template(tus, section.locus, config.template_rule);
            section.syntactic_template = render_matcher(syntactic);
            section.matches = match_template(tus, syntactic, config.jobs);

            std::pair<std::string, int> known_line{section.report.stack[0].file,
                                                   section.report.stack[0].line};
            flag_known_site(section.matches, section.report, known_line);

            section.semantic =
                config.semantic || section.report.kind == CrashKind::AssertionFailure;
            if (section.semantic) {
                MatchSet callsites = callsite_matches(section.report, tus);
                MatcherExpr callee_matcher = parse_matcher(
                    "callExpr(callee(\"" + section.report.stack[0].function + "\"))");
                section.callsite_template = render_matcher(callee_matcher);
                section.matches = union_matches(section.matches, callsites);
                if (overflow && section.locus.faulty_member) {
                    section.taint = taint_scan(tus, section.locus.faulty_member->first,
                                               config.sinks);
                }
            }

            section.ranked = rank_matches(section.matches, coverset);
            for (const Match& match : section.matches.matches) {
                if (!match.known) section.explored++;
            }
            for (const Match& match : section.ranked.high) {
                if (!match.known) section.ranked_high++;
            }
        } catch (const EmptyDice& e) {
            section.unlocalized = true;
            section.unlocalized_reason = e.what();
        } catch (const NoAnchor& e) {
            section.unlocalized = true;
            section.unlocalized_reason = e.what();
        }
        outcome.report.sections.push_back(std::move(section));
    }
    return outcome;
}

namespace {

int cmd_run(const std::vector<std::string>& sources, const std::string& entry,
            const std::string& input_path, std::string trace_path, std::string report_path,
            std::ostream& out) {
    auto tus = parse_program(sources);
    RunResult result = run_program(tus, entry, read_bytes(input_path));
    if (trace_path.empty()) trace_path = input_path + ".trace";
    write_trace(result, trace_path);
    if (result.crashed()) {
        if (report_path.empty()) report_path = input_path + ".report";
        write_report(*result.crash, report_path);
        out << "crash: " << to_string(result.crash->kind) << " at "
            << to_string(result.crash->site) << "\n";
        return 77;
    }
    out << "ok exit=" << result.exit_value << "\n";
    return 0;
}

int cmd_replay(const std::string& manifest, const std::vector<std::string>& sources,
               const std::string& entry, std::ostream& out, std::ostream& err) {
    auto tus = parse_program(sources);
    FuzzCorpus corpus = load_corpus(manifest);
    fs::path base = fs::path(manifest).parent_path();
    fs::create_directories(base / "traces");
    fs::create_directories(base / "reports");

    int failures = 0;
    for (auto& [id, entry_ref] : corpus.entries) {
        try {
            RunResult result = run_program(tus, entry, read_bytes(entry_ref.input_path));
            entry_ref.trace_path = (base / "traces" / (id + ".trace")).string();
            write_trace(result, entry_ref.trace_path);
            if (result.crashed()) {
                entry_ref.crash = true;
                entry_ref.report_path = (base / "reports" / (id + ".report")).string();
                write_report(*result.crash, *entry_ref.report_path);
            } else {
                entry_ref.crash = false;
                entry_ref.report_path.reset();
            }
        } catch (const Error& e) {
            err << "error: " << e.module_name() << ": entry '" << id << "': " << e.what()
                << "\n";
            failures++;
        }
    }
    write_manifest(corpus, manifest);
    out << "replayed=" << corpus.entries.size() - failures << " failed=" << failures << "\n";
    return failures ? 1 : 0;
}

int cmd_localize(const std::string& manifest, const std::vector<std::string>& sources,
                 std::ostream& out) {
    auto owned = parse_program(sources);
    std::vector<const TranslationUnit*> tus;
    for (const auto& tu : owned) tus.push_back(tu.get());
    FuzzCorpus corpus = load_corpus(manifest);
    for (const auto& [id, entry] : corpus.entries) {
        if (!entry.crash) continue;
        try {
            out << id << ": " << render_locus(localize_failure(entry, corpus, tus)) << "\n";
        } catch (const EmptyDice& e) {
            out << id << ": unlocalized: " << e.what() << "\n";
        }
    }
    return 0;
}

int cmd_derive(const std::string& manifest, const std::vector<std::string>& sources,
               TemplateRule rule, std::ostream& out) {
    auto owned = parse_program(sources);
    std::vector<const TranslationUnit*> tus;
    for (const auto& tu : owned) tus.push_back(tu.get());
    FuzzCorpus corpus = load_corpus(manifest);
    for (const auto& [id, entry] : corpus.entries) {
        if (!entry.crash) continue;
        try {
            FaultLocus locus = localize_failure(entry, corpus, tus);
            out << id << ": " << render_matcher(derive_syntactic_template(tus, locus, rule))
                << "\n";
        } catch (const EmptyDice& e) {
            out << id << ": unlocalized: " << e.what() << "\n";
        } catch (const NoAnchor& e) {
            out << id << ": unlocalized: " << e.what() << "\n";
        }
    }
    return 0;
}

int cmd_match(const std::vector<std::string>& sources, const std::string& matcher_text,
              int jobs, std::ostream& out) {
    auto owned = parse_program(sources);
    std::vector<const TranslationUnit*> tus;
    for (const auto& tu : owned) tus.push_back(tu.get());
    MatchSet set = match_template(tus, parse_matcher(matcher_text), jobs);
    int index = 1;
    for (const Match& match : set.matches) out << render_match_block(index++, match, tus);
    out << "matches=" << set.matches.size() << "\n";
    return 0;
}

int cmd_rank(const std::vector<std::string>& sources, const std::string& matcher_text,
             const std::string& manifest, std::ostream& out) {
    auto owned = parse_program(sources);
    std::vector<const TranslationUnit*> tus;
    for (const auto& tu : owned) tus.push_back(tu.get());
    MatchSet set = match_template(tus, parse_matcher(matcher_text));
    Coverset coverset = compute_coverset(load_corpus(manifest));
    RankedMatches ranked = rank_matches(set, coverset);
    out << "ranked high:\n";
    for (const Match& m : ranked.high)
        out << "  " << to_string(m.loc) << " in " << m.enclosing_function.function << "\n";
    out << "ranked low:\n";
    for (const Match& m : ranked.low)
        out << "  " << to_string(m.loc) << " in " << m.enclosing_function.function << "\n";
    out << "high=" << ranked.high.size() << " low=" << ranked.low.size() << "\n";
    return 0;
}

int cmd_dump_ast(const std::vector<std::string>& sources, std::ostream& out) {
    auto owned = parse_program(sources);
    for (const auto& tu : owned) out << dump_ast(*tu);
    return 0;
}

int cmd_explore(const ExploreConfig& config, std::ostream& out) {
    ExploreOutcome outcome = run_explore(config);
    std::vector<const TranslationUnit*> tus = outcome.tu_ptrs();
    if (config.output == OutputFormat::Json)
        out << render_report_json(outcome.report, tus);
    else
        out << render_report_text(outcome.report, tus);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"static exploration of fuzzer-discovered vulnerabilities"};
    app.require_subcommand(1);

    std::vector<std::string> sources;
    std::string entry = "parse";
    std::string manifest;
    std::string input_path;
    std::string trace_path;
    std::string report_path;
    std::string matcher_text;
    std::string format = "text";
    std::string template_rule = "auto";
    std::string sinks_text = "memcpy,strcpy";
    bool semantic = false;
    int jobs = 1;

    auto add_sources = [&](CLI::App* cmd) {
        cmd->add_option("--sources", sources, "MiniC source files")->required();
    };

    CLI::App* run = app.add_subcommand("run", "execute one input and write its trace");
    add_sources(run);
    run->add_option("--entry", entry, "entry function");
    run->add_option("--input", input_path, "input file")->required();
    run->add_option("--trace-out", trace_path, "trace output path");
    run->add_option("--report-out", report_path, "crash report output path");

    CLI::App* replay = app.add_subcommand("replay", "re-run a whole corpus");
    add_sources(replay);
    replay->add_option("--entry", entry, "entry function");
    replay->add_option("--manifest", manifest, "corpus manifest")->required();

    CLI::App* localize = app.add_subcommand("localize", "print fault loci for crashes");
    add_sources(localize);
    localize->add_option("--manifest", manifest, "corpus manifest")->required();

    CLI::App* derive = app.add_subcommand("derive", "print derived templates for crashes");
    add_sources(derive);
    derive->add_option("--manifest", manifest, "corpus manifest")->required();
    derive->add_option("--template-rule", template_rule, "auto|member|call|declref");

    CLI::App* match = app.add_subcommand("match", "run a matcher over the sources");
    add_sources(match);
    match->add_option("--matcher", matcher_text, "matcher DSL expression")->required();
    match->add_option("--jobs", jobs, "worker threads");

    CLI::App* rank = app.add_subcommand("rank", "match and rank against the coverset");
    add_sources(rank);
    rank->add_option("--matcher", matcher_text, "matcher DSL expression")->required();
    rank->add_option("--manifest", manifest, "corpus manifest")->required();

    CLI::App* explore = app.add_subcommand("explore", "full pipeline over a corpus");
    add_sources(explore);
    explore->add_option("--manifest", manifest, "corpus manifest")->required();
    explore->add_option("--format", format, "text|json");
    explore->add_option("--template-rule", template_rule, "auto|member|call|declref");
    explore->add_option("--sinks", sinks_text, "comma-separated sink names");
    explore->add_flag("--semantic", semantic, "always add semantic matching");
    explore->add_option("--jobs", jobs, "worker threads");

    CLI::App* dump = app.add_subcommand("dump-ast", "print the typed AST");
    add_sources(dump);

    std::vector<std::string> argv = {"vexplore"};
    argv.insert(argv.end(), args.begin(), args.end());
    std::vector<const char*> raw;
    for (const std::string& a : argv) raw.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(raw.size()), raw.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (run->parsed())
            return cmd_run(sources, entry, input_path, trace_path, report_path, out);
        if (replay->parsed()) return cmd_replay(manifest, sources, entry, out, err);
        if (localize->parsed()) return cmd_localize(manifest, sources, out);
        if (derive->parsed())
            return cmd_derive(manifest, sources, rule_from_string(template_rule), out);
        if (match->parsed()) return cmd_match(sources, matcher_text, jobs, out);
        if (rank->parsed()) return cmd_rank(sources, matcher_text, manifest, out);
        if (dump->parsed()) return cmd_dump_ast(sources, out);
        if (explore->parsed()) {
            ExploreConfig config;
            config.sources = sources;
            config.manifest = manifest;
            config.entry = entry;
            config.template_rule = rule_from_string(template_rule);
            config.sinks = split_commas(sinks_text);
            config.semantic = semantic;
            config.output = format == "json" ? OutputFormat::Json : OutputFormat::Text;
            config.jobs = jobs;
            return cmd_explore(config, out);
        }
    } catch (const Error& e) {
        err << "error: " << e.module_name() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: cli: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

} // namespace vx
