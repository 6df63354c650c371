// Acceptance gate: one pass/fail line per criterion, exit 0 only when all
// seven hold. Each criterion is checked against independent oracles, never
// against the implementation's own intermediate results.

#include <chrono>
#include <functional>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

#include "vx/cli.hpp"
#include "vx/corpus.hpp"
#include "vx/interp.hpp"
#include "vx/localize.hpp"
#include "vx/parser.hpp"
#include "vx/rank.hpp"
#include "vx/taint.hpp"

#include "helpers.hpp"
#include "matcher_oracle.hpp"

using namespace vx;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool ok, const std::string& what) {
    std::cout << (ok ? "PASS" : "FAIL") << ": criterion " << criterion << " — " << what
              << "\n";
    if (!ok) g_failures++;
}

#define EXPECT(cond)                                                     \
    do {                                                                 \
        if (!(cond)) {                                                   \
            std::cout << "  check failed: " #cond " (" << __FILE__ << ":" \
                      << __LINE__ << ")\n";                              \
            ok = false;                                                  \
        }                                                                \
    } while (0)

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// chdir into a scratch copy and regenerate traces/reports with paths relative
// to it, so manifest paths and source locations agree byte-for-byte.
void enter_and_replay(const std::string& fixture, const std::string& tag,
                      const std::string& source) {
    fs::current_path(testutil::copy_fixture(fixture, tag));
    std::string out, err;
    if (testutil::cli({"replay", "--sources", source, "--manifest", "manifest.jsonl"}, &out,
                      &err) != 0)
        throw std::runtime_error("fixture replay failed: " + err);
}

std::vector<const TranslationUnit*> ptrs(
    const std::vector<std::unique_ptr<TranslationUnit>>& tus) {
    std::vector<const TranslationUnit*> out;
    for (const auto& tu : tus) out.push_back(tu.get());
    return out;
}

// ---------------------------------------------------------------------- 1

void criterion1() {
    bool ok = true;
    auto start = std::chrono::steady_clock::now();

    enter_and_replay("motivating", "accept1", "test.mc");

    // (a) the dice is exactly the fuzzed abort line
    FuzzCorpus corpus = load_corpus("manifest.jsonl");
    ExecutionSlice crash = obtain_slice(corpus.entries.at("doom"));
    ExecutionSlice parent = obtain_slice(corpus.entries.at("doo"));
    FaultDice dice = obtain_dice(crash, parent);
    std::set<std::pair<std::string, int>> want_dice = {{"test.mc", 9}};
    EXPECT(dice.lines == want_dice);

    // (b) the derived call template matches exactly two sites
    ExploreConfig config;
    config.sources = {"test.mc"};
    config.manifest = "manifest.jsonl";
    ExploreOutcome outcome = run_explore(config);
    EXPECT(outcome.report.sections.size() == 1);
    const CrashSection& section = outcome.report.sections[0];
    EXPECT(section.syntactic_template == "exprStmt(callExpr(callee(\"abort\")))");
    EXPECT(section.matches.matches.size() == 2);

    // (c) the hash-guarded macro site ranks high, the fuzzed site low
    EXPECT(section.ranked.high.size() == 1);
    EXPECT(section.ranked.low.size() == 1);
    if (!section.ranked.high.empty()) {
        EXPECT(section.ranked.high[0].loc.line == 17);
        EXPECT(section.ranked.high[0].enclosing_function.function == "check_hash");
        EXPECT(!section.ranked.high[0].known);
    }
    if (!section.ranked.low.empty()) {
        EXPECT(section.ranked.low[0].loc.line == 9);
        EXPECT(section.ranked.low[0].known);
    }

    double elapsed = seconds_since(start);
    EXPECT(elapsed < 1.0);
    report(1, ok, "motivating example: dice {line 9}, 2 template matches, hidden site high");
}

// ---------------------------------------------------------------------- 2

void criterion2() {
    bool ok = true;
    auto start = std::chrono::steady_clock::now();

    enter_and_replay("udp", "accept2", "udp.mc");

    ExploreConfig config;
    config.sources = {"udp.mc"};
    config.manifest = "manifest.jsonl";
    ExploreOutcome outcome = run_explore(config);
    EXPECT(outcome.report.sections.size() == 1);
    const CrashSection& section = outcome.report.sections[0];
    EXPECT(section.syntactic_template ==
           "declStmt(hasDescendant(memberExpr(member(\"udp_len\"), objectType(\"struct udp_header\"))))");
    EXPECT(section.matches.matches.size() == 3);
    int known = 0;
    for (const Match& m : section.matches.matches) known += m.known ? 1 : 0;
    EXPECT(known == 1);
    EXPECT(section.explored == 2);
    EXPECT(section.ranked_high == 2);

    double elapsed = seconds_since(start);
    EXPECT(elapsed < 1.0);
    report(2, ok, "udp fixture: canonical template, 3 matches / 1 known, explored=2 high=2");
}

// ---------------------------------------------------------------------- 3

void criterion3() {
    bool ok = true;

    // dice algebra over 1,000 random slice pairs
    {
        std::mt19937 rng(31);
        auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
        for (int i = 0; i < 1000 && ok; i++) {
            ExecutionSlice a, b;
            for (int k = pick(40); k > 0; k--) a.lines.insert({"f.mc", 1 + pick(60)});
            for (int k = pick(40); k > 0; k--) b.lines.insert({"f.mc", 1 + pick(60)});
            FaultDice d = obtain_dice(a, b);
            for (const auto& l : d.lines) {
                EXPECT(a.lines.count(l) == 1);
                EXPECT(b.lines.count(l) == 0);
            }
            for (const auto& l : a.lines) {
                EXPECT(d.lines.count(l) == (b.lines.count(l) ? 0u : 1u));
            }
            EXPECT(obtain_dice(a, a).lines.empty());
        }
    }

    // matcher engine vs. brute-force oracle, 200 random trees per fixture TU
    auto tus = parse_program({
        (testutil::fixture_dir() / "motivating" / "test.mc").string(),
        (testutil::fixture_dir() / "udp" / "udp.mc").string(),
        (testutil::fixture_dir() / "taint" / "guarded.mc").string(),
        (testutil::fixture_dir() / "taint" / "unguarded.mc").string(),
    });
    {
        testutil::MatcherGen gen(32);
        for (int i = 0; i < 200 && ok; i++) {
            MatcherExpr m = gen.gen(3, std::nullopt);
            for (const auto& tu : tus) {
                std::vector<int> expect = testutil::oracle_match_ids(*tu, m);
                std::vector<int> got;
                for (const Match& match : match_template({tu.get()}, m).matches)
                    got.push_back(match.node_id);
                std::sort(got.begin(), got.end());
                EXPECT(got == expect);
            }
        }
    }

    // rank partition / monotonicity / idempotence over 1,000 random pairs
    {
        std::mt19937 rng(33);
        auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
        for (int i = 0; i < 1000 && ok; i++) {
            MatchSet set;
            for (int k = pick(15); k > 0; k--) {
                Match m;
                m.loc = {"f.mc", k, 1};
                m.enclosing_function = {"f.mc", "fn" + std::to_string(pick(5))};
                set.matches.push_back(std::move(m));
            }
            Coverset cov;
            for (int k = pick(5); k > 0; k--)
                cov.functions.insert({"f.mc", "fn" + std::to_string(pick(5))});
            RankedMatches r = rank_matches(set, cov);
            EXPECT(r.high.size() + r.low.size() == set.matches.size());
            for (const Match& m : r.high) EXPECT(!cov.contains(m.enclosing_function));
            for (const Match& m : r.low) EXPECT(cov.contains(m.enclosing_function));
            MatchSet high_again;
            high_again.matches = r.high;
            EXPECT(rank_matches(high_again, cov).high == r.high);
            if (!r.high.empty()) {
                Coverset grown = cov;
                grown.functions.insert(r.high[0].enclosing_function);
                EXPECT(rank_matches(set, grown).high.size() < r.high.size());
            }
        }
    }

    // dominators on every fixture CFG vs. path enumeration
    for (const auto& tu : tus) {
        for (const auto& [name, fn_id] : tu->functions) {
            Cfg cfg = build_cfg(*tu, fn_id);
            EXPECT(cfg.blocks.size() <= 8);
            for (const BasicBlock& block : cfg.blocks) {
                // all acyclic entry->block paths
                std::vector<std::vector<int>> paths;
                std::vector<int> stack = {cfg.entry};
                std::function<void(int)> dfs = [&](int cur) {
                    if (cur == block.id) {
                        paths.push_back(stack);
                        return;
                    }
                    for (int s : cfg.successors(cur)) {
                        if (std::find(stack.begin(), stack.end(), s) != stack.end()) continue;
                        stack.push_back(s);
                        dfs(s);
                        stack.pop_back();
                    }
                };
                dfs(cfg.entry);
                if (paths.empty()) continue;
                std::set<int> doms(paths[0].begin(), paths[0].end());
                for (size_t p = 1; p < paths.size(); p++) {
                    std::set<int> nodes(paths[p].begin(), paths[p].end()), keep;
                    std::set_intersection(doms.begin(), doms.end(), nodes.begin(),
                                          nodes.end(), std::inserter(keep, keep.end()));
                    doms = std::move(keep);
                }
                std::set<int> chain = {block.id};
                int cur = block.id;
                while (cfg.idom.count(cur)) {
                    cur = cfg.idom.at(cur);
                    chain.insert(cur);
                }
                EXPECT(chain == doms);
            }
        }
    }

    // taint guard separation on the fixture pair
    {
        auto unguarded =
            parse_program({(testutil::fixture_dir() / "taint" / "unguarded.mc").string()});
        auto guarded =
            parse_program({(testutil::fixture_dir() / "taint" / "guarded.mc").string()});
        TaintScanResult r1 = taint_scan(ptrs(unguarded), "struct udp_header", default_sinks());
        TaintScanResult r2 = taint_scan(ptrs(guarded), "struct udp_header", default_sinks());
        EXPECT(r1.findings.size() == 1);
        EXPECT(r1.guarded.empty());
        EXPECT(r2.findings.empty());
        EXPECT(r2.guarded.size() == 1);
    }

    report(3, ok, "property suites: dice algebra, matcher oracle, rank, dominators, taint");
}

// ---------------------------------------------------------------------- 4

void criterion4() {
    bool ok = true;
    std::mt19937 rng(41);
    auto pick = [&](int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); };
    std::vector<std::string> files = {"a.mc", "sub/dir/b.mc", "c_d.mc"};

    // trace round-trip: fixtures
    enter_and_replay("motivating", "accept4", "test.mc");
    for (const std::string name : {"doo", "doom"}) {
        std::string text = testutil::slurp("traces/" + name + ".trace");
        ExecutionSlice slice = parse_trace(text);
        // re-render from the parsed lines plus the F records in the file
        RunResult result;
        result.slice = slice;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("F ", 0) == 0) {
                std::istringstream fields(line);
                std::string tag, file, fn;
                fields >> tag >> file >> fn;
                result.functions.insert({file, fn});
            }
        }
        EXPECT(render_trace(result) == text);
    }
    // trace round-trip: 1,000 random instances
    for (int i = 0; i < 1000 && ok; i++) {
        RunResult result;
        for (int k = pick(30); k > 0; k--)
            result.slice.lines.insert({files[pick(3)], 1 + pick(500)});
        for (int k = pick(5); k > 0; k--)
            result.functions.insert({files[pick(3)], "fn" + std::to_string(pick(9))});
        ExecutionSlice parsed = parse_trace(render_trace(result));
        EXPECT(parsed.lines == result.slice.lines);
    }

    // crash-report round-trip: fixture + 1,000 random instances
    {
        std::string text = testutil::slurp("reports/doom.report");
        EXPECT(render_report(parse_crash_report(text)) == text);
        std::vector<CrashKind> kinds = {CrashKind::Abort, CrashKind::AssertionFailure,
                                        CrashKind::BufferOverflowRead,
                                        CrashKind::BufferOverflowWrite};
        for (int i = 0; i < 1000 && ok; i++) {
            CrashReport r;
            r.kind = kinds[pick(4)];
            r.site = {files[pick(3)], 1 + pick(5000), 1 + pick(200)};
            for (int f = 0, depth = 1 + pick(6); f < depth; f++)
                r.stack.push_back({"fn" + std::to_string(pick(30)), files[pick(3)],
                                   1 + pick(5000), 1 + pick(200)});
            EXPECT(parse_crash_report(render_report(r)) == r);
        }
    }

    // matcher render/parse round-trip: canonical fixtures + 1,000 random trees
    {
        for (const std::string text : {
                 "exprStmt(callExpr(callee(\"abort\")))",
                 "declStmt(hasDescendant(memberExpr(member(\"udp_len\"), objectType(\"struct udp_header\"))))",
             }) {
            EXPECT(render_matcher(parse_matcher(text)) == text);
        }
        testutil::MatcherGen gen(42);
        for (int i = 0; i < 1000 && ok; i++) {
            MatcherExpr m = gen.gen(3, std::nullopt);
            EXPECT(parse_matcher(render_matcher(m)) == m);
        }
    }

    report(4, ok, "round-trips: trace, crash report, matcher (fixtures + 1000 random each)");
}

// ---------------------------------------------------------------------- 5

void criterion5() {
    bool ok = true;
    for (const auto& [fixture, source] :
         std::vector<std::pair<std::string, std::string>>{{"motivating", "test.mc"},
                                                          {"udp", "udp.mc"}}) {
        enter_and_replay(fixture, "accept5_" + fixture, source);
        std::string first;
        testutil::cli({"explore", "--sources", source, "--manifest", "manifest.jsonl"},
                      &first);
        for (int i = 0; i < 2; i++) {
            std::string again;
            testutil::cli({"explore", "--sources", source, "--manifest", "manifest.jsonl"},
                          &again);
            EXPECT(again == first);
        }
        std::string parallel;
        testutil::cli({"explore", "--sources", source, "--manifest", "manifest.jsonl",
                       "--jobs", "8"},
                      &parallel);
        EXPECT(parallel == first);
    }
    report(5, ok, "explore is byte-identical across runs and thread counts");
}

// ---------------------------------------------------------------------- 6

void criterion6() {
    bool ok = true;
    fs::path source = testutil::fixture_dir() / "motivating" / "test.mc";
    auto tus = parse_program({source.string()});
    MatchSet set =
        match_template(ptrs(tus), parse_matcher("exprStmt(callExpr(callee(\"abort\")))"));
    bool template_hits_17 = false;
    for (const Match& m : set.matches) template_hits_17 |= m.loc.line == 17;
    EXPECT(template_hits_17);

    // the lexical scan a grep would do misses the macro-aliased site
    std::istringstream in(testutil::slurp(source));
    std::string line;
    int line_no = 0;
    bool grep_hits_17 = false, grep_hits_9 = false;
    while (std::getline(in, line)) {
        line_no++;
        if (line.find("abort(") == std::string::npos) continue;
        if (line_no == 17) grep_hits_17 = true;
        if (line_no == 9) grep_hits_9 = true;
    }
    EXPECT(grep_hits_9);
    EXPECT(!grep_hits_17);
    report(6, ok, "template matches the macro-aliased site a substring scan misses");
}

// ---------------------------------------------------------------------- 7

void criterion7() {
    bool ok = true;
    fs::path dir = testutil::copy_fixture("motivating", "accept7");
    fs::current_path(dir);

    // widen the corpus to 100 entries: 98 extra non-crashing inputs chained
    // onto the original pair
    std::ostringstream manifest;
    manifest << testutil::slurp("manifest.jsonl");
    for (int i = 0; i < 98; i++) {
        std::string id = "seed" + std::to_string(i);
        testutil::spit("corpus/" + id, "input-" + std::to_string(i));
        std::string parent = i == 0 ? "doo" : "seed" + std::to_string(i - 1);
        manifest << R"({"id":")" << id << R"(","parent_id":")" << parent
                 << R"(","input_path":"corpus/)" << id << R"(","trace_path":"traces/)" << id
                 << R"(.trace","crash":false,"report_path":null})"
                 << "\n";
    }
    testutil::spit("manifest.jsonl", manifest.str());
    testutil::cli({"replay", "--sources", "test.mc", "--manifest", "manifest.jsonl"});

    auto start = std::chrono::steady_clock::now();
    std::string out;
    int rc = testutil::cli({"explore", "--sources", "test.mc", "--manifest", "manifest.jsonl"},
                           &out);
    double elapsed = seconds_since(start);
    EXPECT(rc == 0);
    EXPECT(out.find("crashes=1") != std::string::npos);
    EXPECT(elapsed < 5.0);
    report(7, ok, "100-entry corpus explores in under 5 seconds");
}

} // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    if (g_failures) {
        std::cout << g_failures << " criteria failed\n";
        return 1;
    }
    std::cout << "all 7 criteria passed\n";
    return 0;
}
