#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include <json.hpp>

#include "vx/cli.hpp"

#include "helpers.hpp"

using namespace vx;
using testutil::cli;
namespace fs = std::filesystem;

namespace {

fs::path enter_fixture(const std::string& name, const std::string& tag) {
    fs::path dir = testutil::copy_fixture(name, tag);
    fs::current_path(dir);
    return dir;
}

const std::string kMotivatingReport =
    "explore report\n"
    "crashes=1\n"
    "-- crash: kind=abort function=test.mc:parse line=9 --\n"
    "locus (dice-based): kind=abort focus=test.mc:parse lines=[test.mc:9]\n"
    "template: exprStmt(callExpr(callee(\"abort\")))\n"
    "Match #1:\n"
    "test.mc:9:9: note: \"root\" binds here\n"
    "        abort();\n"
    "        ^\n"
    "(known fuzzer-discovered site)\n"
    "Match #2:\n"
    "test.mc:17:9: note: \"root\" binds here\n"
    "        CUSTOM();\n"
    "        ^\n"
    "ranked high:\n"
    "  test.mc:17:9 in check_hash\n"
    "ranked low:\n"
    "  test.mc:9:9 in parse (known)\n"
    "explored=1 high=1\n";

} // namespace

TEST_CASE("run reports success and writes the trace beside the input") {
    enter_fixture("motivating", "cli_run_ok");
    std::string out;
    int rc = cli({"run", "--sources", "test.mc", "--input", "corpus/doo"}, &out);
    CHECK(rc == 0);
    CHECK(out == "ok exit=0\n");
    CHECK(fs::exists("corpus/doo.trace"));
    CHECK(!fs::exists("corpus/doo.report"));
}

TEST_CASE("run exits 77 on a crash and writes the report") {
    enter_fixture("motivating", "cli_run_crash");
    std::string out;
    int rc = cli({"run", "--sources", "test.mc", "--input", "corpus/doom"}, &out);
    CHECK(rc == 77);
    CHECK(out == "crash: abort at test.mc:9:9\n");
    CHECK(testutil::slurp("corpus/doom.report") ==
          "ERROR: MiniSan: abort at test.mc:9:9\n"
          "#0 in parse test.mc:9:9\n");
}

TEST_CASE("run honors explicit output paths") {
    enter_fixture("motivating", "cli_run_paths");
    std::string out;
    int rc = cli({"run", "--sources", "test.mc", "--input", "corpus/doom", "--trace-out",
                  "t.out", "--report-out", "r.out"},
                 &out);
    CHECK(rc == 77);
    CHECK(fs::exists("t.out"));
    CHECK(fs::exists("r.out"));
}

TEST_CASE("replay regenerates traces, reports, and the manifest") {
    enter_fixture("motivating", "cli_replay");
    std::string out;
    int rc = cli({"replay", "--sources", "test.mc", "--manifest", "manifest.jsonl"}, &out);
    CHECK(rc == 0);
    CHECK(out == "replayed=2 failed=0\n");
    CHECK(testutil::slurp("traces/doom.trace") ==
          "F test.mc parse\n"
          "L test.mc 4\n"
          "L test.mc 8\n"
          "L test.mc 9\n");
    CHECK(testutil::slurp("manifest.jsonl") ==
          R"({"id":"doo","parent_id":null,"input_path":"corpus/doo","trace_path":"traces/doo.trace","crash":false,"report_path":null})"
          "\n"
          R"({"id":"doom","parent_id":"doo","input_path":"corpus/doom","trace_path":"traces/doom.trace","crash":true,"report_path":"reports/doom.report"})"
          "\n");
}

TEST_CASE("localize and derive print per-crash lines") {
    enter_fixture("motivating", "cli_localize");
    cli({"replay", "--sources", "test.mc", "--manifest", "manifest.jsonl"});
    std::string out;
    CHECK(cli({"localize", "--sources", "test.mc", "--manifest", "manifest.jsonl"}, &out) == 0);
    CHECK(out ==
          "doom: locus (dice-based): kind=abort focus=test.mc:parse lines=[test.mc:9]\n");
    CHECK(cli({"derive", "--sources", "test.mc", "--manifest", "manifest.jsonl"}, &out) == 0);
    CHECK(out == "doom: exprStmt(callExpr(callee(\"abort\")))\n");
}

TEST_CASE("match prints the bit-exact block format") {
    enter_fixture("udp", "cli_match");
    std::string out;
    int rc = cli({"match", "--sources", "udp.mc", "--matcher",
                  "exprStmt(callExpr(callee(\"check_l4_udp\")))"},
                 &out);
    CHECK(rc == 0);
    CHECK(out ==
          "Match #1:\n"
          "udp.mc:17:9: note: \"root\" binds here\n"
          "        check_l4_udp(buf, len);\n"
          "        ^\n"
          "Match #2:\n"
          "udp.mc:27:5: note: \"root\" binds here\n"
          "    check_l4_udp(buf, len);\n"
          "    ^\n"
          "matches=2\n");
}

TEST_CASE("rank splits matches by coverset membership") {
    enter_fixture("udp", "cli_rank");
    cli({"replay", "--sources", "udp.mc", "--manifest", "manifest.jsonl"});
    std::string out;
    int rc = cli({"rank", "--sources", "udp.mc", "--manifest", "manifest.jsonl", "--matcher",
                  "exprStmt(callExpr(callee(\"check_l4_udp\")))"},
                 &out);
    CHECK(rc == 0);
    CHECK(out ==
          "ranked high:\n"
          "  udp.mc:27:5 in process_pinctrl\n"
          "ranked low:\n"
          "  udp.mc:17:9 in parse\n"
          "high=1 low=1\n");
}

TEST_CASE("dump-ast prints the typed tree") {
    enter_fixture("udp", "cli_dump");
    std::string out;
    CHECK(cli({"dump-ast", "--sources", "udp.mc"}, &out) == 0);
    CHECK(out.rfind("TranslationUnit udp.mc:1:1\n", 0) == 0);
    CHECK(out.find("name=udp_len type=short") != std::string::npos);
}

TEST_CASE("explore end-to-end text report is stable") {
    enter_fixture("motivating", "cli_explore");
    cli({"replay", "--sources", "test.mc", "--manifest", "manifest.jsonl"});
    std::string out;
    int rc = cli({"explore", "--sources", "test.mc", "--manifest", "manifest.jsonl"}, &out);
    CHECK(rc == 0);
    CHECK(out == kMotivatingReport);
}

TEST_CASE("explore output is deterministic and thread-count independent") {
    enter_fixture("motivating", "cli_determinism");
    cli({"replay", "--sources", "test.mc", "--manifest", "manifest.jsonl"});
    std::string first;
    cli({"explore", "--sources", "test.mc", "--manifest", "manifest.jsonl"}, &first);
    for (int i = 0; i < 2; i++) {
        std::string again;
        cli({"explore", "--sources", "test.mc", "--manifest", "manifest.jsonl"}, &again);
        CHECK(again == first);
    }
    std::string parallel;
    cli({"explore", "--sources", "test.mc", "--manifest", "manifest.jsonl", "--jobs", "4"},
        &parallel);
    CHECK(parallel == first);
}

TEST_CASE("explore json mirrors the text data with stable keys") {
    enter_fixture("udp", "cli_json");
    cli({"replay", "--sources", "udp.mc", "--manifest", "manifest.jsonl"});
    std::string out;
    int rc = cli({"explore", "--sources", "udp.mc", "--manifest", "manifest.jsonl",
                  "--format", "json"},
                 &out);
    CHECK(rc == 0);
    nlohmann::json j = nlohmann::json::parse(out);
    CHECK(j["crashes"] == 1);
    REQUIRE(j["sections"].size() == 1);
    const auto& s = j["sections"][0];
    CHECK(s["kind"] == "buffer-overflow-read");
    CHECK(s["template"] ==
          "declStmt(hasDescendant(memberExpr(member(\"udp_len\"), objectType(\"struct udp_header\"))))");
    CHECK(s["matches"].size() == 3);
    CHECK(s["matches"][0]["known"] == true);
    CHECK(s["explored"] == 2);
    CHECK(s["ranked_high"] == 2);
}

TEST_CASE("semantic exploration adds the callsite template") {
    enter_fixture("udp", "cli_semantic");
    cli({"replay", "--sources", "udp.mc", "--manifest", "manifest.jsonl"});
    std::string out;
    cli({"explore", "--sources", "udp.mc", "--manifest", "manifest.jsonl", "--semantic"},
        &out);
    CHECK(out.find("template: callsite callExpr(callee(\"check_l4_udp\"))") !=
          std::string::npos);
    CHECK(out.find("explored=3 high=3") != std::string::npos);
}

TEST_CASE("errors render as module-tagged lines on stderr with exit 1") {
    enter_fixture("motivating", "cli_errors");
    std::string out, err;
    CHECK(cli({"run", "--sources", "missing.mc", "--input", "corpus/doo"}, &out, &err) == 1);
    CHECK(err.rfind("error: io: ", 0) == 0);
    CHECK(cli({"match", "--sources", "test.mc", "--matcher", "bogus()"}, &out, &err) == 1);
    CHECK(err.rfind("error: templates: ", 0) == 0);
    CHECK(cli({"explore", "--sources", "test.mc", "--manifest", "nope.jsonl"}, &out, &err) ==
          1);
    CHECK(err.rfind("error: corpus: ", 0) == 0);
    testutil::spit("broken.mc", "int f( {\n");
    CHECK(cli({"dump-ast", "--sources", "broken.mc"}, &out, &err) == 1);
    CHECK(err.rfind("error: frontend: ", 0) == 0);
}

TEST_CASE("unknown flags and missing subcommands fail without crashing") {
    std::string out, err;
    CHECK(cli({}, &out, &err) != 0);
    CHECK(cli({"explore"}, &out, &err) != 0);
    CHECK(cli({"frobnicate"}, &out, &err) != 0);
}
