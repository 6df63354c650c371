#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vx/ast.hpp"
#include "vx/trace.hpp"

namespace vx {

enum class CrashKind {
    Abort,
    AssertionFailure,
    BufferOverflowRead,
    BufferOverflowWrite,
};

const char* to_string(CrashKind kind);
std::optional<CrashKind> crash_kind_from_string(const std::string& text);

struct Frame {
    std::string function;
    std::string file;
    int line = 0;
    int column = 0;

    bool operator==(const Frame&) const = default;
};

struct CrashReport {
    CrashKind kind = CrashKind::Abort;
    SourceLocation site;
    std::vector<Frame> stack; // index 0 = innermost

    bool operator==(const CrashReport&) const = default;
};

struct RunResult {
    std::optional<CrashReport> crash; // empty means ok
    long long exit_value = 0;
    ExecutionSlice slice;
    std::set<FunctionKey> functions;

    bool crashed() const { return crash.has_value(); }
};

// Interprets `entry(buf, len)` over the input bytes, tracing executed
// statement lines and entered functions. Reads and writes through
// input-derived pointers are bounds checked against the owning buffer.
RunResult execute(const TranslationUnit& tu,
                  const std::vector<const TranslationUnit*>& extra_tus,
                  const std::vector<uint8_t>& input, const std::string& entry);

std::string render_trace(const RunResult& result);
void write_trace(const RunResult& result, const std::string& path);

std::string render_report(const CrashReport& report);
void write_report(const CrashReport& report, const std::string& path);

} // namespace vx
