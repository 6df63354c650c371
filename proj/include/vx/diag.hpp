#pragma once

#include <stdexcept>
#include <string>

#include "vx/source.hpp"

namespace vx {

// Base for all tool-reported failures. `module_name` feeds the CLI's
// "error: <module>: <message>" diagnostic line.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string message, SourceLocation loc = {})
        : std::runtime_error(loc.file.empty() ? message
                                              : to_string(loc) + ": " + message),
          module_(std::move(module)),
          loc_(std::move(loc)) {}

    const std::string& module_name() const { return module_; }
    const SourceLocation& loc() const { return loc_; }

private:
    std::string module_;
    SourceLocation loc_;
};

struct LexError : Error {
    LexError(SourceLocation loc, std::string msg)
        : Error("frontend", std::move(msg), std::move(loc)) {}
};

struct MacroError : Error {
    MacroError(SourceLocation loc, std::string msg)
        : Error("frontend", std::move(msg), std::move(loc)) {}
};

struct ParseError : Error {
    ParseError(SourceLocation loc, std::string expected, std::string found)
        : Error("frontend", "expected " + expected + ", found " + found, std::move(loc)),
          expected(std::move(expected)),
          found(std::move(found)) {}
    std::string expected;
    std::string found;
};

struct TypeError : Error {
    TypeError(SourceLocation loc, std::string msg)
        : Error("frontend", std::move(msg), std::move(loc)) {}
};

struct RuntimeLimit : Error {
    explicit RuntimeLimit(std::string msg) : Error("interp", std::move(msg)) {}
};

struct UndefinedName : Error {
    UndefinedName(SourceLocation loc, std::string msg)
        : Error("interp", std::move(msg), std::move(loc)) {}
};

struct ManifestError : Error {
    explicit ManifestError(std::string msg) : Error("corpus", std::move(msg)) {}
};

struct TraceFormatError : Error {
    TraceFormatError(std::string msg, int line_no)
        : Error("corpus", msg + " (line " + std::to_string(line_no) + ")"),
          line_no(line_no) {}
    int line_no;
};

struct ReportFormatError : Error {
    ReportFormatError(std::string msg, int line_no)
        : Error("localize", msg + " (line " + std::to_string(line_no) + ")"),
          line_no(line_no) {}
    int line_no;
};

struct NoParent : Error {
    explicit NoParent(std::string msg) : Error("corpus", std::move(msg)) {}
};

struct EmptyDice : Error {
    explicit EmptyDice(std::string msg) : Error("localize", std::move(msg)) {}
};

struct DslError : Error {
    DslError(size_t offset, std::string msg)
        : Error("templates", msg + " (offset " + std::to_string(offset) + ")"),
          offset(offset) {}
    size_t offset;
};

struct NoAnchor : Error {
    explicit NoAnchor(std::string msg) : Error("templates", std::move(msg)) {}
};

struct UnknownRecord : Error {
    explicit UnknownRecord(std::string msg) : Error("semantic", std::move(msg)) {}
};

struct IoError : Error {
    explicit IoError(std::string msg) : Error("io", std::move(msg)) {}
};

} // namespace vx
