#pragma once

#include <memory>
#include <vector>

#include "vx/ast.hpp"
#include "vx/lexer.hpp"

namespace vx {

TranslationUnit parse(const std::vector<Token>& tokens, const std::string& file);

// Annotates MemberExpr / DeclRefExpr nodes with types, computes record byte
// offsets. `includes` supplies record declarations from other files.
void resolve_types(TranslationUnit& tu,
                   const std::vector<const TranslationUnit*>& includes = {});

// tokenize + expand_macros + parse + resolve_types over a source string.
TranslationUnit parse_source(const std::string& source_text, const std::string& file,
                             const std::vector<const TranslationUnit*>& includes = {});

// Reads the file from disk and parses it.
TranslationUnit parse_file(const std::string& path,
                           const std::vector<const TranslationUnit*>& includes = {});

// Parses every file, then resolves each against the records of all others.
std::vector<std::unique_ptr<TranslationUnit>> parse_program(
    const std::vector<std::string>& paths);

} // namespace vx
