#pragma once

#include <compare>
#include <string>

namespace vx {

struct SourceLocation {
    std::string file;
    int line = 1;
    int column = 1;

    auto operator<=>(const SourceLocation&) const = default;
};

inline std::string to_string(const SourceLocation& loc) {
    return loc.file + ":" + std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

} // namespace vx
