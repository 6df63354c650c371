#pragma once

#include <compare>
#include <set>
#include <string>
#include <utility>

namespace vx {

struct FunctionKey {
    std::string file;
    std::string function;

    auto operator<=>(const FunctionKey&) const = default;
};

// (file, line) pairs executed by one run.
struct ExecutionSlice {
    std::set<std::pair<std::string, int>> lines;
};

} // namespace vx
