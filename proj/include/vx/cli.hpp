#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vx/matcher.hpp"
#include "vx/report.hpp"
#include "vx/taint.hpp"

namespace vx {

enum class OutputFormat { Text, Json };

struct ExploreConfig {
    std::vector<std::string> sources;
    std::string manifest;
    std::string entry = "parse";
    TemplateRule template_rule = TemplateRule::Auto;
    std::vector<std::string> sinks = default_sinks();
    bool semantic = false;
    OutputFormat output = OutputFormat::Text;
    int jobs = 1;
};

struct ExploreOutcome {
    std::vector<std::unique_ptr<TranslationUnit>> tus;
    ExploreReport report;

    std::vector<const TranslationUnit*> tu_ptrs() const {
        std::vector<const TranslationUnit*> out;
        for (const auto& tu : tus) out.push_back(tu.get());
        return out;
    }
};

// The whole pipeline: load corpus, localize each distinct crash, derive and
// match templates, optionally add semantic matches, rank against the
// coverset.
ExploreOutcome run_explore(const ExploreConfig& config);

// Exit codes: 0 ok, 77 crash replayed, 1 tool error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace vx
