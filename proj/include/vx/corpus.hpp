#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "vx/trace.hpp"

namespace vx {

struct CorpusEntry {
    std::string id;
    std::optional<std::string> parent_id;
    std::string input_path;
    std::string trace_path;
    bool crash = false;
    std::optional<std::string> report_path; // present iff crash
};

struct FuzzCorpus {
    std::map<std::string, CorpusEntry> entries;
};

struct FunctionKeyHash {
    size_t operator()(const FunctionKey& k) const {
        return std::hash<std::string>()(k.file) * 131 + std::hash<std::string>()(k.function);
    }
};

// Functions exercised by any corpus input; O(1) average membership.
struct Coverset {
    std::unordered_set<FunctionKey, FunctionKeyHash> functions;

    bool contains(const FunctionKey& key) const { return functions.count(key) > 0; }
};

// Manifest is JSON Lines, one entry per line, keys
// id, parent_id, input_path, trace_path, crash, report_path.
// Relative paths are resolved against the manifest's directory.
FuzzCorpus load_corpus(const std::string& manifest_path);

void write_manifest(const FuzzCorpus& corpus, const std::string& manifest_path);

ExecutionSlice obtain_slice(const CorpusEntry& entry);
ExecutionSlice parse_trace(const std::string& text);

std::set<FunctionKey> trace_functions(const CorpusEntry& entry);

// Nearest non-crashing ancestor; throws NoParent when none exists.
const CorpusEntry& obtain_parent_mutation(const CorpusEntry& entry, const FuzzCorpus& corpus);

Coverset compute_coverset(const FuzzCorpus& corpus);

} // namespace vx
