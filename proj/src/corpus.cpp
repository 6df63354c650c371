#include "vx/corpus.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vx/diag.hpp"

namespace fs = std::filesystem;

namespace vx {

namespace {

std::string resolve_path(const fs::path& base, const std::string& path) {
    if (path.empty()) return path;
    fs::path p(path);
    if (p.is_absolute()) return p.lexically_normal().string();
    return (base / p).lexically_normal().string();
}

std::string relativize(const fs::path& base, const std::string& path) {
    std::error_code ec;
    fs::path rel = fs::path(path).lexically_relative(base);
    if (!rel.empty() && rel.native()[0] != '.') return rel.string();
    return path;
}

std::string read_file(const std::string& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(std::string("cannot open ") + what + ": " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

FuzzCorpus load_corpus(const std::string& manifest_path) {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw ManifestError("cannot open manifest: " + manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();

    FuzzCorpus corpus;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ManifestError("manifest line " + std::to_string(line_no) +
                                " is not valid JSON: " + e.what());
        }
        CorpusEntry entry;
        try {
            entry.id = obj.at("id").get<std::string>();
            if (!obj.at("parent_id").is_null())
                entry.parent_id = obj.at("parent_id").get<std::string>();
            entry.input_path = resolve_path(base, obj.at("input_path").get<std::string>());
            entry.trace_path = resolve_path(base, obj.at("trace_path").get<std::string>());
            entry.crash = obj.at("crash").get<bool>();
            if (!obj.at("report_path").is_null())
                entry.report_path = resolve_path(base, obj.at("report_path").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ManifestError("manifest line " + std::to_string(line_no) +
                                " is malformed: " + e.what());
        }
        if (entry.crash != entry.report_path.has_value())
            throw ManifestError("entry '" + entry.id +
                                "': report_path must be present exactly when crash is true");
        if (corpus.entries.count(entry.id))
            throw ManifestError("duplicate entry id '" + entry.id + "'");
        corpus.entries[entry.id] = std::move(entry);
    }
    if (corpus.entries.empty()) throw ManifestError("manifest has no entries");

    for (const auto& [id, entry] : corpus.entries) {
        if (entry.parent_id && !corpus.entries.count(*entry.parent_id))
            throw ManifestError("entry '" + id + "' has dangling parent '" +
                                *entry.parent_id + "'");
    }
    // Reject parent cycles so the ancestor walk always terminates.
    for (const auto& [id, entry] : corpus.entries) {
        std::set<std::string> seen = {id};
        const CorpusEntry* cur = &entry;
        while (cur->parent_id) {
            if (!seen.insert(*cur->parent_id).second)
                throw ManifestError("parent cycle through entry '" + id + "'");
            cur = &corpus.entries.at(*cur->parent_id);
        }
    }
    return corpus;
}

void write_manifest(const FuzzCorpus& corpus, const std::string& manifest_path) {
    fs::path base = fs::path(manifest_path).parent_path();
    std::ofstream out(manifest_path, std::ios::binary);
    if (!out) throw IoError("cannot write manifest: " + manifest_path);
    for (const auto& [id, entry] : corpus.entries) {
        nlohmann::ordered_json obj;
        obj["id"] = entry.id;
        if (entry.parent_id)
            obj["parent_id"] = *entry.parent_id;
        else
            obj["parent_id"] = nullptr;
        obj["input_path"] = relativize(base, entry.input_path);
        obj["trace_path"] = relativize(base, entry.trace_path);
        obj["crash"] = entry.crash;
        if (entry.report_path)
            obj["report_path"] = relativize(base, *entry.report_path);
        else
            obj["report_path"] = nullptr;
        out << obj.dump() << "\n";
    }
}

ExecutionSlice parse_trace(const std::string& text) {
    ExecutionSlice slice;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string tag, file, third;
        if (!(fields >> tag >> file >> third) || (tag != "L" && tag != "F"))
            throw TraceFormatError("malformed trace record '" + line + "'", line_no);
        if (tag == "L") {
            try {
                slice.lines.insert({file, std::stoi(third)});
            } catch (const std::exception&) {
                throw TraceFormatError("bad line number in '" + line + "'", line_no);
            }
        }
    }
    return slice;
}

ExecutionSlice obtain_slice(const CorpusEntry& entry) {
    return parse_trace(read_file(entry.trace_path, "trace file"));
}

std::set<FunctionKey> trace_functions(const CorpusEntry& entry) {
    std::set<FunctionKey> out;
    std::istringstream in(read_file(entry.trace_path, "trace file"));
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string tag, file, third;
        if (!(fields >> tag >> file >> third) || (tag != "L" && tag != "F"))
            throw TraceFormatError("malformed trace record '" + line + "'", line_no);
        if (tag == "F") out.insert({file, third});
    }
    return out;
}

const CorpusEntry& obtain_parent_mutation(const CorpusEntry& entry, const FuzzCorpus& corpus) {
    const CorpusEntry* cur = &entry;
    while (cur->parent_id) {
        cur = &corpus.entries.at(*cur->parent_id);
        if (!cur->crash) return *cur;
    }
    throw NoParent("entry '" + entry.id + "' has no non-crashing ancestor");
}

Coverset compute_coverset(const FuzzCorpus& corpus) {
    Coverset coverset;
    for (const auto& [id, entry] : corpus.entries) {
        for (FunctionKey key : trace_functions(entry))
            coverset.functions.insert(std::move(key));
    }
    return coverset;
}

} // namespace vx
