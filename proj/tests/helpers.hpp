#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vx/cli.hpp"

namespace testutil {

inline std::filesystem::path fixture_dir() { return FIXTURE_DIR; }

// Copies a fixture tree into a scratch directory so replay can write into it.
inline std::filesystem::path copy_fixture(const std::string& name, const std::string& tag) {
    namespace fs = std::filesystem;
    fs::path dst = fs::temp_directory_path() / ("vxtest_" + tag);
    fs::remove_all(dst);
    fs::copy(fixture_dir() / name, dst, fs::copy_options::recursive);
    return dst;
}

inline int cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
               std::string* err_text = nullptr) {
    std::ostringstream out, err;
    int rc = vx::run_cli(args, out, err);
    if (out_text) *out_text = out.str();
    if (err_text) *err_text = err.str();
    return rc;
}

inline void replay_fixture(const std::filesystem::path& dir, const std::string& source) {
    std::string out, err;
    int rc = cli({"replay", "--sources", (dir / source).string(), "--manifest",
                  (dir / "manifest.jsonl").string()},
                 &out, &err);
    if (rc != 0) throw std::runtime_error("fixture replay failed: " + err);
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Independent FNV-1a 64 implementation used as the hash oracle.
inline uint64_t fnv1a64(const std::vector<uint8_t>& bytes) {
    uint64_t h = 14695981039346656037ull;
    for (uint8_t b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (int shift = 60; shift >= 0; shift -= 4) out += digits[(v >> shift) & 0xf];
    return out;
}

} // namespace testutil
