// Run manifests, file hashing and tabular report merging for the CLI.
#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "semvec/common.hpp"

namespace semvec {

std::string hash_file_hex(const std::string& path);
std::string hash_string_hex(const std::string& data);

class RunManifest {
public:
    RunManifest(std::string command_line, nlohmann::json config, uint64_t seed);

    void add_input(const std::string& path);
    void add_output(const std::string& path);
    void set(const std::string& key, const nlohmann::json& value);

    // `begin` persists the manifest before work starts; `finalize` rewrites it with
    // wall-clock and output hashes.
    void begin(const std::string& path);
    void finalize();

    const nlohmann::json& json() const { return doc_; }

private:
    nlohmann::json doc_;
    std::string path_;
    double start_ = 0.0;
};

// Tabular records with a fixed column schema; JSON array-of-objects or CSV on disk.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    static Table load(const std::string& path);  // dispatches on extension
    void save(const std::string& path) const;
    static Table merge(const std::vector<Table>& tables);  // hard error on mixed schemas
};

}  // namespace semvec
