#include "semvec/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace semvec {

static double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

std::string hash_string_hex(const std::string& data) {
    // Two FNV-1a passes with distinct bases, concatenated to 128 bits.
    uint64_t a = fnv1a64(data.data(), data.size());
    uint64_t b = fnv1a64(data.data(), data.size(), 0x84222325cbf29ce4ULL);
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx", static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    return buf;
}

std::string hash_file_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash missing file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return hash_string_hex(ss.str());
}

RunManifest::RunManifest(std::string command_line, nlohmann::json config, uint64_t seed) {
    doc_["command"] = std::move(command_line);
    doc_["config"] = std::move(config);
    doc_["seed"] = seed;
    doc_["tool_version"] = "semvec 1.0";
    doc_["inputs"] = nlohmann::json::object();
    doc_["outputs"] = nlohmann::json::object();
    doc_["status"] = "created";
}

void RunManifest::add_input(const std::string& path) {
    doc_["inputs"][path] = hash_file_hex(path);
}

void RunManifest::add_output(const std::string& path) { doc_["outputs"][path] = nullptr; }

void RunManifest::set(const std::string& key, const nlohmann::json& value) { doc_[key] = value; }

void RunManifest::begin(const std::string& path) {
    path_ = path;
    start_ = now_seconds();
    doc_["status"] = "running";
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << doc_.dump(2) << "\n";
}

void RunManifest::finalize() {
    doc_["wall_clock_sec"] = now_seconds() - start_;
    for (auto& [path, hash] : doc_["outputs"].items()) hash = hash_file_hex(path);
    doc_["status"] = "finished";
    std::ofstream out(path_);
    if (!out) throw DataError("cannot rewrite manifest: " + path_);
    out << doc_.dump(2) << "\n";
}

static bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

static std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

static std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

Table Table::load(const std::string& path) {
    Table t;
    if (ends_with(path, ".json")) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open report input: " + path);
        nlohmann::json j;
        in >> j;
        if (!j.is_array()) throw DataError("report JSON must be an array of objects: " + path);
        for (const auto& rec : j) {
            if (t.columns.empty())
                for (auto it = rec.begin(); it != rec.end(); ++it) t.columns.push_back(it.key());
            std::vector<std::string> row;
            for (const auto& col : t.columns) {
                if (!rec.contains(col)) throw DataError("report record missing column " + col);
                const auto& v = rec[col];
                if (v.is_string()) row.push_back(v.get<std::string>());
                else if (v.is_null()) row.push_back("");
                else if (v.is_number()) {
                    char buf[64];
                    std::snprintf(buf, sizeof(buf), "%.9g", v.get<double>());
                    row.push_back(buf);
                } else row.push_back(v.dump());
            }
            t.rows.push_back(std::move(row));
        }
    } else if (ends_with(path, ".csv")) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open report input: " + path);
        std::string line;
        if (!std::getline(in, line)) throw DataError("empty CSV: " + path);
        t.columns = parse_csv_line(line);
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto row = parse_csv_line(line);
            if (row.size() != t.columns.size())
                throw DataError("CSV row width mismatch in " + path);
            t.rows.push_back(std::move(row));
        }
    } else {
        throw ConfigError("report inputs must be .json or .csv: " + path);
    }
    return t;
}

void Table::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write report: " + path);
    if (ends_with(path, ".json")) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json rec = nlohmann::json::object();
            for (size_t c = 0; c < columns.size(); ++c) {
                // Numbers stay numbers across the round trip.
                const std::string& v = row[c];
                char* end = nullptr;
                double d = std::strtod(v.c_str(), &end);
                if (!v.empty() && end && *end == '\0') rec[columns[c]] = d;
                else if (v.empty()) rec[columns[c]] = nullptr;
                else rec[columns[c]] = v;
            }
            arr.push_back(std::move(rec));
        }
        out << arr.dump(2) << "\n";
    } else if (ends_with(path, ".csv")) {
        for (size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << csv_escape(columns[c]);
        out << "\n";
        for (const auto& row : rows) {
            for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_escape(row[c]);
            out << "\n";
        }
    } else {
        throw ConfigError("report outputs must be .json or .csv: " + path);
    }
}

Table Table::merge(const std::vector<Table>& tables) {
    if (tables.empty()) throw ConfigError("report merge: no inputs");
    Table out = tables.front();
    for (size_t i = 1; i < tables.size(); ++i) {
        if (tables[i].columns != out.columns)
            throw DataError("report merge: mixed schemas");
        out.rows.insert(out.rows.end(), tables[i].rows.begin(), tables[i].rows.end());
    }
    return out;
}

}  // namespace semvec
