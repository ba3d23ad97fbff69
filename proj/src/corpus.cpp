#include "semvec/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace semvec {

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        unsigned char u = static_cast<unsigned char>(ch);
        if (std::isalnum(u)) {
            cur.push_back(static_cast<char>(std::tolower(u)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

std::vector<std::string> read_tokens(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open corpus file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return tokenize(ss.str());
}

Dictionary build_dictionary(const std::vector<std::string>& stream, int64_t min_count) {
    if (stream.empty()) throw DataError("empty token stream");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");

    std::unordered_map<std::string, int64_t> freq;
    freq.reserve(stream.size() / 4 + 16);
    for (const auto& tok : stream) ++freq[tok];

    std::vector<std::pair<std::string, int64_t>> kept;
    kept.reserve(freq.size());
    for (auto& [tok, c] : freq)
        if (c >= min_count) kept.emplace_back(tok, c);
    if (kept.empty()) throw DataError("empty dictionary: no token reaches min_count");

    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Dictionary dict;
    dict.total_tokens = static_cast<int64_t>(stream.size());
    dict.tokens.reserve(kept.size());
    dict.counts.reserve(kept.size());
    dict.ids.reserve(kept.size());
    for (auto& [tok, c] : kept) {
        dict.ids.emplace(tok, static_cast<int>(dict.tokens.size()));
        dict.tokens.push_back(tok);
        dict.counts.push_back(c);
    }
    return dict;
}

void save_vocab(const Dictionary& dict, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write vocab file: " + path);
    // Line number = id; the unfiltered token total rides along as a trailing comment.
    for (int i = 0; i < dict.size(); ++i) out << dict.tokens[i] << "\t" << dict.counts[i] << "\n";
    out << "#total\t" << dict.total_tokens << "\n";
}

Dictionary load_vocab(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open vocab file: " + path);
    Dictionary dict;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("vocab parse error at line " + std::to_string(lineno));
        std::string tok = line.substr(0, tab);
        int64_t c = std::stoll(line.substr(tab + 1));
        if (tok == "#total") {
            dict.total_tokens = c;
            continue;
        }
        dict.ids.emplace(tok, static_cast<int>(dict.tokens.size()));
        dict.tokens.push_back(tok);
        dict.counts.push_back(c);
    }
    if (dict.tokens.empty()) throw DataError("empty dictionary file: " + path);
    if (dict.total_tokens == 0)
        for (int64_t c : dict.counts) dict.total_tokens += c;
    return dict;
}

std::vector<int> subsample_filter(const std::vector<std::string>& stream, const Dictionary& dict,
                                  double tau, uint64_t seed, SubsampleStats* stats) {
    if (tau <= 0) throw ConfigError("subsample threshold tau must be > 0");
    std::vector<int> out;
    out.reserve(stream.size());
    SubsampleStats local;
    for (size_t pos = 0; pos < stream.size(); ++pos) {
        int id = dict.id_of(stream[pos]);
        if (id < 0) {
            ++local.dropped_oov;
            continue;
        }
        double keep = std::sqrt(tau / dict.frequency(id));
        if (keep < 1.0 && hash_uniform(seed, pos) >= keep) {
            ++local.dropped_subsample;
            continue;
        }
        out.push_back(id);
        ++local.kept;
    }
    if (stats) *stats = local;
    return out;
}

std::vector<int> to_ids(const std::vector<std::string>& stream, const Dictionary& dict,
                        SubsampleStats* stats) {
    std::vector<int> out;
    out.reserve(stream.size());
    SubsampleStats local;
    for (const auto& tok : stream) {
        int id = dict.id_of(tok);
        if (id < 0) {
            ++local.dropped_oov;
            continue;
        }
        out.push_back(id);
        ++local.kept;
    }
    if (stats) *stats = local;
    return out;
}

const char* weighting_name(Weighting w) {
    return w == Weighting::uniform ? "uniform" : "inverse_distance";
}

Weighting weighting_from_name(const std::string& name) {
    if (name == "uniform") return Weighting::uniform;
    if (name == "inverse_distance") return Weighting::inverse_distance;
    throw ConfigError("unknown weighting: " + name);
}

void for_each_pair(const std::vector<int>& ids, int window, Weighting weighting,
                   const std::function<void(const CorpusPair&)>& emit) {
    if (window < 1) throw ConfigError("window must be >= 1");
    const auto n = static_cast<ptrdiff_t>(ids.size());
    for (ptrdiff_t t = 0; t < n; ++t) {
        ptrdiff_t lo = std::max<ptrdiff_t>(0, t - window);
        ptrdiff_t hi = std::min<ptrdiff_t>(n - 1, t + window);
        for (ptrdiff_t u = lo; u <= hi; ++u) {
            if (u == t) continue;
            int dist = static_cast<int>(u > t ? u - t : t - u);
            double w = weighting == Weighting::uniform ? 1.0 : 1.0 / dist;
            emit(CorpusPair{ids[t], ids[u], w, dist});
        }
    }
}

std::vector<CorpusPair> extract_pairs(const std::vector<int>& ids, int window, Weighting weighting) {
    std::vector<CorpusPair> out;
    for_each_pair(ids, window, weighting, [&](const CorpusPair& p) { out.push_back(p); });
    return out;
}

void save_pairs(const std::vector<CorpusPair>& pairs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write pairs file: " + path);
    out << "#target\tcontext\tweight\tdistance\n";
    char buf[128];
    for (const auto& p : pairs) {
        std::snprintf(buf, sizeof(buf), "%d\t%d\t%.9g\t%d\n", p.target, p.context, p.weight,
                      p.distance);
        out << buf;
    }
}

}  // namespace semvec
