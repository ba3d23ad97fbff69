// Corpus layer: tokenization, dictionary building, subsampling, window pair extraction.
#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "semvec/common.hpp"

namespace semvec {

struct Dictionary {
    std::vector<std::string> tokens;            // id -> token, ids dense in [0, n)
    std::unordered_map<std::string, int> ids;   // token -> id
    std::vector<int64_t> counts;                // id -> corpus frequency
    int64_t total_tokens = 0;                   // all tokens seen, including filtered ones

    int size() const { return static_cast<int>(tokens.size()); }
    int id_of(const std::string& tok) const {
        auto it = ids.find(tok);
        return it == ids.end() ? -1 : it->second;
    }
    // f(w) = counts[w] / total_tokens, the global frequency used by subsampling.
    double frequency(int id) const {
        return static_cast<double>(counts[id]) / static_cast<double>(total_tokens);
    }
};

// Lowercase, split on any non-alphanumeric byte.
std::vector<std::string> tokenize(std::string_view text);
std::vector<std::string> read_tokens(const std::string& path);

// Retains tokens with count >= min_count; ids by descending count, ties lexicographic.
// Throws DataError("empty dictionary") when nothing survives.
Dictionary build_dictionary(const std::vector<std::string>& stream, int64_t min_count);

void save_vocab(const Dictionary& dict, const std::string& path);
Dictionary load_vocab(const std::string& path);

struct SubsampleStats {
    int64_t kept = 0;
    int64_t dropped_oov = 0;        // tokens not in the dictionary, skipped silently
    int64_t dropped_subsample = 0;  // frequency-based discards
};

// Maps the token stream to retained ids. Each occurrence of w is discarded with
// probability max(0, 1 - sqrt(tau / f(w))), decided by hashing (seed, position).
std::vector<int> subsample_filter(const std::vector<std::string>& stream, const Dictionary& dict,
                                  double tau, uint64_t seed, SubsampleStats* stats = nullptr);

// Id stream without subsampling (OOV dropped, counted).
std::vector<int> to_ids(const std::vector<std::string>& stream, const Dictionary& dict,
                        SubsampleStats* stats = nullptr);

enum class Weighting { uniform, inverse_distance };

const char* weighting_name(Weighting w);
Weighting weighting_from_name(const std::string& name);

struct CorpusPair {
    int target;
    int context;
    double weight;  // 1 or 1/distance
    int distance;   // tokens between target and context, in [1, window]
};

// Emits, for each position t, a pair for every token within `window` either side.
// Boundary positions simply emit fewer pairs.
void for_each_pair(const std::vector<int>& ids, int window, Weighting weighting,
                   const std::function<void(const CorpusPair&)>& emit);

std::vector<CorpusPair> extract_pairs(const std::vector<int>& ids, int window, Weighting weighting);

void save_pairs(const std::vector<CorpusPair>& pairs, const std::string& path);

}  // namespace semvec
