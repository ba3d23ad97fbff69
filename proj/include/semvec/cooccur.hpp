// Sparse co-occurrence sufficient statistics: pair weights, marginals, joint word-set counts.
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "semvec/corpus.hpp"

namespace semvec {

// Pair weights are accumulated as exact integer numerators over scale = lcm(1..window)
// (1/d = (scale/d)/scale), so sharded accumulation merges bit-exactly with a single pass.
// Externally everything reads as 64-bit floats.
class CooccurrenceStats {
public:
    CooccurrenceStats() = default;
    CooccurrenceStats(int vocab_size, int window, Weighting weighting);

    // Full pipeline over an id stream; nthreads > 1 shards by contiguous target ranges.
    static CooccurrenceStats from_stream(const std::vector<int>& ids, int vocab_size, int window,
                                         Weighting weighting, int nthreads = 1);
    static CooccurrenceStats from_pairs(const std::vector<CorpusPair>& pairs, int vocab_size,
                                        int window, Weighting weighting);

    void add(int target, int context, int distance);
    static CooccurrenceStats merge(const CooccurrenceStats& a, const CooccurrenceStats& b);

    int vocab_size() const { return n_; }
    int window() const { return window_; }
    Weighting weighting() const { return weighting_; }
    int64_t scale() const { return scale_; }

    double pair_weight(int i, int j) const;
    double target_weight(int i) const { return to_weight(target_[i]); }
    double context_weight(int j) const { return to_weight(context_[j]); }
    double total_weight() const { return to_weight(total_); }  // D
    size_t nonzeros() const { return cells_.size(); }

    // Sorted by (i, j); the reproducible on-disk order.
    std::vector<std::pair<uint64_t, int64_t>> sorted_cells() const;
    const std::unordered_map<uint64_t, int64_t>& raw_cells() const { return cells_; }

    void save(const std::string& path) const;
    static CooccurrenceStats load(const std::string& path);

    bool config_matches(const CooccurrenceStats& o) const {
        return n_ == o.n_ && window_ == o.window_ && weighting_ == o.weighting_;
    }

private:
    double to_weight(int64_t v) const { return static_cast<double>(v) / static_cast<double>(scale_); }

    int n_ = 0;
    int window_ = 1;
    Weighting weighting_ = Weighting::uniform;
    int64_t scale_ = 1;
    std::unordered_map<uint64_t, int64_t> cells_;
    std::vector<int64_t> target_, context_;
    int64_t total_ = 0;
};

// Joint word-set statistics. A window at position t covers tokens t-l..t+l (centre included);
// the set co-occurs at t when every member appears there. #(W,c) counts window tokens at
// positions whose token is not itself a member of W.
struct JointStats {
    std::vector<int> words;  // sorted unique member ids
    int window = 1;
    int64_t set_count = 0;                          // #(W)
    std::unordered_map<int, int64_t> set_context;   // #(W, c)
    int64_t n_windows = 0;                          // number of window positions (= stream length)
    std::vector<int64_t> context_incidence;         // per-token total window incidences
};

std::vector<JointStats> accumulate_joint(const std::vector<int>& ids, int vocab_size,
                                         const std::vector<std::vector<int>>& sets, int window);

int64_t lcm_up_to(int n);

}  // namespace semvec
