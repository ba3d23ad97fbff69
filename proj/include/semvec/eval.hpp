// Intrinsic evaluation: Spearman correlation against human judgements, analogy accuracy.
#pragma once

#include <array>
#include <string>
#include <vector>

#include "semvec/semantics.hpp"

namespace semvec {

struct WordSimDataset {
    std::string name;
    std::vector<std::tuple<std::string, std::string, double>> pairs;
};

struct AnalogyDataset {
    std::string name;
    std::vector<std::string> sections;                  // section labels
    std::vector<std::array<std::string, 4>> questions;  // a a* b b*
    std::vector<int> section_of;                        // question -> section index
};

// TSV/CSV/space separated: word1 word2 score. Lines starting with '#' skipped.
WordSimDataset load_wordsim(const std::string& path);
// Google format: ": section-name" headers, then 4 tokens per line.
AnalogyDataset load_analogy(const std::string& path);

double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct WordSimResult {
    double rho = 0.0;
    int scored = 0;
    int oov = 0;
};

WordSimResult eval_wordsim(const EmbeddingSet& set,
                           const std::vector<std::string>& vocab_tokens,
                           const WordSimDataset& data, Interaction interaction);

struct AnalogyEvalResult {
    double accuracy = 0.0;
    int scored = 0;
    int oov = 0;
    std::vector<std::pair<std::string, double>> per_section;
};

// Default ranking follows the replication protocol: argmin Euclidean distance to the
// method's query vector; cosine ranking behind the metric flag.
AnalogyEvalResult eval_analogies(const EmbeddingSet& set,
                                 const std::vector<std::string>& vocab_tokens,
                                 const AnalogyDataset& data,
                                 AnalogyMethod method = AnalogyMethod::offset,
                                 bool exclude = true,
                                 RankMetric metric = RankMetric::euclidean,
                                 Interaction interaction = Interaction::WW, int nthreads = 1);

}  // namespace semvec
