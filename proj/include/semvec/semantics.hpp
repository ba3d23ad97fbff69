// Paraphrase and dependence error terms, the decomposition identities they satisfy,
// analogy solving, and embedding-interaction diagnostics.
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "semvec/factorize.hpp"
#include "semvec/pmi.hpp"

namespace semvec {

struct DecompositionReport {
    Eigen::VectorXd rho;    // paraphrase error vector
    Eigen::VectorXd sigma;  // conditional dependence vector (of W, or sigma_W - sigma_W* for sets)
    double tau = 0.0;       // marginal dependence (or tau_W - tau_W*)
    Eigen::VectorXd lhs, rhs;
    double residual = 0.0;  // max-abs(lhs - rhs)
};

// rho_j = log p(c_j|target) - log p(c_j|W). Components with an undefined empirical
// conditional come back as NaN (per-component missing flag).
Eigen::VectorXd paraphrase_error(const ProbabilityModel& model, int target,
                                 const std::vector<int>& W);
Eigen::VectorXd paraphrase_error_sets(const ProbabilityModel& model, const std::vector<int>& W,
                                      const std::vector<int>& W_star);

// sigma_j = log p(W|c_j) / prod_i p(w_i|c_j); tau = log p(W) / prod_i p(w_i).
std::pair<Eigen::VectorXd, double> dependence_errors(const ProbabilityModel& model,
                                                     const std::vector<int>& W);

// PMI_* = sum_{w in W} PMI_w + rho + sigma - tau 1 (exact models only).
DecompositionReport verify_lemma1(const ProbabilityModel& model, int target,
                                  const std::vector<int>& W);
// sum_{W*} PMI = sum_W PMI + rho + sigma_W - sigma_W* - (tau_W - tau_W*) 1.
DecompositionReport verify_lemma2(const ProbabilityModel& model, const std::vector<int>& W,
                                  const std::vector<int>& W_star);
// PMI_{b*} - (PMI_{a*} - PMI_a + PMI_b) against the W = {b, a*}, W* = {b*, a} decomposition.
DecompositionReport analogy_decomposition(const ProbabilityModel& model, int a, int a_star, int b,
                                          int b_star);

enum class AnalogyMethod { offset, nn, add_only, reverse, mean_offset };
AnalogyMethod analogy_method_from_name(const std::string& name);
const char* analogy_method_name(AnalogyMethod m);

enum class Interaction { WW, WC, AA };
Interaction interaction_from_name(const std::string& name);
const char* interaction_name(Interaction i);

enum class RankMetric { cosine, euclidean };

struct AnalogyQueryResult {
    std::vector<std::pair<int, double>> ranked;  // (word id, score), best first
};

// Ranks candidates against the method's query vector. a/a*/b are excluded when
// exclude is set. mean_offset needs the labelled pair set.
AnalogyQueryResult solve_analogy(const EmbeddingSet& set, int a, int a_star, int b,
                                 AnalogyMethod method, bool exclude = true,
                                 Interaction interaction = Interaction::WW,
                                 RankMetric metric = RankMetric::cosine,
                                 const std::vector<std::pair<int, int>>* labelled_pairs = nullptr,
                                 int top_k = 10);

struct WeakParaphraseReport {
    double kl_w_to_cand = 0.0;        // D_KL[p(E|W) || p(E|cand)]
    double kl_cand_to_w = 0.0;        // D_KL[p(E|cand) || p(E|W)]
    double hyperplane_residual = 0.0; // |w*.chat - (w_W.chat - KL + sigma_hat - tau)|
};

WeakParaphraseReport weak_paraphrase_projection(const ProbabilityModel& model,
                                                const EmbeddingSet& set,
                                                const std::vector<int>& W, int candidate);

// Both argmin directions over every candidate word.
struct WeakParaphraseArgmin {
    int argmin_w_to_cand = -1;
    int argmin_cand_to_w = -1;
    std::vector<WeakParaphraseReport> per_candidate;
};
WeakParaphraseArgmin weak_paraphrase_scan(const ProbabilityModel& model, const EmbeddingSet& set,
                                          const std::vector<int>& W);

double difference_sum(const EmbeddingSet& set, int i, int j);

struct AroraReport {
    // Per-word residual of log p(w_i) ~ -w_i.c_i/2 + log p(w_i,c_i)/2 (NaN when skipped).
    Eigen::VectorXd word_residuals;
    int skipped_words = 0;
    // Per sampled pair residual of the Eq.13-style joint relation.
    std::vector<std::tuple<int, int, double>> pair_residuals;
    double word_mean_abs = 0.0, word_max_abs = 0.0;
    double pair_mean_abs = 0.0, pair_max_abs = 0.0;
};

AroraReport arora_assumption_check(const EmbeddingSet& set, const ProbabilityModel& model,
                                   int max_pairs = 1000, uint64_t seed = 0);

// w_* - w_W = C^dagger (rho + sigma - tau 1): Thm-1 projection residual at full rank.
double projection_residual(const ProbabilityModel& model, const EmbeddingSet& set, int target,
                           const std::vector<int>& W);

}  // namespace semvec
