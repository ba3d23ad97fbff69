// Probability estimates and (shifted) PMI values, from corpus statistics or from an
// exactly enumerated joint distribution.
#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "semvec/cooccur.hpp"

namespace semvec {

// Exact distribution over windows of m positions on a dictionary of n <= 8 words.
// q is symmetrized over coordinate permutations, so every position is exchangeable.
// Word-set events use designated slots: p(W) = P(x_1..x_s = W),
// p(W|c) = P(x_1..x_s = W | x_0 = c), p(c|W) by Bayes. Singleton sets then reduce
// exactly to the pairwise conditionals.
class ExactWindowModel {
public:
    static ExactWindowModel from_table(int n, int m, std::vector<double> probs);
    static ExactWindowModel dirichlet(int n, int m, double alpha, uint64_t seed);
    static ExactWindowModel independent(int n, int m, const Eigen::VectorXd& unigram);
    static ExactWindowModel from_json_file(const std::string& path,
                                           std::vector<std::string>* words_out = nullptr);

    int dict_size() const { return n_; }
    int window_len() const { return m_; }

    // P(x_1 = w_1, ..., x_k = w_k) for k <= m.
    double marginal(const std::vector<int>& words) const;
    double p_word(int i) const;
    double p_pair(int i, int j) const;
    double p_set(const std::vector<int>& sorted_set) const;
    // Component j: P(x_0 = c_j | x_1..x_s = W).
    Eigen::VectorXd p_ctx_given_set(const std::vector<int>& sorted_set) const;
    // Component j: P(x_1..x_s = W | x_0 = c_j).
    Eigen::VectorXd p_set_given_ctx(const std::vector<int>& sorted_set) const;

private:
    ExactWindowModel(int n, int m, std::vector<double> q);
    const std::vector<double>& marginal_table(int order) const;

    int n_ = 0;
    int m_ = 0;
    std::vector<double> q_;                                  // n^m, full order
    mutable std::vector<std::vector<double>> marg_cache_;    // [order] -> n^order table
};

struct JointTable {
    std::vector<int> words;          // sorted unique
    double p_set = 0.0;              // p(W)
    Eigen::VectorXd p_ctx_given_set; // p(c_j | W)
    Eigen::VectorXd p_set_given_ctx; // p(W | c_j)
};

class ProbabilityModel {
public:
    static ProbabilityModel from_stats(const CooccurrenceStats& stats,
                                       const std::vector<JointStats>& joints = {});
    static ProbabilityModel from_exact(ExactWindowModel model);

    bool exact() const { return exact_ != nullptr; }
    int size() const { return n_; }
    double p_target(int i) const { return p_target_[i]; }
    double p_context(int j) const { return p_context_[j]; }
    const Eigen::VectorXd& target_marginal() const { return p_target_; }
    const Eigen::VectorXd& context_marginal() const { return p_context_; }
    double p_pair(int i, int j) const;

    // Joint-set queries. Exact models enumerate on demand; empirical models require the
    // set to have been registered via accumulate_joint.
    double p_set(const std::vector<int>& set) const;
    Eigen::VectorXd p_ctx_given_set(const std::vector<int>& set) const;
    Eigen::VectorXd p_set_given_ctx(const std::vector<int>& set) const;

    // p(c_j | w_i) over j; exact models have full support, empirical ones may carry zeros.
    Eigen::VectorXd induced_distribution(int i) const;

    const ExactWindowModel* exact_model() const { return exact_.get(); }

private:
    int n_ = 0;
    Eigen::VectorXd p_target_, p_context_;
    std::unordered_map<uint64_t, double> p_pair_;
    std::vector<JointTable> joints_;
    std::shared_ptr<const ExactWindowModel> exact_;
};

enum class MissingPolicy { sentinel, undefined };

struct PmiMatrix {
    int n = 0;
    double shift = 0.0;  // log k
    MissingPolicy policy = MissingPolicy::undefined;
    double sentinel = -1.0;
    std::unordered_map<uint64_t, double> values;  // defined entries only

    std::optional<double> value(int i, int j) const;
    // Applies the missing policy; throws NumericalError under `undefined` with gaps.
    Eigen::MatrixXd dense() const;
    bool symmetric(double tol = 1e-8) const;
    void save(const std::string& path) const;
    static PmiMatrix load(const std::string& path);
};

// log p(w_i,c_j) - log p(w_i) - log p(c_j) - log k; nullopt when the pair is unobserved.
// Throws NumericalError when a marginal is zero (distinct from a missing pair).
std::optional<double> pmi_value(const ProbabilityModel& model, int i, int j, double k = 1.0);

PmiMatrix pmi_matrix(const ProbabilityModel& model, double k, MissingPolicy policy,
                     double sentinel = -1.0);

// Row i of the PMI matrix: component j = PMI(w_i, c_j). Missing components take
// `missing` (defaults to the WTV sentinel). Throws on p(w_i) = 0.
Eigen::VectorXd pmi_vector(const ProbabilityModel& model, int i, double k = 1.0,
                           double missing = -1.0);

// Entrywise max(0, .) post-transform.
PmiMatrix ppmi(const PmiMatrix& m);

// Context marginal raised to `power` and renormalised (negative-sampling distortion).
Eigen::VectorXd distort_unigram(const Eigen::VectorXd& p, double power = 0.75);

}  // namespace semvec
