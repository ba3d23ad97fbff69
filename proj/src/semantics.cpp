#include "semvec/semantics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semvec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sorted multiset: a repeated member is a repeated designated slot (see pmi.cpp).
std::vector<int> canonical(const std::vector<int>& w) {
    std::vector<int> s = w;
    std::sort(s.begin(), s.end());
    if (s.empty()) throw ConfigError("empty word set");
    return s;
}

void require_exact(const ProbabilityModel& model, const char* what) {
    if (!model.exact())
        throw ConfigError(std::string(what) +
                          " is an exact identity; empirical counts with zeros are refused");
}

Eigen::VectorXd log_or_nan(const Eigen::VectorXd& v) {
    Eigen::VectorXd out(v.size());
    for (int i = 0; i < v.size(); ++i) out[i] = v[i] > 0 ? std::log(v[i]) : kNaN;
    return out;
}

}  // namespace

Eigen::VectorXd paraphrase_error(const ProbabilityModel& model, int target,
                                 const std::vector<int>& W) {
    auto set = canonical(W);
    Eigen::VectorXd log_target = log_or_nan(model.induced_distribution(target));
    Eigen::VectorXd log_set = log_or_nan(model.p_ctx_given_set(set));
    return log_target - log_set;
}

Eigen::VectorXd paraphrase_error_sets(const ProbabilityModel& model, const std::vector<int>& W,
                                      const std::vector<int>& W_star) {
    Eigen::VectorXd log_star = log_or_nan(model.p_ctx_given_set(canonical(W_star)));
    Eigen::VectorXd log_w = log_or_nan(model.p_ctx_given_set(canonical(W)));
    return log_star - log_w;  // rho^{W,W*}_j = log p(c_j|W*)/p(c_j|W)
}

std::pair<Eigen::VectorXd, double> dependence_errors(const ProbabilityModel& model,
                                                     const std::vector<int>& W) {
    auto set = canonical(W);
    const int n = model.size();
    Eigen::VectorXd sigma = log_or_nan(model.p_set_given_ctx(set));
    double tau = std::log(model.p_set(set));
    for (int w : set) {
        Eigen::VectorXd singleton = log_or_nan(model.p_set_given_ctx({w}));
        sigma -= singleton;
        tau -= std::log(model.p_target(w));
    }
    (void)n;
    return {sigma, tau};
}

DecompositionReport verify_lemma1(const ProbabilityModel& model, int target,
                                  const std::vector<int>& W) {
    require_exact(model, "verify_lemma1");
    auto set = canonical(W);
    DecompositionReport rep;
    rep.lhs = pmi_vector(model, target);
    rep.rhs = Eigen::VectorXd::Zero(model.size());
    for (int w : set) rep.rhs += pmi_vector(model, w);
    rep.rho = paraphrase_error(model, target, set);
    auto [sigma, tau] = dependence_errors(model, set);
    rep.sigma = sigma;
    rep.tau = tau;
    rep.rhs += rep.rho + rep.sigma - tau * Eigen::VectorXd::Ones(model.size());
    rep.residual = (rep.lhs - rep.rhs).lpNorm<Eigen::Infinity>();
    return rep;
}

DecompositionReport verify_lemma2(const ProbabilityModel& model, const std::vector<int>& W,
                                  const std::vector<int>& W_star) {
    require_exact(model, "verify_lemma2");
    auto w = canonical(W);
    auto ws = canonical(W_star);
    DecompositionReport rep;
    rep.lhs = Eigen::VectorXd::Zero(model.size());
    rep.rhs = Eigen::VectorXd::Zero(model.size());
    for (int x : ws) rep.lhs += pmi_vector(model, x);
    for (int x : w) rep.rhs += pmi_vector(model, x);
    rep.rho = paraphrase_error_sets(model, w, ws);
    auto [sig_w, tau_w] = dependence_errors(model, w);
    auto [sig_s, tau_s] = dependence_errors(model, ws);
    rep.sigma = sig_w - sig_s;
    rep.tau = tau_w - tau_s;
    rep.rhs += rep.rho + rep.sigma - rep.tau * Eigen::VectorXd::Ones(model.size());
    rep.residual = (rep.lhs - rep.rhs).lpNorm<Eigen::Infinity>();
    return rep;
}

DecompositionReport analogy_decomposition(const ProbabilityModel& model, int a, int a_star, int b,
                                          int b_star) {
    require_exact(model, "analogy_decomposition");
    std::vector<int> W = {b, a_star};        // Cor 3.2 set choice
    std::vector<int> W_star = {b_star, a};
    DecompositionReport rep = verify_lemma2(model, W, W_star);
    // Re-express as PMI_{b*} - (PMI_{a*} - PMI_a + PMI_b) vs the error terms.
    rep.lhs = pmi_vector(model, b_star) -
              (pmi_vector(model, a_star) - pmi_vector(model, a) + pmi_vector(model, b));
    rep.rhs = rep.rho + rep.sigma - rep.tau * Eigen::VectorXd::Ones(model.size());
    rep.residual = (rep.lhs - rep.rhs).lpNorm<Eigen::Infinity>();
    return rep;
}

AnalogyMethod analogy_method_from_name(const std::string& name) {
    if (name == "offset") return AnalogyMethod::offset;
    if (name == "nn") return AnalogyMethod::nn;
    if (name == "add_only") return AnalogyMethod::add_only;
    if (name == "reverse") return AnalogyMethod::reverse;
    if (name == "mean_offset") return AnalogyMethod::mean_offset;
    throw ConfigError("unknown analogy method: " + name);
}

const char* analogy_method_name(AnalogyMethod m) {
    switch (m) {
        case AnalogyMethod::offset: return "offset";
        case AnalogyMethod::nn: return "nn";
        case AnalogyMethod::add_only: return "add_only";
        case AnalogyMethod::reverse: return "reverse";
        default: return "mean_offset";
    }
}

Interaction interaction_from_name(const std::string& name) {
    if (name == "WW") return Interaction::WW;
    if (name == "WC") return Interaction::WC;
    if (name == "AA") return Interaction::AA;
    throw ConfigError("unknown interaction: " + name);
}

const char* interaction_name(Interaction i) {
    switch (i) {
        case Interaction::WW: return "WW";
        case Interaction::WC: return "WC";
        default: return "AA";
    }
}

AnalogyQueryResult solve_analogy(const EmbeddingSet& set, int a, int a_star, int b,
                                 AnalogyMethod method, bool exclude, Interaction interaction,
                                 RankMetric metric,
                                 const std::vector<std::pair<int, int>>* labelled_pairs,
                                 int top_k) {
    const int n = static_cast<int>(set.W.cols());
    auto check = [&](int w, const char* name) {
        if (w < 0 || w >= n) throw DataError(std::string("analogy word out of vocabulary: ") + name);
    };
    check(a, "a");
    check(a_star, "a*");
    check(b, "b");

    // Query built from W; candidates scored from the interaction's matrix.
    Eigen::VectorXd query;
    switch (method) {
        case AnalogyMethod::offset: query = set.W.col(b) + set.W.col(a_star) - set.W.col(a); break;
        case AnalogyMethod::nn: query = set.W.col(b); break;
        case AnalogyMethod::add_only: query = set.W.col(b) + set.W.col(a_star); break;
        case AnalogyMethod::reverse: query = set.W.col(b) - set.W.col(a_star) + set.W.col(a); break;
        case AnalogyMethod::mean_offset: {
            if (!labelled_pairs || labelled_pairs->empty())
                throw ConfigError("mean_offset requires a labelled pair set");
            Eigen::VectorXd r = Eigen::VectorXd::Zero(set.dim);
            for (auto [x, xs] : *labelled_pairs) {
                check(x, "pair source");
                check(xs, "pair target");
                r += set.W.col(xs) - set.W.col(x);
            }
            r /= static_cast<double>(labelled_pairs->size());
            query = set.W.col(b) + r;
            break;
        }
    }

    const Eigen::MatrixXd* cand = &set.W;
    Eigen::MatrixXd mean_storage;
    if (interaction == Interaction::WC) {
        cand = &set.context();
    } else if (interaction == Interaction::AA) {
        mean_storage = set.mean();
        cand = &mean_storage;
    }

    double qn = query.norm();
    std::vector<std::pair<int, double>> scored;
    scored.reserve(n);
    for (int w = 0; w < n; ++w) {
        if (exclude && (w == a || w == a_star || w == b)) continue;
        double score;
        if (metric == RankMetric::cosine) {
            double cn = cand->col(w).norm();
            score = (qn > 0 && cn > 0) ? query.dot(cand->col(w)) / (qn * cn) : 0.0;
        } else {
            score = -(query - cand->col(w)).norm();
        }
        scored.emplace_back(w, score);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    if (top_k > 0 && static_cast<int>(scored.size()) > top_k) scored.resize(top_k);
    return AnalogyQueryResult{std::move(scored)};
}

WeakParaphraseReport weak_paraphrase_projection(const ProbabilityModel& model,
                                                const EmbeddingSet& set,
                                                const std::vector<int>& W, int candidate) {
    require_exact(model, "weak_paraphrase_projection");
    auto w = canonical(W);
    if (set.dim < model.size())
        std::fprintf(stderr,
                     "warning: weak paraphrase identity holds only at full rank (d=%d < n=%d)\n",
                     set.dim, model.size());

    Eigen::VectorXd pW = model.p_ctx_given_set(w);            // p(E|W)
    Eigen::VectorXd pc = model.induced_distribution(candidate);  // p(E|cand)
    WeakParaphraseReport rep;
    for (int j = 0; j < model.size(); ++j) {
        if (pW[j] <= 0 || pc[j] <= 0)
            throw NumericalError("weak paraphrase: zero conditional violates A3");
        rep.kl_w_to_cand += pW[j] * std::log(pW[j] / pc[j]);
        rep.kl_cand_to_w += pc[j] * std::log(pc[j] / pW[j]);
    }

    auto [sigma, tau] = dependence_errors(model, w);
    Eigen::VectorXd chat = set.context() * pW;  // E_{j|W}[c_j]
    double sigma_hat = sigma.dot(pW);
    Eigen::VectorXd wW = Eigen::VectorXd::Zero(set.dim);
    for (int x : w) wW += set.W.col(x);
    double lhs = set.W.col(candidate).dot(chat);
    double rhs = wW.dot(chat) - rep.kl_w_to_cand + sigma_hat - tau;
    rep.hyperplane_residual = std::abs(lhs - rhs);
    return rep;
}

WeakParaphraseArgmin weak_paraphrase_scan(const ProbabilityModel& model, const EmbeddingSet& set,
                                          const std::vector<int>& W) {
    WeakParaphraseArgmin out;
    double best1 = std::numeric_limits<double>::infinity();
    double best2 = std::numeric_limits<double>::infinity();
    for (int cand = 0; cand < model.size(); ++cand) {
        auto rep = weak_paraphrase_projection(model, set, W, cand);
        if (rep.kl_w_to_cand < best1) {
            best1 = rep.kl_w_to_cand;
            out.argmin_w_to_cand = cand;
        }
        if (rep.kl_cand_to_w < best2) {
            best2 = rep.kl_cand_to_w;
            out.argmin_cand_to_w = cand;
        }
        out.per_candidate.push_back(rep);
    }
    return out;
}

double difference_sum(const EmbeddingSet& set, int i, int j) {
    return (set.W.col(i) - set.W.col(j)).sum();
}

AroraReport arora_assumption_check(const EmbeddingSet& set, const ProbabilityModel& model,
                                   int max_pairs, uint64_t seed) {
    const int n = model.size();
    AroraReport rep;
    rep.word_residuals.resize(n);
    const auto& C = set.context();
    for (int i = 0; i < n; ++i) {
        double self = model.p_pair(i, i);
        if (self <= 0 || model.p_target(i) <= 0) {
            rep.word_residuals[i] = kNaN;
            ++rep.skipped_words;
            continue;
        }
        double pred = -0.5 * set.W.col(i).dot(C.col(i)) + 0.5 * std::log(self);
        rep.word_residuals[i] = std::log(model.p_target(i)) - pred;
    }

    auto rng = make_rng(seed);
    std::uniform_int_distribution<int> pick(0, n - 1);
    int attempts = 0;
    while (static_cast<int>(rep.pair_residuals.size()) < max_pairs && attempts < max_pairs * 20) {
        ++attempts;
        int i = pick(rng), j = pick(rng);
        if (i == j) continue;
        double pij = model.p_pair(i, j), pii = model.p_pair(i, i), pjj = model.p_pair(j, j);
        if (pij <= 0 || pii <= 0 || pjj <= 0) continue;
        double pred = -0.5 * (set.W.col(i) - set.W.col(j)).dot(C.col(i) - C.col(j)) +
                      0.5 * std::log(pii * pjj);
        rep.pair_residuals.emplace_back(i, j, std::log(pij) - pred);
    }

    int counted = 0;
    for (int i = 0; i < n; ++i) {
        double r = rep.word_residuals[i];
        if (std::isnan(r)) continue;
        rep.word_mean_abs += std::abs(r);
        rep.word_max_abs = std::max(rep.word_max_abs, std::abs(r));
        ++counted;
    }
    if (counted) rep.word_mean_abs /= counted;
    for (auto& [i, j, r] : rep.pair_residuals) {
        rep.pair_mean_abs += std::abs(r);
        rep.pair_max_abs = std::max(rep.pair_max_abs, std::abs(r));
    }
    if (!rep.pair_residuals.empty()) rep.pair_mean_abs /= rep.pair_residuals.size();
    return rep;
}

double projection_residual(const ProbabilityModel& model, const EmbeddingSet& set, int target,
                           const std::vector<int>& W) {
    auto w = canonical(W);
    Eigen::VectorXd rho = paraphrase_error(model, target, w);
    auto [sigma, tau] = dependence_errors(model, w);
    Eigen::VectorXd err = rho + sigma - tau * Eigen::VectorXd::Ones(model.size());

    Eigen::MatrixXd Cd = set.context().completeOrthogonalDecomposition().pseudoInverse();  // n x d
    Eigen::VectorXd wW = Eigen::VectorXd::Zero(set.dim);
    for (int x : w) wW += set.W.col(x);
    Eigen::VectorXd lhs = set.W.col(target) - wW;
    Eigen::VectorXd rhs = Cd.transpose() * err;
    return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

}  // namespace semvec
