// Embedding matrices W, C learned from counts (SGNS logistic loss), from a PMI matrix
// (least squares, tied or untied), or constructed by symmetric eigendecomposition.
#pragma once

#include <Eigen/Dense>
#include <string>

#include "semvec/cooccur.hpp"
#include "semvec/pmi.hpp"

namespace semvec {

enum class LossKind { sgns, lsq, lsq_tied, analytic };
const char* loss_name(LossKind k);

struct EmbeddingSet {
    Eigen::MatrixXd W;  // d x n, columns are word embeddings
    Eigen::MatrixXd C;  // d x n; aliases W when tied
    int dim = 0;
    double k_used = 1.0;
    LossKind loss = LossKind::lsq;
    uint64_t seed = 0;
    int epochs = 0;
    bool tied = false;
    bool has_context = true;  // false when loaded from a single third-party file
    std::vector<std::string> tokens;  // optional dictionary reference

    const Eigen::MatrixXd& context() const { return tied ? W : C; }
    Eigen::MatrixXd mean() const { return 0.5 * (W + context()); }  // A = (W + C)/2
};

struct TrainConfig {
    int dim = 100;
    double k = 1.0;          // negatives per positive (SGNS)
    double lr = 0.01;
    int epochs = 10;
    uint64_t seed = 1;
    bool tied = false;       // LSQ only
    bool distort = true;     // SGNS: context marginal ^0.75 in the negative term
    bool verbose = false;
};

// Expected-loss targets for the SGNS objective, precomputed from counts:
// loss = -sum_ij [ pos_ij log sig(w.c) + neg_ij log sig(-w.c) ],
// pos_ij = #(w_i,c_j)/D, neg_ij = k p(w_i) pn(c_j) (pn optionally distorted).
struct SgnsTargets {
    int n = 0;
    double k = 1.0;
    Eigen::MatrixXd pos;  // n x n
    Eigen::VectorXd p_target;
    Eigen::VectorXd p_noise;
    double neg(int i, int j) const { return k * p_target[i] * p_noise[j]; }
};

SgnsTargets sgns_targets(const CooccurrenceStats& stats, double k, bool distort);

double sgns_loss(const SgnsTargets& t, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C);
// Full-batch analytic gradient; deterministic row-parallel.
void sgns_gradient(const SgnsTargets& t, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C,
                   Eigen::MatrixXd& gW, Eigen::MatrixXd& gC);

double lsq_loss(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C);
void lsq_gradient(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C,
                  Eigen::MatrixXd& gW, Eigen::MatrixXd& gC, bool tied);

EmbeddingSet train_sgns(const CooccurrenceStats& stats, const TrainConfig& cfg,
                        std::vector<double>* epoch_losses = nullptr);
EmbeddingSet train_lsq(const PmiMatrix& pmi, const TrainConfig& cfg,
                       std::vector<double>* epoch_losses = nullptr);

// W = |S|^{1/2} U^T, C = I'W from the d largest-|eigenvalue| pairs of the symmetric input.
EmbeddingSet analytic_factorize(const PmiMatrix& pmi, int d);
EmbeddingSet analytic_factorize(const Eigen::MatrixXd& symmetric, int d);

struct InteractionReport {
    double wc, ww, aa;        // dot products
    double P, E, F;           // matrix entries at (i,j)
    double r_wc, r_ww, r_aa;  // identity residuals
};

// Checks w.c = P-E, w.w = P-E-2F, a.a = P-E-F for an analytic set on its source matrix.
InteractionReport interaction_identities(const EmbeddingSet& set, const Eigen::MatrixXd& P, int i,
                                         int j);

void save_embeddings(const EmbeddingSet& set, const std::string& path);
EmbeddingSet load_embeddings(const std::string& path);

// Deterministic cell visit order covering [0, cells) exactly once per epoch.
class CellPermutation {
public:
    CellPermutation(uint64_t cells, std::mt19937_64& rng);
    uint64_t operator()(uint64_t step) const;

private:
    uint64_t cells_;
    uint64_t stride_ = 1, offset_ = 0;
    std::vector<uint32_t> table_;  // explicit shuffle when small enough
};

}  // namespace semvec
