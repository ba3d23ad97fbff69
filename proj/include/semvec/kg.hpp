// Knowledge-graph data, the linear link-prediction model zoo, Adam/BCE training,
// and ranking/classification evaluation.
#pragma once

#include <Eigen/Dense>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "semvec/common.hpp"

namespace semvec {

struct Triple {
    int s, r, o;
    bool operator==(const Triple& t) const { return s == t.s && r == t.r && o == t.o; }
};

struct KnowledgeGraph {
    std::vector<std::string> entities, relations;
    std::unordered_map<std::string, int> entity_ids, relation_ids;
    std::vector<Triple> train, valid, test;
    std::unordered_map<int, char> relation_type;  // id -> 'R' | 'S' | 'C'
    int unseen_test_entities = 0;                 // test/valid entities absent from train (kept)

    int n_entities() const { return static_cast<int>(entities.size()); }
    int n_relations() const { return static_cast<int>(relations.size()); }
    const std::vector<Triple>& split(const std::string& name) const;
};

// TSV `head<TAB>relation<TAB>tail` per line; duplicates within a split deduplicated
// with a warning. Dictionaries over the union of splits.
KnowledgeGraph load_triples(const std::string& dir,
                            const std::vector<std::string>& splits = {"train", "valid", "test"});
KnowledgeGraph kg_from_triples(const std::vector<std::vector<std::array<std::string, 3>>>& splits);
void load_relation_types(KnowledgeGraph& kg, const std::string& tsv_path);

// Pools every triple, draws two disjoint 10,000-triple samples for valid/test.
KnowledgeGraph split_nell(const KnowledgeGraph& kg, uint64_t seed);

enum class KgKind { TransE, DistMult, RESCAL, ComplEx, TuckER, MuRE, MuRE_I };
KgKind kg_kind_from_name(const std::string& name);
const char* kg_kind_name(KgKind k);

struct KgModel {
    KgKind kind = KgKind::DistMult;
    int de = 0, dr = 0;
    int ne = 0, nr = 0;
    uint64_t seed = 0;

    Eigen::MatrixXd E;        // de x ne entity embeddings
    Eigen::MatrixXd E_im;     // ComplEx imaginary part
    Eigen::MatrixXd rel_a;    // de x nr: TransE/MuRE_I r; DistMult diag; ComplEx re; MuRE diag R
    Eigen::MatrixXd rel_b;    // de x nr: ComplEx im; MuRE translation r
    std::vector<Eigen::MatrixXd> rel_full;  // RESCAL per-relation matrices
    std::vector<double> core;               // TuckER core, de*dr*de, index [a*dr*de + b*de + c]
    Eigen::MatrixXd rel_core_vec;            // dr x nr TuckER relation vectors
    Eigen::VectorXd bias_s, bias_o;          // MuRE-family per-entity biases

    bool has_relation_matrix() const {
        return kind == KgKind::DistMult || kind == KgKind::RESCAL || kind == KgKind::ComplEx ||
               kind == KgKind::TuckER || kind == KgKind::MuRE;
    }
    bool has_translation() const {
        return kind == KgKind::TransE || kind == KgKind::MuRE || kind == KgKind::MuRE_I;
    }
    // Dense relation matrix for kinds that have one (diagonal kinds expanded).
    Eigen::MatrixXd relation_matrix(int r) const;

    void save(const std::string& path) const;
    static KgModel load(const std::string& path);
};

KgModel init_kg_model(KgKind kind, const KnowledgeGraph& kg, int de, int dr, uint64_t seed);

double kg_score(const KgModel& m, int s, int r, int o);

// Mirrors the model's parameter shapes; score_gradient accumulates scale * dphi/dparam.
struct KgGrads {
    Eigen::MatrixXd E, E_im, rel_a, rel_b;
    std::vector<Eigen::MatrixXd> rel_full;
    std::vector<double> core;
    Eigen::MatrixXd rel_core_vec;
    Eigen::VectorXd bias_s, bias_o;

    static KgGrads zeros_like(const KgModel& m);
    void set_zero();
};

void kg_score_gradient(const KgModel& m, int s, int r, int o, double scale, KgGrads& out);

struct KgTrainConfig {
    int de = 200;
    int dr = 200;    // TuckER default 30 at the CLI
    double lr = 0.001;
    int batch = 128;
    int negs = 50;
    int epochs = 500;
    int patience = 20;  // early stop on validation Hits@10, evaluated each epoch
    uint64_t seed = 1;
    bool verbose = false;
    bool early_stop = true;
};

KgModel train_kg(const KnowledgeGraph& kg, KgKind kind, const KgTrainConfig& cfg,
                 std::vector<double>* epoch_losses = nullptr);

// Mean BCE over positives with `negs` uniform corruptions each (fixed rng stream).
double kg_bce_loss(const KgModel& m, const KnowledgeGraph& kg, const std::vector<Triple>& triples,
                   int negs, uint64_t seed);

struct RankStats {
    double hits10 = 0.0, mrr = 0.0;
    int64_t evals = 0;  // 2 per test triple
};

struct RankResult {
    RankStats overall;
    std::map<int, RankStats> per_relation;
};

// Raw protocol: 2 n_e candidate triples per test triple, pessimistic ties.
// filtered=true additionally skips known-true competitors (behind a flag, not acceptance).
RankResult rank_eval(const KgModel& m, const KnowledgeGraph& kg, const std::string& split,
                     int nthreads = 1, bool filtered = false);

struct ClassifyStats {
    int64_t train_total = 0, train_correct = 0;
    int64_t test_total = 0, test_correct = 0;
    int64_t other_positive = 0;
    int64_t pairs = 0;
    double accuracy_train() const {
        return train_total ? static_cast<double>(train_correct) / train_total : 0.0;
    }
    double accuracy_test() const {
        return test_total ? static_cast<double>(test_correct) / test_total : 0.0;
    }
    double other_avg() const {
        return pairs ? static_cast<double>(other_positive) / pairs : 0.0;
    }
};

struct ClassifyResult {
    ClassifyStats overall;
    std::map<int, ClassifyStats> per_relation;
};

// Enumerates all objects for each (e_s, r) pair appearing in the test split;
// positive prediction = sigma(phi) > 0.5. Known truths split into train vs test/valid.
ClassifyResult classify_eval(const KgModel& m, const KnowledgeGraph& kg, int nthreads = 1);

}  // namespace semvec
