// Relation-level diagnostics: Krackhardt hierarchy, Hubert-Baker symmetry,
// relation spectra and vector norms, and the per-relation report.
#pragma once

#include <optional>

#include "semvec/kg.hpp"

namespace semvec {

struct KhsResult {
    double khs = 0.0;       // in [0, 1]; 1 for DAGs, 0 for cycles
    int max_path = 0;       // longest shortest path over connected ordered pairs
    double avg_path = 0.0;
    int64_t reachable_pairs = 0;
    int nodes = 0, edges = 0;
};

// Transitive closure of the relation's directed edges (paths of length >= 1),
// from the chosen split (training graph by default).
KhsResult khs(const KnowledgeGraph& kg, int relation, const std::string& split = "train",
              int nthreads = 1);

// Hubert-Baker statistic over off-diagonal entries; +1 symmetric, -1 antisymmetric.
// Exactly symmetric inputs short-circuit to +1; otherwise zero off-diagonal variance
// reports nullopt.
std::optional<double> symmetry_score(const Eigen::MatrixXd& R);

// |eigenvalue| (or |diagonal|) profile sorted descending, scaled by the largest.
std::vector<double> relation_spectrum(const KgModel& model, int relation);

// Euclidean norms of the translation vectors, per relation.
std::vector<double> relation_vector_norms(const KgModel& model);

struct RelationReport {
    std::string name;
    std::string type;  // "R" | "S" | "C" | ""
    double pct_train = 0.0;
    int n_test = 0;
    double khs = 0.0;
    int max_path = 0;
    double avg_path = 0.0;
    std::optional<double> hits10, mrr;
    std::optional<double> accuracy_train, accuracy_test, other_true_avg;
    std::optional<double> symmetry;
    std::optional<double> vec_norm;
    std::vector<double> spectrum;
};

std::vector<RelationReport> diagnose(const KnowledgeGraph& kg, const KgModel* model,
                                     const RankResult* ranks, const ClassifyResult* classes,
                                     int nthreads = 1);

std::string relation_report_json(const std::vector<RelationReport>& reports);

}  // namespace semvec
