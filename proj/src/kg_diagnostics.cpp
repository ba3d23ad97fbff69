#include "semvec/kg_diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <queue>

#include "json.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semvec {

KhsResult khs(const KnowledgeGraph& kg, int relation, const std::string& split, int nthreads) {
    const auto& triples = kg.split(split);
    std::vector<std::pair<int, int>> edges;
    for (const auto& t : triples)
        if (t.r == relation) edges.emplace_back(t.s, t.o);
    if (edges.empty()) throw DataError("relation has no edges in split " + split);

    // Compact to active nodes.
    std::unordered_map<int, int> remap;
    for (auto& [s, o] : edges) {
        if (!remap.count(s)) remap.emplace(s, static_cast<int>(remap.size()));
        if (!remap.count(o)) remap.emplace(o, static_cast<int>(remap.size()));
    }
    const int n = static_cast<int>(remap.size());
    std::vector<std::vector<int>> adj(n);
    for (auto& [s, o] : edges) adj[remap[s]].push_back(remap[o]);

    // Row-per-source BFS over paths of length >= 1; rows are independent.
    const size_t words = (static_cast<size_t>(n) + 63) / 64;
    std::vector<uint64_t> reach(static_cast<size_t>(n) * words, 0);
    std::vector<int64_t> row_pairs(n, 0);
    std::vector<int64_t> row_dist_sum(n, 0);
    std::vector<int> row_max(n, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(std::max(1, nthreads))
#endif
    for (int src = 0; src < n; ++src) {
        std::vector<int> dist(n, -1);
        std::queue<int> q;
        for (int v : adj[src])
            if (dist[v] < 0) {
                dist[v] = 1;
                q.push(v);
            }
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    q.push(v);
                }
        }
        uint64_t* row = &reach[static_cast<size_t>(src) * words];
        for (int v = 0; v < n; ++v)
            if (dist[v] > 0) {
                row[static_cast<size_t>(v) / 64] |= 1ULL << (v % 64);
                ++row_pairs[src];
                row_dist_sum[src] += dist[v];
                row_max[src] = std::max(row_max[src], dist[v]);
            }
    }

    KhsResult res;
    res.nodes = n;
    res.edges = static_cast<int>(edges.size());
    int64_t reachable = 0, one_way = 0, dist_total = 0;
    for (int i = 0; i < n; ++i) {
        reachable += row_pairs[i];
        dist_total += row_dist_sum[i];
        res.max_path = std::max(res.max_path, row_max[i]);
        const uint64_t* ri = &reach[static_cast<size_t>(i) * words];
        for (int j = 0; j < n; ++j) {
            if (!(ri[static_cast<size_t>(j) / 64] >> (j % 64) & 1ULL)) continue;
            const uint64_t* rj = &reach[static_cast<size_t>(j) * words];
            if (!(rj[static_cast<size_t>(i) / 64] >> (i % 64) & 1ULL)) ++one_way;
        }
    }
    res.reachable_pairs = reachable;
    res.khs = reachable ? static_cast<double>(one_way) / static_cast<double>(reachable) : 1.0;
    res.avg_path = reachable ? static_cast<double>(dist_total) / static_cast<double>(reachable) : 0.0;
    return res;
}

std::optional<double> symmetry_score(const Eigen::MatrixXd& R) {
    const int d = static_cast<int>(R.rows());
    if (R.cols() != d || d < 2) throw ConfigError("symmetry_score: square matrix, d >= 2");
    if ((R - R.transpose()).lpNorm<Eigen::Infinity>() == 0.0) return 1.0;

    double sum = 0, sum_sq = 0, sum_cross = 0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (i == j) continue;
            sum += R(i, j);
            sum_sq += R(i, j) * R(i, j);
            sum_cross += R(i, j) * R(j, i);
        }
    double mean_term = sum * sum / (static_cast<double>(d) * (d - 1));
    double den = sum_sq - mean_term;
    if (den <= 0) return std::nullopt;  // zero off-diagonal variance
    return (sum_cross - mean_term) / den;
}

std::vector<double> relation_spectrum(const KgModel& model, int relation) {
    std::vector<double> mags;
    switch (model.kind) {
        case KgKind::DistMult:
        case KgKind::MuRE:
            for (int i = 0; i < model.de; ++i)
                mags.push_back(std::abs(model.rel_a(i, relation)));
            break;
        case KgKind::ComplEx:
            for (int i = 0; i < model.de; ++i)
                mags.push_back(std::hypot(model.rel_a(i, relation), model.rel_b(i, relation)));
            break;
        case KgKind::RESCAL:
        case KgKind::TuckER: {
            Eigen::MatrixXd R = model.relation_matrix(relation);
            Eigen::EigenSolver<Eigen::MatrixXd> eig(R, false);
            for (int i = 0; i < R.rows(); ++i) mags.push_back(std::abs(eig.eigenvalues()[i]));
            break;
        }
        default:
            throw ConfigError(std::string("relation_spectrum: kind ") + kg_kind_name(model.kind) +
                              " has no relation matrix");
    }
    std::sort(mags.begin(), mags.end(), std::greater<double>());
    double top = mags.empty() ? 0.0 : mags.front();
    if (top > 0)
        for (auto& v : mags) v /= top;
    return mags;
}

std::vector<double> relation_vector_norms(const KgModel& model) {
    if (!model.has_translation())
        throw ConfigError(std::string("relation_vector_norms: kind ") +
                          kg_kind_name(model.kind) + " has no translation vector");
    const Eigen::MatrixXd& r = model.kind == KgKind::MuRE ? model.rel_b : model.rel_a;
    std::vector<double> norms(model.nr);
    for (int i = 0; i < model.nr; ++i) norms[i] = r.col(i).norm();
    return norms;
}

std::vector<RelationReport> diagnose(const KnowledgeGraph& kg, const KgModel* model,
                                     const RankResult* ranks, const ClassifyResult* classes,
                                     int nthreads) {
    std::vector<RelationReport> out;
    std::vector<int64_t> train_count(kg.n_relations(), 0), test_count(kg.n_relations(), 0);
    for (const auto& t : kg.train) ++train_count[t.r];
    for (const auto& t : kg.test) ++test_count[t.r];

    std::vector<double> norms;
    if (model && model->has_translation()) norms = relation_vector_norms(*model);

    for (int r = 0; r < kg.n_relations(); ++r) {
        RelationReport rep;
        rep.name = kg.relations[r];
        if (auto it = kg.relation_type.find(r); it != kg.relation_type.end())
            rep.type = std::string(1, it->second);
        rep.pct_train = kg.train.empty()
                            ? 0.0
                            : static_cast<double>(train_count[r]) / kg.train.size();
        rep.n_test = static_cast<int>(test_count[r]);
        if (train_count[r] > 0) {
            KhsResult k = khs(kg, r, "train", nthreads);
            rep.khs = k.khs;
            rep.max_path = k.max_path;
            rep.avg_path = k.avg_path;
        }
        if (ranks) {
            auto it = ranks->per_relation.find(r);
            if (it != ranks->per_relation.end()) {
                rep.hits10 = it->second.hits10;
                rep.mrr = it->second.mrr;
            }
        }
        if (classes) {
            auto it = classes->per_relation.find(r);
            if (it != classes->per_relation.end()) {
                rep.accuracy_train = it->second.accuracy_train();
                rep.accuracy_test = it->second.accuracy_test();
                rep.other_true_avg = it->second.other_avg();
            }
        }
        if (model) {
            if (model->has_relation_matrix()) {
                rep.symmetry = symmetry_score(model->relation_matrix(r));
                rep.spectrum = relation_spectrum(*model, r);
            }
            if (!norms.empty()) rep.vec_norm = norms[r];
        }
        out.push_back(std::move(rep));
    }
    return out;
}

std::string relation_report_json(const std::vector<RelationReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        nlohmann::json j;
        j["relation"] = r.name;
        j["type"] = r.type.empty() ? nlohmann::json(nullptr) : nlohmann::json(r.type);
        j["pct_train"] = r.pct_train;
        j["n_test"] = r.n_test;
        j["khs"] = r.khs;
        j["max_path"] = r.max_path;
        j["avg_path"] = r.avg_path;
        auto opt = [](const std::optional<double>& v) {
            return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
        };
        j["hits10"] = opt(r.hits10);
        j["mrr"] = opt(r.mrr);
        j["accuracy_train"] = opt(r.accuracy_train);
        j["accuracy_test"] = opt(r.accuracy_test);
        j["other_true_avg"] = opt(r.other_true_avg);
        j["symmetry"] = opt(r.symmetry);
        j["vec_norm"] = opt(r.vec_norm);
        j["spectrum"] = r.spectrum;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

}  // namespace semvec
