// Shared test utilities: independent oracles and toy builders.
#pragma once

#include <functional>
#include <random>
#include <vector>

#include "semvec/factorize.hpp"
#include "semvec/kg.hpp"

namespace testutil {

using namespace semvec;

// Enumerate every scalar parameter of a model as (pointer, count) blocks.
inline std::vector<std::pair<double*, size_t>> kg_param_blocks(KgModel& m) {
    std::vector<std::pair<double*, size_t>> blocks;
    auto add = [&](Eigen::MatrixXd& M) {
        if (M.size()) blocks.emplace_back(M.data(), static_cast<size_t>(M.size()));
    };
    add(m.E);
    add(m.E_im);
    add(m.rel_a);
    add(m.rel_b);
    for (auto& R : m.rel_full) add(R);
    if (!m.core.empty()) blocks.emplace_back(m.core.data(), m.core.size());
    add(m.rel_core_vec);
    if (m.bias_s.size()) {
        blocks.emplace_back(m.bias_s.data(), static_cast<size_t>(m.bias_s.size()));
        blocks.emplace_back(m.bias_o.data(), static_cast<size_t>(m.bias_o.size()));
    }
    return blocks;
}

inline std::vector<std::pair<const double*, size_t>> kg_grad_blocks(const KgGrads& g) {
    std::vector<std::pair<const double*, size_t>> blocks;
    auto add = [&](const Eigen::MatrixXd& M) {
        if (M.size()) blocks.emplace_back(M.data(), static_cast<size_t>(M.size()));
    };
    add(g.E);
    add(g.E_im);
    add(g.rel_a);
    add(g.rel_b);
    for (auto& R : g.rel_full) add(R);
    if (!g.core.empty()) blocks.emplace_back(g.core.data(), g.core.size());
    add(g.rel_core_vec);
    if (g.bias_s.size()) {
        blocks.emplace_back(g.bias_s.data(), static_cast<size_t>(g.bias_s.size()));
        blocks.emplace_back(g.bias_o.data(), static_cast<size_t>(g.bias_o.size()));
    }
    return blocks;
}

// Max relative error between analytic score gradient and central finite differences.
inline double kg_fd_max_rel_error(KgModel& m, int s, int r, int o, double h = 1e-6) {
    KgGrads grads = KgGrads::zeros_like(m);
    kg_score_gradient(m, s, r, o, 1.0, grads);
    auto params = kg_param_blocks(m);
    auto analytic = kg_grad_blocks(grads);
    double worst = 0.0;
    for (size_t b = 0; b < params.size(); ++b) {
        auto [p, count] = params[b];
        auto [g, gcount] = analytic[b];
        (void)gcount;
        for (size_t i = 0; i < count; ++i) {
            double orig = p[i];
            p[i] = orig + h;
            double up = kg_score(m, s, r, o);
            p[i] = orig - h;
            double dn = kg_score(m, s, r, o);
            p[i] = orig;
            double fd = (up - dn) / (2 * h);
            double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-4});
            worst = std::max(worst, std::abs(fd - g[i]) / denom);
        }
    }
    return worst;
}

// Brute-force raw ranking oracle: candidate-by-candidate kg_score, pessimistic ties.
inline RankResult brute_force_rank(const KgModel& m, const KnowledgeGraph& kg,
                                   const std::string& split) {
    RankResult res;
    auto fold = [](RankStats& st, int rank) {
        st.hits10 += rank <= 10;
        st.mrr += 1.0 / rank;
        ++st.evals;
    };
    for (const auto& t : kg.split(split)) {
        double truth_o = kg_score(m, t.s, t.r, t.o);
        int rank_o = 1;
        for (int e = 0; e < kg.n_entities(); ++e)
            if (e != t.o && kg_score(m, t.s, t.r, e) >= truth_o) ++rank_o;
        double truth_s = kg_score(m, t.s, t.r, t.o);
        int rank_s = 1;
        for (int e = 0; e < kg.n_entities(); ++e)
            if (e != t.s && kg_score(m, e, t.r, t.o) >= truth_s) ++rank_s;
        fold(res.overall, rank_o);
        fold(res.overall, rank_s);
        auto& pr = res.per_relation[t.r];
        fold(pr, rank_o);
        fold(pr, rank_s);
    }
    auto finish = [](RankStats& st) {
        if (st.evals) {
            st.hits10 /= static_cast<double>(st.evals);
            st.mrr /= static_cast<double>(st.evals);
        }
    };
    finish(res.overall);
    for (auto& [r, st] : res.per_relation) finish(st);
    return res;
}

// Random toy graph with string names; deterministic under seed.
inline KnowledgeGraph random_kg(int ne, int nr, int ntrain, int nvalid, int ntest, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pe(0, ne - 1), pr(0, nr - 1);
    std::vector<std::vector<std::array<std::string, 3>>> splits(3);
    auto draw = [&](int count, std::vector<std::array<std::string, 3>>& out) {
        while (static_cast<int>(out.size()) < count) {
            out.push_back({"e" + std::to_string(pe(rng)), "r" + std::to_string(pr(rng)),
                           "e" + std::to_string(pe(rng))});
        }
    };
    draw(ntrain, splits[0]);
    draw(nvalid, splits[1]);
    draw(ntest, splits[2]);
    return kg_from_triples(splits);
}

}  // namespace testutil
