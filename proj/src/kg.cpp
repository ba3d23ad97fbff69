#include "semvec/kg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semvec {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

uint64_t triple_key(const Triple& t) {
    return (static_cast<uint64_t>(t.s) << 40) | (static_cast<uint64_t>(t.r) << 22) |
           static_cast<uint64_t>(t.o);
}

}  // namespace

const std::vector<Triple>& KnowledgeGraph::split(const std::string& name) const {
    if (name == "train") return train;
    if (name == "valid") return valid;
    if (name == "test") return test;
    throw ConfigError("unknown split: " + name);
}

static void add_split(KnowledgeGraph& kg, std::vector<Triple>& out,
                      const std::vector<std::array<std::string, 3>>& rows,
                      const std::string& label) {
    std::unordered_set<uint64_t> seen;
    seen.reserve(rows.size() * 2);
    int dups = 0;
    for (const auto& row : rows) {
        auto ent = [&](const std::string& name) {
            auto it = kg.entity_ids.find(name);
            if (it != kg.entity_ids.end()) return it->second;
            int id = static_cast<int>(kg.entities.size());
            kg.entities.push_back(name);
            kg.entity_ids.emplace(name, id);
            return id;
        };
        auto rel = [&](const std::string& name) {
            auto it = kg.relation_ids.find(name);
            if (it != kg.relation_ids.end()) return it->second;
            int id = static_cast<int>(kg.relations.size());
            kg.relations.push_back(name);
            kg.relation_ids.emplace(name, id);
            return id;
        };
        Triple t{ent(row[0]), rel(row[1]), ent(row[2])};
        if (!seen.insert(triple_key(t)).second) {
            ++dups;
            continue;
        }
        out.push_back(t);
    }
    if (dups > 0)
        std::fprintf(stderr, "warning: %d duplicate triples dropped from %s split\n", dups,
                     label.c_str());
}

KnowledgeGraph kg_from_triples(const std::vector<std::vector<std::array<std::string, 3>>>& splits) {
    if (splits.empty() || splits.size() > 3) throw ConfigError("expected 1..3 splits");
    KnowledgeGraph kg;
    const char* names[] = {"train", "valid", "test"};
    std::vector<Triple>* outs[] = {&kg.train, &kg.valid, &kg.test};
    for (size_t i = 0; i < splits.size(); ++i) add_split(kg, *outs[i], splits[i], names[i]);
    if (kg.entities.empty() || kg.relations.empty())
        throw DataError("knowledge graph has no entities or relations");

    std::vector<char> in_train(kg.entities.size(), 0);
    for (const auto& t : kg.train) {
        in_train[t.s] = 1;
        in_train[t.o] = 1;
    }
    std::unordered_set<int> unseen;
    for (const auto* split : {&kg.valid, &kg.test})
        for (const auto& t : *split) {
            if (!in_train[t.s]) unseen.insert(t.s);
            if (!in_train[t.o]) unseen.insert(t.o);
        }
    kg.unseen_test_entities = static_cast<int>(unseen.size());
    if (kg.unseen_test_entities)
        std::fprintf(stderr, "warning: %d eval entities never appear in train (kept)\n",
                     kg.unseen_test_entities);
    return kg;
}

KnowledgeGraph load_triples(const std::string& dir, const std::vector<std::string>& splits) {
    std::vector<std::vector<std::array<std::string, 3>>> rows;
    for (const auto& split : splits) {
        std::string path = dir + "/" + split + ".txt";
        std::ifstream in(path);
        if (!in) throw DataError("cannot open triple file: " + path);
        std::vector<std::array<std::string, 3>> out;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            std::array<std::string, 3> row;
            size_t t1 = line.find('\t');
            size_t t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
            if (t1 == std::string::npos || t2 == std::string::npos)
                throw DataError(path + ": malformed line " + std::to_string(lineno));
            row[0] = line.substr(0, t1);
            row[1] = line.substr(t1 + 1, t2 - t1 - 1);
            row[2] = line.substr(t2 + 1);
            if (!row[2].empty() && row[2].back() == '\r') row[2].pop_back();
            if (row[0].empty() || row[1].empty() || row[2].empty())
                throw DataError(path + ": malformed line " + std::to_string(lineno));
            out.push_back(std::move(row));
        }
        rows.push_back(std::move(out));
    }
    return kg_from_triples(rows);
}

void load_relation_types(KnowledgeGraph& kg, const std::string& tsv_path) {
    std::ifstream in(tsv_path);
    if (!in) throw DataError("cannot open relation-type file: " + tsv_path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError(tsv_path + ": malformed line " + std::to_string(lineno));
        std::string rel = line.substr(0, tab);
        std::string ty = line.substr(tab + 1);
        if (!ty.empty() && ty.back() == '\r') ty.pop_back();
        if (ty != "R" && ty != "S" && ty != "C")
            throw DataError(tsv_path + ": relation type must be R, S or C at line " +
                            std::to_string(lineno));
        auto it = kg.relation_ids.find(rel);
        if (it == kg.relation_ids.end()) {
            std::fprintf(stderr, "warning: relation-type entry for unknown relation '%s'\n",
                         rel.c_str());
            continue;
        }
        kg.relation_type[it->second] = ty[0];
    }
}

KnowledgeGraph split_nell(const KnowledgeGraph& kg, uint64_t seed) {
    std::vector<Triple> pool;
    pool.reserve(kg.train.size() + kg.valid.size() + kg.test.size());
    for (const auto* s : {&kg.train, &kg.valid, &kg.test})
        pool.insert(pool.end(), s->begin(), s->end());
    if (pool.size() < 25000)
        throw DataError("split_nell: needs at least 25,000 triples, got " +
                        std::to_string(pool.size()));
    auto rng = make_rng(seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    KnowledgeGraph out = kg;
    out.valid.assign(pool.begin(), pool.begin() + 10000);
    out.test.assign(pool.begin() + 10000, pool.begin() + 20000);
    out.train.assign(pool.begin() + 20000, pool.end());
    return out;
}

KgKind kg_kind_from_name(const std::string& name) {
    std::string n = name;
    std::transform(n.begin(), n.end(), n.begin(), ::tolower);
    if (n == "transe") return KgKind::TransE;
    if (n == "distmult") return KgKind::DistMult;
    if (n == "rescal") return KgKind::RESCAL;
    if (n == "complex") return KgKind::ComplEx;
    if (n == "tucker") return KgKind::TuckER;
    if (n == "mure") return KgKind::MuRE;
    if (n == "mure_i" || n == "murei") return KgKind::MuRE_I;
    throw ConfigError("unknown kg model kind: " + name);
}

const char* kg_kind_name(KgKind k) {
    switch (k) {
        case KgKind::TransE: return "transe";
        case KgKind::DistMult: return "distmult";
        case KgKind::RESCAL: return "rescal";
        case KgKind::ComplEx: return "complex";
        case KgKind::TuckER: return "tucker";
        case KgKind::MuRE: return "mure";
        default: return "mure_i";
    }
}

Eigen::MatrixXd KgModel::relation_matrix(int r) const {
    switch (kind) {
        case KgKind::DistMult: return Eigen::MatrixXd(rel_a.col(r).asDiagonal());
        case KgKind::MuRE: return Eigen::MatrixXd(rel_a.col(r).asDiagonal());
        case KgKind::RESCAL: return rel_full[r];
        case KgKind::TuckER: {
            Eigen::MatrixXd R = Eigen::MatrixXd::Zero(de, de);
            for (int a = 0; a < de; ++a)
                for (int b = 0; b < dr; ++b) {
                    double rb = rel_core_vec(b, r);
                    if (rb == 0) continue;
                    for (int c = 0; c < de; ++c)
                        R(a, c) += core[(static_cast<size_t>(a) * dr + b) * de + c] * rb;
                }
            return R;
        }
        default:
            throw ConfigError(std::string("model kind ") + kg_kind_name(kind) +
                              " has no relation matrix");
    }
}

KgModel init_kg_model(KgKind kind, const KnowledgeGraph& kg, int de, int dr, uint64_t seed) {
    if (de < 1) throw ConfigError("entity dimension must be >= 1");
    KgModel m;
    m.kind = kind;
    m.de = de;
    m.dr = kind == KgKind::TuckER ? dr : de;
    m.ne = kg.n_entities();
    m.nr = kg.n_relations();
    m.seed = seed;
    auto rng = make_rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto fill = [&](Eigen::MatrixXd& M, int rows, int cols, double scale) {
        M.resize(rows, cols);
        for (int c = 0; c < cols; ++c)
            for (int r = 0; r < rows; ++r) M(r, c) = scale * gauss(rng);
    };
    double es = 1.0 / std::sqrt(static_cast<double>(de));
    fill(m.E, de, m.ne, es);
    switch (kind) {
        case KgKind::TransE:
        case KgKind::MuRE_I:
            fill(m.rel_a, de, m.nr, es);
            break;
        case KgKind::DistMult:
            fill(m.rel_a, de, m.nr, es);
            break;
        case KgKind::ComplEx:
            fill(m.E_im, de, m.ne, es);
            fill(m.rel_a, de, m.nr, es);
            fill(m.rel_b, de, m.nr, es);
            break;
        case KgKind::RESCAL:
            m.rel_full.resize(m.nr);
            for (auto& R : m.rel_full) fill(R, de, de, es);
            break;
        case KgKind::TuckER: {
            if (dr < 1) throw ConfigError("relation dimension must be >= 1");
            fill(m.rel_core_vec, m.dr, m.nr, 1.0 / std::sqrt(static_cast<double>(m.dr)));
            m.core.resize(static_cast<size_t>(de) * m.dr * de);
            double cs = 1.0 / std::sqrt(static_cast<double>(de) * m.dr);
            for (auto& v : m.core) v = cs * gauss(rng);
            break;
        }
        case KgKind::MuRE:
            fill(m.rel_a, de, m.nr, 0.0);           // diagonal R starts at identity
            m.rel_a.array() += 1.0;
            fill(m.rel_b, de, m.nr, es);
            break;
    }
    if (kind == KgKind::MuRE || kind == KgKind::MuRE_I) {
        m.bias_s = Eigen::VectorXd::Zero(m.ne);
        m.bias_o = Eigen::VectorXd::Zero(m.ne);
    }
    return m;
}

double kg_score(const KgModel& m, int s, int r, int o) {
    switch (m.kind) {
        case KgKind::TransE:
            return -(m.E.col(s) + m.rel_a.col(r) - m.E.col(o)).squaredNorm();
        case KgKind::DistMult:
            return m.E.col(s).cwiseProduct(m.rel_a.col(r)).dot(m.E.col(o));
        case KgKind::RESCAL:
            return m.E.col(s).dot(m.rel_full[r] * m.E.col(o));
        case KgKind::ComplEx: {
            const auto sr = m.E.col(s), si = m.E_im.col(s), rr = m.rel_a.col(r),
                       ri = m.rel_b.col(r), orr = m.E.col(o), oi = m.E_im.col(o);
            double acc = 0;
            for (int d = 0; d < m.de; ++d)
                acc += sr[d] * (rr[d] * orr[d] + ri[d] * oi[d]) +
                       si[d] * (rr[d] * oi[d] - ri[d] * orr[d]);
            return acc;
        }
        case KgKind::TuckER: {
            double acc = 0;
            for (int a = 0; a < m.de; ++a) {
                double sa = m.E(a, s);
                if (sa == 0) continue;
                for (int b = 0; b < m.dr; ++b) {
                    double rb = m.rel_core_vec(b, r);
                    if (rb == 0) continue;
                    const double* slab = &m.core[(static_cast<size_t>(a) * m.dr + b) * m.de];
                    double inner = 0;
                    for (int c = 0; c < m.de; ++c) inner += slab[c] * m.E(c, o);
                    acc += sa * rb * inner;
                }
            }
            return acc;
        }
        case KgKind::MuRE:
            return -(m.rel_a.col(r).cwiseProduct(m.E.col(s)) + m.rel_b.col(r) - m.E.col(o))
                        .squaredNorm() +
                   m.bias_s[s] + m.bias_o[o];
        default:  // MuRE_I
            return -(m.E.col(s) + m.rel_a.col(r) - m.E.col(o)).squaredNorm() + m.bias_s[s] +
                   m.bias_o[o];
    }
}

KgGrads KgGrads::zeros_like(const KgModel& m) {
    KgGrads g;
    g.E = Eigen::MatrixXd::Zero(m.E.rows(), m.E.cols());
    if (m.E_im.size()) g.E_im = Eigen::MatrixXd::Zero(m.E_im.rows(), m.E_im.cols());
    if (m.rel_a.size()) g.rel_a = Eigen::MatrixXd::Zero(m.rel_a.rows(), m.rel_a.cols());
    if (m.rel_b.size()) g.rel_b = Eigen::MatrixXd::Zero(m.rel_b.rows(), m.rel_b.cols());
    for (const auto& R : m.rel_full) g.rel_full.push_back(Eigen::MatrixXd::Zero(R.rows(), R.cols()));
    g.core.assign(m.core.size(), 0.0);
    if (m.rel_core_vec.size())
        g.rel_core_vec = Eigen::MatrixXd::Zero(m.rel_core_vec.rows(), m.rel_core_vec.cols());
    if (m.bias_s.size()) {
        g.bias_s = Eigen::VectorXd::Zero(m.bias_s.size());
        g.bias_o = Eigen::VectorXd::Zero(m.bias_o.size());
    }
    return g;
}

void KgGrads::set_zero() {
    E.setZero();
    if (E_im.size()) E_im.setZero();
    if (rel_a.size()) rel_a.setZero();
    if (rel_b.size()) rel_b.setZero();
    for (auto& R : rel_full) R.setZero();
    std::fill(core.begin(), core.end(), 0.0);
    if (rel_core_vec.size()) rel_core_vec.setZero();
    if (bias_s.size()) {
        bias_s.setZero();
        bias_o.setZero();
    }
}

void kg_score_gradient(const KgModel& m, int s, int r, int o, double scale, KgGrads& g) {
    switch (m.kind) {
        case KgKind::TransE: {
            Eigen::VectorXd u = m.E.col(s) + m.rel_a.col(r) - m.E.col(o);
            g.E.col(s) += scale * (-2.0 * u);
            g.rel_a.col(r) += scale * (-2.0 * u);
            g.E.col(o) += scale * (2.0 * u);
            break;
        }
        case KgKind::DistMult: {
            g.E.col(s) += scale * m.rel_a.col(r).cwiseProduct(m.E.col(o));
            g.rel_a.col(r) += scale * m.E.col(s).cwiseProduct(m.E.col(o));
            g.E.col(o) += scale * m.E.col(s).cwiseProduct(m.rel_a.col(r));
            break;
        }
        case KgKind::RESCAL: {
            g.E.col(s) += scale * (m.rel_full[r] * m.E.col(o));
            g.rel_full[r] += scale * (m.E.col(s) * m.E.col(o).transpose());
            g.E.col(o) += scale * (m.rel_full[r].transpose() * m.E.col(s));
            break;
        }
        case KgKind::ComplEx: {
            const auto sr = m.E.col(s), si = m.E_im.col(s), rr = m.rel_a.col(r),
                       ri = m.rel_b.col(r), orr = m.E.col(o), oi = m.E_im.col(o);
            for (int d = 0; d < m.de; ++d) {
                g.E(d, s) += scale * (rr[d] * orr[d] + ri[d] * oi[d]);
                g.E_im(d, s) += scale * (rr[d] * oi[d] - ri[d] * orr[d]);
                g.rel_a(d, r) += scale * (sr[d] * orr[d] + si[d] * oi[d]);
                g.rel_b(d, r) += scale * (sr[d] * oi[d] - si[d] * orr[d]);
                g.E(d, o) += scale * (sr[d] * rr[d] - si[d] * ri[d]);
                g.E_im(d, o) += scale * (sr[d] * ri[d] + si[d] * rr[d]);
            }
            break;
        }
        case KgKind::TuckER: {
            for (int a = 0; a < m.de; ++a) {
                double sa = m.E(a, s);
                for (int b = 0; b < m.dr; ++b) {
                    double rb = m.rel_core_vec(b, r);
                    const double* slab = &m.core[(static_cast<size_t>(a) * m.dr + b) * m.de];
                    double* gslab = &g.core[(static_cast<size_t>(a) * m.dr + b) * m.de];
                    double inner = 0;
                    for (int c = 0; c < m.de; ++c) {
                        double oc = m.E(c, o);
                        inner += slab[c] * oc;
                        gslab[c] += scale * sa * rb * oc;
                        g.E(c, o) += scale * sa * rb * slab[c];
                    }
                    g.E(a, s) += scale * rb * inner;
                    g.rel_core_vec(b, r) += scale * sa * inner;
                }
            }
            break;
        }
        case KgKind::MuRE: {
            Eigen::VectorXd u =
                m.rel_a.col(r).cwiseProduct(m.E.col(s)) + m.rel_b.col(r) - m.E.col(o);
            g.E.col(s) += scale * (-2.0 * u.cwiseProduct(m.rel_a.col(r)));
            g.rel_a.col(r) += scale * (-2.0 * u.cwiseProduct(m.E.col(s)));
            g.rel_b.col(r) += scale * (-2.0 * u);
            g.E.col(o) += scale * (2.0 * u);
            g.bias_s[s] += scale;
            g.bias_o[o] += scale;
            break;
        }
        default: {  // MuRE_I
            Eigen::VectorXd u = m.E.col(s) + m.rel_a.col(r) - m.E.col(o);
            g.E.col(s) += scale * (-2.0 * u);
            g.rel_a.col(r) += scale * (-2.0 * u);
            g.E.col(o) += scale * (2.0 * u);
            g.bias_s[s] += scale;
            g.bias_o[o] += scale;
            break;
        }
    }
}

// ----- training -----

namespace {

struct ParamView {
    double* p;
    double* g;
    double* m;
    double* v;
    size_t n;
};

struct AdamState {
    KgGrads m, v;
    int64_t t = 0;
};

std::vector<ParamView> param_views(KgModel& model, KgGrads& g, AdamState& st) {
    std::vector<ParamView> views;
    auto add = [&](Eigen::MatrixXd& p, Eigen::MatrixXd& gg, Eigen::MatrixXd& mm,
                   Eigen::MatrixXd& vv) {
        if (p.size()) views.push_back({p.data(), gg.data(), mm.data(), vv.data(),
                                       static_cast<size_t>(p.size())});
    };
    add(model.E, g.E, st.m.E, st.v.E);
    add(model.E_im, g.E_im, st.m.E_im, st.v.E_im);
    add(model.rel_a, g.rel_a, st.m.rel_a, st.v.rel_a);
    add(model.rel_b, g.rel_b, st.m.rel_b, st.v.rel_b);
    for (size_t i = 0; i < model.rel_full.size(); ++i)
        add(model.rel_full[i], g.rel_full[i], st.m.rel_full[i], st.v.rel_full[i]);
    if (!model.core.empty())
        views.push_back({model.core.data(), g.core.data(), st.m.core.data(), st.v.core.data(),
                         model.core.size()});
    add(model.rel_core_vec, g.rel_core_vec, st.m.rel_core_vec, st.v.rel_core_vec);
    if (model.bias_s.size()) {
        views.push_back({model.bias_s.data(), g.bias_s.data(), st.m.bias_s.data(),
                         st.v.bias_s.data(), static_cast<size_t>(model.bias_s.size())});
        views.push_back({model.bias_o.data(), g.bias_o.data(), st.m.bias_o.data(),
                         st.v.bias_o.data(), static_cast<size_t>(model.bias_o.size())});
    }
    return views;
}

void adam_step(std::vector<ParamView>& views, int64_t t, double lr, double b1 = 0.9,
               double b2 = 0.999, double eps = 1e-8) {
    double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (auto& view : views) {
        double* p = view.p;
        double* g = view.g;
        double* m = view.m;
        double* v = view.v;
        const auto n = static_cast<ptrdiff_t>(view.n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
        for (ptrdiff_t i = 0; i < n; ++i) {
            m[i] = b1 * m[i] + (1 - b1) * g[i];
            v[i] = b2 * v[i] + (1 - b2) * g[i] * g[i];
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
}

}  // namespace

double kg_bce_loss(const KgModel& m, const KnowledgeGraph& kg, const std::vector<Triple>& triples,
                   int negs, uint64_t seed) {
    auto rng = make_rng(seed);
    std::uniform_int_distribution<int> pick_entity(0, kg.n_entities() - 1);
    std::uniform_int_distribution<int> coin(0, 1);
    double loss = 0;
    int64_t count = 0;
    for (const auto& t : triples) {
        loss += softplus(-kg_score(m, t.s, t.r, t.o));
        ++count;
        for (int k = 0; k < negs; ++k) {
            Triple neg = t;
            if (coin(rng)) neg.s = pick_entity(rng);
            else neg.o = pick_entity(rng);
            loss += softplus(kg_score(m, neg.s, neg.r, neg.o));
            ++count;
        }
    }
    return count ? loss / static_cast<double>(count) : 0.0;
}

KgModel train_kg(const KnowledgeGraph& kg, KgKind kind, const KgTrainConfig& cfg,
                 std::vector<double>* epoch_losses) {
    if (kg.train.empty()) throw DataError("train split is empty");
    KgModel model = init_kg_model(kind, kg, cfg.de, cfg.dr, cfg.seed);
    KgGrads grads = KgGrads::zeros_like(model);
    AdamState st;
    st.m = KgGrads::zeros_like(model);
    st.v = KgGrads::zeros_like(model);
    auto views = param_views(model, grads, st);

    auto rng = make_rng(cfg.seed ^ 0x9d2c5680ULL);
    std::uniform_int_distribution<int> pick_entity(0, kg.n_entities() - 1);
    std::uniform_int_distribution<int> coin(0, 1);

    std::vector<int> order(kg.train.size());
    std::iota(order.begin(), order.end(), 0);

    KgModel best = model;
    double best_hits = -1.0;
    int stale = 0;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0;
        int64_t examples = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch) {
            size_t stop = std::min(order.size(), start + cfg.batch);
            grads.set_zero();
            int64_t batch_examples = static_cast<int64_t>(stop - start) * (1 + cfg.negs);
            double inv = 1.0 / static_cast<double>(batch_examples);
            for (size_t idx = start; idx < stop; ++idx) {
                const Triple& t = kg.train[order[idx]];
                double phi = kg_score(model, t.s, t.r, t.o);
                epoch_loss += softplus(-phi);
                kg_score_gradient(model, t.s, t.r, t.o, (sigmoid(phi) - 1.0) * inv, grads);
                for (int k = 0; k < cfg.negs; ++k) {
                    Triple neg = t;
                    if (coin(rng)) neg.s = pick_entity(rng);
                    else neg.o = pick_entity(rng);
                    double nphi = kg_score(model, neg.s, neg.r, neg.o);
                    epoch_loss += softplus(nphi);
                    kg_score_gradient(model, neg.s, neg.r, neg.o, sigmoid(nphi) * inv, grads);
                }
            }
            examples += batch_examples;
            adam_step(views, ++st.t, cfg.lr);
        }
        epoch_loss /= static_cast<double>(std::max<int64_t>(1, examples));
        if (!std::isfinite(epoch_loss))
            throw NumericalError("kg training diverged (NaN loss) at epoch " +
                                 std::to_string(epoch));
        if (epoch_losses) epoch_losses->push_back(epoch_loss);
        if (cfg.verbose)
            std::fprintf(stderr, "kg %s epoch %d loss %.6f\n", kg_kind_name(kind), epoch,
                         epoch_loss);

        if (cfg.early_stop && !kg.valid.empty()) {
            double hits = rank_eval(model, kg, "valid").overall.hits10;
            if (hits > best_hits) {
                best_hits = hits;
                best = model;
                stale = 0;
            } else if (++stale >= cfg.patience) {
                if (cfg.verbose)
                    std::fprintf(stderr, "early stop at epoch %d (best valid Hits@10 %.4f)\n",
                                 epoch, best_hits);
                return best;
            }
        }
    }
    if (cfg.early_stop && !kg.valid.empty() && best_hits >= 0) return best;
    return model;
}

// ----- evaluation -----

namespace {

// Scores for (s, r, *) over all entities.
Eigen::VectorXd score_all_objects(const KgModel& m, int s, int r) {
    const int ne = m.ne;
    Eigen::VectorXd out(ne);
    switch (m.kind) {
        case KgKind::TransE:
        case KgKind::MuRE_I:
        case KgKind::MuRE: {
            Eigen::VectorXd t;
            if (m.kind == KgKind::MuRE)
                t = m.rel_a.col(r).cwiseProduct(m.E.col(s)) + m.rel_b.col(r);
            else
                t = m.E.col(s) + m.rel_a.col(r);
            double tn = t.squaredNorm();
            Eigen::VectorXd cross = m.E.transpose() * t;
            Eigen::VectorXd en = m.E.colwise().squaredNorm();
            out = -(tn - 2.0 * cross.array() + en.array());
            if (m.kind != KgKind::TransE)
                out = out + Eigen::VectorXd::Constant(ne, m.bias_s[s]) + m.bias_o;
            break;
        }
        case KgKind::DistMult: {
            Eigen::VectorXd q = m.E.col(s).cwiseProduct(m.rel_a.col(r));
            out = m.E.transpose() * q;
            break;
        }
        case KgKind::RESCAL: {
            Eigen::VectorXd q = m.rel_full[r].transpose() * m.E.col(s);
            out = m.E.transpose() * q;
            break;
        }
        case KgKind::ComplEx: {
            Eigen::VectorXd a = m.E.col(s).cwiseProduct(m.rel_a.col(r)) -
                                m.E_im.col(s).cwiseProduct(m.rel_b.col(r));
            Eigen::VectorXd b = m.E.col(s).cwiseProduct(m.rel_b.col(r)) +
                                m.E_im.col(s).cwiseProduct(m.rel_a.col(r));
            out = m.E.transpose() * a + m.E_im.transpose() * b;
            break;
        }
        case KgKind::TuckER: {
            Eigen::VectorXd q = Eigen::VectorXd::Zero(m.de);
            for (int a = 0; a < m.de; ++a) {
                double sa = m.E(a, s);
                if (sa == 0) continue;
                for (int b = 0; b < m.dr; ++b) {
                    double rb = m.rel_core_vec(b, r);
                    if (rb == 0) continue;
                    const double* slab = &m.core[(static_cast<size_t>(a) * m.dr + b) * m.de];
                    double w = sa * rb;
                    for (int c = 0; c < m.de; ++c) q[c] += w * slab[c];
                }
            }
            out = m.E.transpose() * q;
            break;
        }
    }
    return out;
}

// Scores for (*, r, o) over all entities.
Eigen::VectorXd score_all_subjects(const KgModel& m, int r, int o) {
    const int ne = m.ne;
    Eigen::VectorXd out(ne);
    switch (m.kind) {
        case KgKind::TransE:
        case KgKind::MuRE_I: {
            Eigen::VectorXd t = m.E.col(o) - m.rel_a.col(r);
            double tn = t.squaredNorm();
            Eigen::VectorXd cross = m.E.transpose() * t;
            Eigen::VectorXd en = m.E.colwise().squaredNorm();
            out = -(en.array() - 2.0 * cross.array() + tn);
            if (m.kind == KgKind::MuRE_I)
                out = out + m.bias_s + Eigen::VectorXd::Constant(ne, m.bias_o[o]);
            break;
        }
        case KgKind::MuRE: {
            Eigen::VectorXd t = m.E.col(o) - m.rel_b.col(r);
            Eigen::MatrixXd P = m.rel_a.col(r).asDiagonal() * m.E;  // transformed subjects
            Eigen::VectorXd cross = P.transpose() * t;
            Eigen::VectorXd pn = P.colwise().squaredNorm();
            out = -(pn.array() - 2.0 * cross.array() + t.squaredNorm());
            out = out + m.bias_s + Eigen::VectorXd::Constant(ne, m.bias_o[o]);
            break;
        }
        case KgKind::DistMult: {
            Eigen::VectorXd q = m.E.col(o).cwiseProduct(m.rel_a.col(r));
            out = m.E.transpose() * q;
            break;
        }
        case KgKind::RESCAL: {
            Eigen::VectorXd q = m.rel_full[r] * m.E.col(o);
            out = m.E.transpose() * q;
            break;
        }
        case KgKind::ComplEx: {
            Eigen::VectorXd a = m.rel_a.col(r).cwiseProduct(m.E.col(o)) +
                                m.rel_b.col(r).cwiseProduct(m.E_im.col(o));
            Eigen::VectorXd b = m.rel_a.col(r).cwiseProduct(m.E_im.col(o)) -
                                m.rel_b.col(r).cwiseProduct(m.E.col(o));
            out = m.E.transpose() * a + m.E_im.transpose() * b;
            break;
        }
        case KgKind::TuckER: {
            Eigen::VectorXd q = Eigen::VectorXd::Zero(m.de);
            for (int a = 0; a < m.de; ++a)
                for (int b = 0; b < m.dr; ++b) {
                    double rb = m.rel_core_vec(b, r);
                    if (rb == 0) continue;
                    const double* slab = &m.core[(static_cast<size_t>(a) * m.dr + b) * m.de];
                    double inner = 0;
                    for (int c = 0; c < m.de; ++c) inner += slab[c] * m.E(c, o);
                    q[a] += rb * inner;
                }
            out = m.E.transpose() * q;
            break;
        }
    }
    return out;
}

// Pessimistic rank of `truth`: placed after every candidate scoring >= it.
int pessimistic_rank(const Eigen::VectorXd& scores, int truth,
                     const std::unordered_set<int>* skip) {
    double st = scores[truth];
    int rank = 1;
    for (int e = 0; e < scores.size(); ++e) {
        if (e == truth) continue;
        if (skip && skip->count(e)) continue;
        if (scores[e] >= st) ++rank;
    }
    return rank;
}

}  // namespace

RankResult rank_eval(const KgModel& m, const KnowledgeGraph& kg, const std::string& split,
                     int nthreads, bool filtered) {
    const auto& triples = kg.split(split);
    RankResult res;
    if (triples.empty()) return res;

    // Known-true lookups, only needed for the flagged filtered protocol.
    std::unordered_map<uint64_t, std::unordered_set<int>> true_objects, true_subjects;
    if (filtered) {
        auto add = [&](const Triple& t) {
            true_objects[(static_cast<uint64_t>(t.s) << 22) | t.r].insert(t.o);
            true_subjects[(static_cast<uint64_t>(t.o) << 22) | t.r].insert(t.s);
        };
        for (const auto* sp : {&kg.train, &kg.valid, &kg.test})
            for (const auto& t : *sp) add(t);
    }

    const auto n = static_cast<ptrdiff_t>(triples.size());
    std::vector<int> rank_o(n), rank_s(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(std::max(1, nthreads))
#endif
    for (ptrdiff_t i = 0; i < n; ++i) {
        const Triple& t = triples[i];
        Eigen::VectorXd so = score_all_objects(m, t.s, t.r);
        Eigen::VectorXd ss = score_all_subjects(m, t.r, t.o);
        const std::unordered_set<int>* skip_o = nullptr;
        const std::unordered_set<int>* skip_s = nullptr;
        if (filtered) {
            auto ito = true_objects.find((static_cast<uint64_t>(t.s) << 22) | t.r);
            if (ito != true_objects.end()) skip_o = &ito->second;
            auto its = true_subjects.find((static_cast<uint64_t>(t.o) << 22) | t.r);
            if (its != true_subjects.end()) skip_s = &its->second;
        }
        rank_o[i] = pessimistic_rank(so, t.o, skip_o);
        rank_s[i] = pessimistic_rank(ss, t.s, skip_s);
    }

    auto fold = [](RankStats& st, int rank) {
        st.hits10 += rank <= 10 ? 1.0 : 0.0;
        st.mrr += 1.0 / rank;
        ++st.evals;
    };
    for (ptrdiff_t i = 0; i < n; ++i) {
        fold(res.overall, rank_o[i]);
        fold(res.overall, rank_s[i]);
        auto& pr = res.per_relation[triples[i].r];
        fold(pr, rank_o[i]);
        fold(pr, rank_s[i]);
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

ClassifyResult classify_eval(const KgModel& m, const KnowledgeGraph& kg, int nthreads) {
    // Distinct (e_s, r) pairs from the test split.
    std::vector<std::pair<int, int>> pairs;
    {
        std::unordered_set<uint64_t> seen;
        for (const auto& t : kg.test) {
            uint64_t key = (static_cast<uint64_t>(t.s) << 22) | t.r;
            if (seen.insert(key).second) pairs.emplace_back(t.s, t.r);
        }
    }
    std::unordered_map<uint64_t, std::unordered_set<int>> train_true, eval_true;
    for (const auto& t : kg.train)
        train_true[(static_cast<uint64_t>(t.s) << 22) | t.r].insert(t.o);
    for (const auto* sp : {&kg.valid, &kg.test})
        for (const auto& t : *sp)
            eval_true[(static_cast<uint64_t>(t.s) << 22) | t.r].insert(t.o);

    struct PairOut {
        int r;
        int64_t train_total = 0, train_correct = 0, test_total = 0, test_correct = 0;
        int64_t other = 0;
    };
    std::vector<PairOut> outs(pairs.size());
    const auto np = static_cast<ptrdiff_t>(pairs.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(std::max(1, nthreads))
#endif
    for (ptrdiff_t i = 0; i < np; ++i) {
        auto [s, r] = pairs[i];
        uint64_t key = (static_cast<uint64_t>(s) << 22) | r;
        Eigen::VectorXd scores = score_all_objects(m, s, r);
        PairOut po;
        po.r = r;
        const auto* tt = train_true.count(key) ? &train_true[key] : nullptr;
        const auto* et = eval_true.count(key) ? &eval_true[key] : nullptr;
        for (int o = 0; o < kg.n_entities(); ++o) {
            bool positive = scores[o] > 0.0;  // sigma(phi) > 0.5
            bool is_train = tt && tt->count(o);
            bool is_eval = !is_train && et && et->count(o);
            if (is_train) {
                ++po.train_total;
                po.train_correct += positive;
            } else if (is_eval) {
                ++po.test_total;
                po.test_correct += positive;
            } else if (positive) {
                ++po.other;
            }
        }
        outs[i] = po;
    }

    ClassifyResult res;
    for (const auto& po : outs) {
        auto fold = [&](ClassifyStats& st) {
            st.train_total += po.train_total;
            st.train_correct += po.train_correct;
            st.test_total += po.test_total;
            st.test_correct += po.test_correct;
            st.other_positive += po.other;
            ++st.pairs;
        };
        fold(res.overall);
        fold(res.per_relation[po.r]);
    }
    return res;
}

// ----- serialization -----

void KgModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    const char magic[8] = {'S', 'V', 'K', 'G', '1', 0, 0, 0};
    out.write(magic, 8);
    int32_t header[5] = {static_cast<int32_t>(kind), de, dr, ne, nr};
    out.write(reinterpret_cast<const char*>(header), sizeof(header));
    out.write(reinterpret_cast<const char*>(&seed), sizeof(seed));
    auto write_mat = [&](const Eigen::MatrixXd& M) {
        int64_t dims[2] = {M.rows(), M.cols()};
        out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
        out.write(reinterpret_cast<const char*>(M.data()),
                  static_cast<std::streamsize>(sizeof(double) * M.size()));
    };
    write_mat(E);
    write_mat(E_im);
    write_mat(rel_a);
    write_mat(rel_b);
    int64_t nfull = static_cast<int64_t>(rel_full.size());
    out.write(reinterpret_cast<const char*>(&nfull), sizeof(nfull));
    for (const auto& R : rel_full) write_mat(R);
    int64_t ncore = static_cast<int64_t>(core.size());
    out.write(reinterpret_cast<const char*>(&ncore), sizeof(ncore));
    out.write(reinterpret_cast<const char*>(core.data()),
              static_cast<std::streamsize>(sizeof(double) * core.size()));
    write_mat(rel_core_vec);
    write_mat(bias_s);
    write_mat(bias_o);
}

KgModel KgModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, "SVKG1", 5) != 0)
        throw DataError("not a kg model file: " + path);
    KgModel m;
    int32_t header[5];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    m.kind = static_cast<KgKind>(header[0]);
    m.de = header[1];
    m.dr = header[2];
    m.ne = header[3];
    m.nr = header[4];
    in.read(reinterpret_cast<char*>(&m.seed), sizeof(m.seed));
    auto read_mat = [&](Eigen::MatrixXd& M) {
        int64_t dims[2];
        in.read(reinterpret_cast<char*>(dims), sizeof(dims));
        M.resize(dims[0], dims[1]);
        in.read(reinterpret_cast<char*>(M.data()),
                static_cast<std::streamsize>(sizeof(double) * M.size()));
    };
    read_mat(m.E);
    read_mat(m.E_im);
    read_mat(m.rel_a);
    read_mat(m.rel_b);
    int64_t nfull = 0;
    in.read(reinterpret_cast<char*>(&nfull), sizeof(nfull));
    m.rel_full.resize(nfull);
    for (auto& R : m.rel_full) read_mat(R);
    int64_t ncore = 0;
    in.read(reinterpret_cast<char*>(&ncore), sizeof(ncore));
    m.core.resize(ncore);
    in.read(reinterpret_cast<char*>(m.core.data()),
            static_cast<std::streamsize>(sizeof(double) * m.core.size()));
    Eigen::MatrixXd bs, bo;
    read_mat(m.rel_core_vec);
    read_mat(bs);
    read_mat(bo);
    m.bias_s = bs;
    m.bias_o = bo;
    if (!in) throw DataError("model file truncated: " + path);
    return m;
}

}  // namespace semvec
