#include "semvec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semvec {

WordSimDataset load_wordsim(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open word similarity file: " + path);
    WordSimDataset ds;
    ds.name = path;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        for (auto& ch : line)
            if (ch == ',' || ch == '\t') ch = ' ';
        std::istringstream ss(line);
        std::string w1, w2;
        double score;
        if (!(ss >> w1 >> w2 >> score))
            throw DataError("word similarity parse error at line " + std::to_string(lineno));
        if (!std::isfinite(score))
            throw DataError("non-finite score at line " + std::to_string(lineno));
        ds.pairs.emplace_back(w1, w2, score);
    }
    if (ds.pairs.empty()) throw DataError("empty word similarity file: " + path);
    return ds;
}

AnalogyDataset load_analogy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open analogy file: " + path);
    AnalogyDataset ds;
    ds.name = path;
    std::string line;
    int lineno = 0;
    int section = -1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == ':') {
            std::string label = line.substr(1);
            label.erase(0, label.find_first_not_of(" \t"));
            ds.sections.push_back(label);
            section = static_cast<int>(ds.sections.size()) - 1;
            continue;
        }
        std::istringstream ss(line);
        std::array<std::string, 4> q;
        if (!(ss >> q[0] >> q[1] >> q[2] >> q[3]))
            throw DataError("analogy parse error at line " + std::to_string(lineno));
        if (section < 0) {
            ds.sections.push_back("default");
            section = 0;
        }
        ds.questions.push_back(q);
        ds.section_of.push_back(section);
    }
    if (ds.questions.empty()) throw DataError("empty analogy file: " + path);
    return ds;
}

static std::vector<double> ranks_with_ties(const std::vector<double>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::vector<double> r(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
        double avg = 0.5 * (i + j) + 1.0;  // average rank for the tie block
        for (int k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty()) throw ConfigError("spearman: size mismatch");
    auto ra = ranks_with_ties(a);
    auto rb = ranks_with_ties(b);
    double ma = 0, mb = 0;
    for (size_t i = 0; i < ra.size(); ++i) {
        ma += ra[i];
        mb += rb[i];
    }
    ma /= ra.size();
    mb /= rb.size();
    double num = 0, da = 0, db = 0;
    for (size_t i = 0; i < ra.size(); ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        da += (ra[i] - ma) * (ra[i] - ma);
        db += (rb[i] - mb) * (rb[i] - mb);
    }
    if (da == 0 || db == 0) throw NumericalError("spearman: zero rank variance");
    return num / std::sqrt(da * db);
}

static std::unordered_map<std::string, int> index_tokens(const std::vector<std::string>& tokens) {
    std::unordered_map<std::string, int> m;
    m.reserve(tokens.size());
    for (size_t i = 0; i < tokens.size(); ++i) m.emplace(tokens[i], static_cast<int>(i));
    return m;
}

WordSimResult eval_wordsim(const EmbeddingSet& set, const std::vector<std::string>& vocab_tokens,
                           const WordSimDataset& data, Interaction interaction) {
    auto vocab = index_tokens(vocab_tokens);
    const Eigen::MatrixXd& W = set.W;
    const Eigen::MatrixXd& C = set.context();
    Eigen::MatrixXd A;
    if (interaction == Interaction::AA) A = set.mean();

    std::vector<double> human, predicted;
    WordSimResult res;
    for (const auto& [w1, w2, score] : data.pairs) {
        auto i1 = vocab.find(w1);
        auto i2 = vocab.find(w2);
        if (i1 == vocab.end() || i2 == vocab.end()) {
            ++res.oov;
            continue;
        }
        int a = i1->second, b = i2->second;
        auto cos = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
            double nx = x.norm(), ny = y.norm();
            return nx > 0 && ny > 0 ? x.dot(y) / (nx * ny) : 0.0;
        };
        double sim;
        switch (interaction) {
            case Interaction::WW: sim = cos(W.col(a), W.col(b)); break;
            case Interaction::WC: sim = 0.5 * (cos(W.col(a), C.col(b)) + cos(C.col(a), W.col(b))); break;
            default: sim = cos(A.col(a), A.col(b)); break;
        }
        human.push_back(score);
        predicted.push_back(sim);
    }
    res.scored = static_cast<int>(human.size());
    if (res.scored < 5) throw DataError("fewer than 5 scorable word pairs after OOV filtering");
    res.rho = spearman(predicted, human);
    return res;
}

AnalogyEvalResult eval_analogies(const EmbeddingSet& set,
                                 const std::vector<std::string>& vocab_tokens,
                                 const AnalogyDataset& data, AnalogyMethod method, bool exclude,
                                 RankMetric metric, Interaction interaction, int nthreads) {
    auto vocab = index_tokens(vocab_tokens);
    struct Q {
        int a, as, b, bs, section;
    };
    std::vector<Q> qs;
    AnalogyEvalResult res;
    for (size_t i = 0; i < data.questions.size(); ++i) {
        const auto& q = data.questions[i];
        int ids[4];
        bool ok = true;
        for (int k = 0; k < 4; ++k) {
            auto it = vocab.find(q[k]);
            if (it == vocab.end()) {
                ok = false;
                break;
            }
            ids[k] = it->second;
        }
        if (!ok) {
            ++res.oov;
            continue;
        }
        qs.push_back(Q{ids[0], ids[1], ids[2], ids[3], data.section_of[i]});
    }
    res.scored = static_cast<int>(qs.size());
    if (res.scored < 5) throw DataError("fewer than 5 scorable analogy questions after filtering");

    // mean_offset averages (a, a*) offsets over the question's section grouping.
    std::vector<std::vector<std::pair<int, int>>> section_pairs;
    if (method == AnalogyMethod::mean_offset) {
        section_pairs.resize(data.sections.size());
        for (const auto& q : qs) section_pairs[q.section].emplace_back(q.a, q.as);
    }

    std::vector<char> correct(qs.size(), 0);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(std::max(1, nthreads))
#endif
    for (size_t i = 0; i < qs.size(); ++i) {
        const auto* pairs = method == AnalogyMethod::mean_offset
                                ? &section_pairs[qs[i].section]
                                : nullptr;
        auto r = solve_analogy(set, qs[i].a, qs[i].as, qs[i].b, method, exclude, interaction,
                               metric, pairs, 1);
        correct[i] = !r.ranked.empty() && r.ranked.front().first == qs[i].bs;
    }

    std::vector<int> sec_total(data.sections.size(), 0), sec_correct(data.sections.size(), 0);
    int total_correct = 0;
    for (size_t i = 0; i < qs.size(); ++i) {
        ++sec_total[qs[i].section];
        if (correct[i]) {
            ++sec_correct[qs[i].section];
            ++total_correct;
        }
    }
    res.accuracy = static_cast<double>(total_correct) / static_cast<double>(qs.size());
    for (size_t s = 0; s < data.sections.size(); ++s)
        if (sec_total[s] > 0)
            res.per_section.emplace_back(data.sections[s],
                                         static_cast<double>(sec_correct[s]) / sec_total[s]);
    return res;
}

}  // namespace semvec
