#include "semvec/pmi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"

namespace semvec {

namespace {

int64_t ipow(int base, int exp) {
    int64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

ExactWindowModel::ExactWindowModel(int n, int m, std::vector<double> q)
    : n_(n), m_(m), q_(std::move(q)), marg_cache_(m + 1) {}

ExactWindowModel ExactWindowModel::from_table(int n, int m, std::vector<double> probs) {
    if (n < 2 || n > 8) throw ConfigError("exact model dictionary size must be in [2, 8]");
    if (m < 2) throw ConfigError("exact model window length must be >= 2");
    int64_t size = ipow(n, m);
    if (size > (1 << 24)) throw ConfigError("exact model table too large");
    if (static_cast<int64_t>(probs.size()) != size)
        throw ConfigError("exact model table has wrong size");
    double sum = 0.0;
    for (double p : probs) {
        if (p < 0.0) throw ConfigError("exact model probabilities must be non-negative");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("exact model spec does not sum to 1");

    // Symmetrize over coordinate permutations: average within each multiset orbit.
    std::vector<double> sym(probs.size(), 0.0);
    std::map<std::vector<int>, std::pair<double, int64_t>> orbit;
    std::vector<int> tup(m);
    for (int64_t idx = 0; idx < size; ++idx) {
        int64_t rest = idx;
        for (int p = m - 1; p >= 0; --p) {
            tup[p] = static_cast<int>(rest % n);
            rest /= n;
        }
        std::vector<int> key = tup;
        std::sort(key.begin(), key.end());
        auto& [s, c] = orbit[key];
        s += probs[idx];
        ++c;
    }
    for (int64_t idx = 0; idx < size; ++idx) {
        int64_t rest = idx;
        for (int p = m - 1; p >= 0; --p) {
            tup[p] = static_cast<int>(rest % n);
            rest /= n;
        }
        std::vector<int> key = tup;
        std::sort(key.begin(), key.end());
        const auto& [s, c] = orbit[key];
        sym[idx] = s / static_cast<double>(c);
    }
    return ExactWindowModel(n, m, std::move(sym));
}

ExactWindowModel ExactWindowModel::dirichlet(int n, int m, double alpha, uint64_t seed) {
    auto rng = make_rng(seed);
    std::gamma_distribution<double> gamma(alpha, 1.0);
    std::vector<double> probs(ipow(n, m));
    double sum = 0.0;
    for (auto& p : probs) {
        p = gamma(rng) + 1e-12;  // strictly positive for A3
        sum += p;
    }
    for (auto& p : probs) p /= sum;
    return from_table(n, m, std::move(probs));
}

ExactWindowModel ExactWindowModel::independent(int n, int m, const Eigen::VectorXd& unigram) {
    if (unigram.size() != n) throw ConfigError("unigram size mismatch");
    std::vector<double> probs(ipow(n, m));
    for (int64_t idx = 0; idx < static_cast<int64_t>(probs.size()); ++idx) {
        double p = 1.0;
        int64_t rest = idx;
        for (int pos = 0; pos < m; ++pos) {
            p *= unigram[rest % n];
            rest /= n;
        }
        probs[idx] = p;
    }
    double sum = 0;
    for (double p : probs) sum += p;
    for (auto& p : probs) p /= sum;
    return from_table(n, m, std::move(probs));
}

ExactWindowModel ExactWindowModel::from_json_file(const std::string& path,
                                                  std::vector<std::string>* words_out) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open distribution spec: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(std::string("distribution spec parse error: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        std::string k = it.key();
        if (k != "words" && k != "window" && k != "probs" && k != "dirichlet")
            throw ConfigError("unknown key in distribution spec: " + k);
    }
    if (!j.contains("words")) throw ConfigError("distribution spec missing 'words'");
    auto words = j["words"].get<std::vector<std::string>>();
    int n = static_cast<int>(words.size());
    int m = j.value("window", 3);
    if (words_out) *words_out = words;
    if (j.contains("probs"))
        return from_table(n, m, j["probs"].get<std::vector<double>>());
    if (j.contains("dirichlet")) {
        double alpha = j["dirichlet"].value("alpha", 1.0);
        uint64_t seed = j["dirichlet"].value("seed", 0ULL);
        return dirichlet(n, m, alpha, seed);
    }
    throw ConfigError("distribution spec needs 'probs' or 'dirichlet'");
}

const std::vector<double>& ExactWindowModel::marginal_table(int order) const {
    if (order < 0 || order > m_) throw ConfigError("marginal order out of range");
    if (!marg_cache_[order].empty()) return marg_cache_[order];
    if (order == m_) {
        marg_cache_[order] = q_;
        return marg_cache_[order];
    }
    const auto& up = marginal_table(order + 1);  // recursive fill from the full table
    std::vector<double> tab(ipow(n_, order), 0.0);
    for (size_t idx = 0; idx < up.size(); ++idx) tab[idx / n_] += up[idx];
    marg_cache_[order] = std::move(tab);
    return marg_cache_[order];
}

double ExactWindowModel::marginal(const std::vector<int>& words) const {
    int k = static_cast<int>(words.size());
    if (k > m_) throw ConfigError("marginal order exceeds window length");
    const auto& tab = marginal_table(k);
    int64_t idx = 0;
    for (int w : words) {
        if (w < 0 || w >= n_) throw DataError("word id out of range");
        idx = idx * n_ + w;
    }
    return tab[idx];
}

double ExactWindowModel::p_word(int i) const { return marginal({i}); }
double ExactWindowModel::p_pair(int i, int j) const { return marginal({i, j}); }
double ExactWindowModel::p_set(const std::vector<int>& set) const { return marginal(set); }

Eigen::VectorXd ExactWindowModel::p_ctx_given_set(const std::vector<int>& set) const {
    if (static_cast<int>(set.size()) + 1 > m_)
        throw ConfigError("set too large for window length");
    double ps = marginal(set);
    if (ps <= 0) throw NumericalError("p(W) = 0: A3 positivity violated");
    Eigen::VectorXd out(n_);
    std::vector<int> ext = set;
    ext.push_back(0);
    for (int c = 0; c < n_; ++c) {
        ext.back() = c;
        out[c] = marginal(ext) / ps;
    }
    return out;
}

Eigen::VectorXd ExactWindowModel::p_set_given_ctx(const std::vector<int>& set) const {
    if (static_cast<int>(set.size()) + 1 > m_)
        throw ConfigError("set too large for window length");
    Eigen::VectorXd out(n_);
    std::vector<int> ext;
    ext.reserve(set.size() + 1);
    for (int c = 0; c < n_; ++c) {
        double pc = p_word(c);
        if (pc <= 0) throw NumericalError("p(c) = 0: A3 positivity violated");
        ext.assign(1, c);
        ext.insert(ext.end(), set.begin(), set.end());
        out[c] = marginal(ext) / pc;
    }
    return out;
}

ProbabilityModel ProbabilityModel::from_stats(const CooccurrenceStats& stats,
                                              const std::vector<JointStats>& joints) {
    double d = stats.total_weight();
    if (d <= 0) throw DataError("cannot estimate probabilities: D = 0");
    ProbabilityModel m;
    m.n_ = stats.vocab_size();
    m.p_target_.resize(m.n_);
    m.p_context_.resize(m.n_);
    for (int i = 0; i < m.n_; ++i) {
        m.p_target_[i] = stats.target_weight(i) / d;
        m.p_context_[i] = stats.context_weight(i) / d;
    }
    double scale = static_cast<double>(stats.scale());
    for (const auto& [key, num] : stats.raw_cells())
        m.p_pair_[key] = static_cast<double>(num) / scale / d;

    for (const auto& js : joints) {
        JointTable jt;
        jt.words = js.words;
        jt.p_set = static_cast<double>(js.set_count) / static_cast<double>(js.n_windows);
        jt.p_ctx_given_set = Eigen::VectorXd::Zero(m.n_);
        jt.p_set_given_ctx = Eigen::VectorXd::Zero(m.n_);
        int64_t ctx_total = 0;
        for (const auto& [c, v] : js.set_context) ctx_total += v;
        for (const auto& [c, v] : js.set_context) {
            if (ctx_total > 0)
                jt.p_ctx_given_set[c] = static_cast<double>(v) / static_cast<double>(ctx_total);
            if (js.context_incidence[c] > 0)
                jt.p_set_given_ctx[c] =
                    static_cast<double>(v) / static_cast<double>(js.context_incidence[c]);
        }
        m.joints_.push_back(std::move(jt));
    }
    return m;
}

ProbabilityModel ProbabilityModel::from_exact(ExactWindowModel model) {
    ProbabilityModel m;
    m.n_ = model.dict_size();
    m.exact_ = std::make_shared<const ExactWindowModel>(std::move(model));
    m.p_target_.resize(m.n_);
    m.p_context_.resize(m.n_);
    for (int i = 0; i < m.n_; ++i) {
        m.p_target_[i] = m.exact_->p_word(i);
        m.p_context_[i] = m.exact_->p_word(i);
    }
    for (int i = 0; i < m.n_; ++i)
        for (int j = 0; j < m.n_; ++j) m.p_pair_[pair_key(i, j)] = m.exact_->p_pair(i, j);
    return m;
}

double ProbabilityModel::p_pair(int i, int j) const {
    auto it = p_pair_.find(pair_key(i, j));
    return it == p_pair_.end() ? 0.0 : it->second;
}

// Word sets are sorted multisets: repeated members denote repeated designated slots,
// which keeps the decomposition identities exact when analogy words coincide.
// Empirical joint tables are registered over unique members only.
static std::vector<int> canonical_set(const std::vector<int>& set) {
    std::vector<int> s = set;
    std::sort(s.begin(), s.end());
    if (s.empty()) throw ConfigError("empty word set");
    return s;
}

double ProbabilityModel::p_set(const std::vector<int>& set) const {
    auto s = canonical_set(set);
    if (exact_) return exact_->p_set(s);
    for (const auto& jt : joints_)
        if (jt.words == s) return jt.p_set;
    throw ConfigError("word set not registered with empirical model");
}

Eigen::VectorXd ProbabilityModel::p_ctx_given_set(const std::vector<int>& set) const {
    auto s = canonical_set(set);
    if (exact_) return exact_->p_ctx_given_set(s);
    for (const auto& jt : joints_)
        if (jt.words == s) return jt.p_ctx_given_set;
    throw ConfigError("word set not registered with empirical model");
}

Eigen::VectorXd ProbabilityModel::p_set_given_ctx(const std::vector<int>& set) const {
    auto s = canonical_set(set);
    if (exact_) return exact_->p_set_given_ctx(s);
    for (const auto& jt : joints_)
        if (jt.words == s) return jt.p_set_given_ctx;
    throw ConfigError("word set not registered with empirical model");
}

Eigen::VectorXd ProbabilityModel::induced_distribution(int i) const {
    if (p_target_[i] <= 0) throw NumericalError("induced distribution of zero-frequency word");
    Eigen::VectorXd out(n_);
    for (int j = 0; j < n_; ++j) out[j] = p_pair(i, j) / p_target_[i];
    return out;
}

std::optional<double> PmiMatrix::value(int i, int j) const {
    auto it = values.find(pair_key(i, j));
    if (it != values.end()) return it->second;
    if (policy == MissingPolicy::sentinel) return sentinel;
    return std::nullopt;
}

Eigen::MatrixXd PmiMatrix::dense() const {
    Eigen::MatrixXd m(n, n);
    if (policy == MissingPolicy::undefined &&
        values.size() != static_cast<size_t>(n) * static_cast<size_t>(n))
        throw NumericalError("PMI matrix has undefined entries; no dense completion");
    m.setConstant(sentinel);
    for (const auto& [key, v] : values)
        m(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)) = v;
    return m;
}

bool PmiMatrix::symmetric(double tol) const {
    for (const auto& [key, v] : values) {
        int i = static_cast<int>(key >> 32);
        int j = static_cast<int>(key & 0xffffffffu);
        auto other = value(j, i);
        if (!other || std::abs(*other - v) > tol) return false;
    }
    return true;
}

void PmiMatrix::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write PMI file: " + path);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "#n=%d shift=%.9g missing=%s sentinel=%.9g\n", n, shift,
                  policy == MissingPolicy::sentinel ? "sentinel" : "undefined", sentinel);
    out << buf;
    std::vector<std::pair<uint64_t, double>> cells(values.begin(), values.end());
    std::sort(cells.begin(), cells.end());
    for (const auto& [key, v] : cells) {
        std::snprintf(buf, sizeof(buf), "%d\t%d\t%.9g\n", static_cast<int>(key >> 32),
                      static_cast<int>(key & 0xffffffffu), v);
        out << buf;
    }
}

PmiMatrix PmiMatrix::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open PMI file: " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("#n=", 0) != 0)
        throw DataError("PMI file missing header: " + path);
    PmiMatrix m;
    char policy[32] = {0};
    if (std::sscanf(header.c_str(), "#n=%d shift=%lg missing=%31s sentinel=%lg", &m.n, &m.shift,
                    policy, &m.sentinel) != 4)
        throw DataError("PMI header parse error: " + header);
    m.policy = std::string(policy) == "sentinel" ? MissingPolicy::sentinel : MissingPolicy::undefined;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int i, j;
        double v;
        if (std::sscanf(line.c_str(), "%d\t%d\t%lg", &i, &j, &v) != 3)
            throw DataError("PMI parse error at line " + std::to_string(lineno));
        m.values[pair_key(i, j)] = v;
    }
    return m;
}

std::optional<double> pmi_value(const ProbabilityModel& model, int i, int j, double k) {
    if (i < 0 || i >= model.size() || j < 0 || j >= model.size())
        throw ConfigError("pmi_value: id out of range");
    double pi = model.p_target(i), pj = model.p_context(j);
    if (pi <= 0 || pj <= 0) throw NumericalError("pmi_value: marginal undefined");
    double pij = model.p_pair(i, j);
    if (pij <= 0) return std::nullopt;
    return std::log(pij) - std::log(pi) - std::log(pj) - std::log(k);
}

PmiMatrix pmi_matrix(const ProbabilityModel& model, double k, MissingPolicy policy,
                     double sentinel) {
    PmiMatrix m;
    m.n = model.size();
    m.shift = std::log(k);
    m.policy = policy;
    m.sentinel = sentinel;
    for (int i = 0; i < m.n; ++i) {
        if (model.p_target(i) <= 0 || model.p_context(i) <= 0)
            throw NumericalError("pmi_matrix: zero marginal for word " + std::to_string(i));
        for (int j = 0; j < m.n; ++j) {
            double pij = model.p_pair(i, j);
            if (pij > 0)
                m.values[pair_key(i, j)] = std::log(pij) - std::log(model.p_target(i)) -
                                           std::log(model.p_context(j)) - m.shift;
        }
    }
    return m;
}

Eigen::VectorXd pmi_vector(const ProbabilityModel& model, int i, double k, double missing) {
    if (model.p_target(i) <= 0) throw NumericalError("pmi_vector of zero-frequency word");
    Eigen::VectorXd v(model.size());
    for (int j = 0; j < model.size(); ++j) {
        auto x = pmi_value(model, i, j, k);
        v[j] = x ? *x : missing;
    }
    return v;
}

PmiMatrix ppmi(const PmiMatrix& m) {
    PmiMatrix out = m;
    for (auto& [key, v] : out.values) v = std::max(0.0, v);
    if (out.policy == MissingPolicy::sentinel) out.sentinel = std::max(0.0, out.sentinel);
    return out;
}

Eigen::VectorXd distort_unigram(const Eigen::VectorXd& p, double power) {
    Eigen::VectorXd q = p.array().pow(power);
    double s = q.sum();
    if (s <= 0) throw NumericalError("distort_unigram: degenerate distribution");
    return q / s;
}

}  // namespace semvec
