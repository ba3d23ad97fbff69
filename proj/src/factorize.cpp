#include "semvec/factorize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semvec {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
// log sigma(x), stable for large |x|.
inline double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

Eigen::MatrixXd init_embeddings(int d, int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-0.5 / d, 0.5 / d);
    Eigen::MatrixXd m(d, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < d; ++i) m(i, j) = u(rng);
    return m;
}

uint64_t gcd64(uint64_t a, uint64_t b) {
    while (b) {
        a %= b;
        std::swap(a, b);
    }
    return a;
}

}  // namespace

const char* loss_name(LossKind k) {
    switch (k) {
        case LossKind::sgns: return "sgns";
        case LossKind::lsq: return "lsq";
        case LossKind::lsq_tied: return "lsq_tied";
        default: return "analytic";
    }
}

CellPermutation::CellPermutation(uint64_t cells, std::mt19937_64& rng) : cells_(cells) {
    if (cells == 0) throw ConfigError("empty cell range");
    if (cells <= (1u << 22)) {
        table_.resize(cells);
        std::iota(table_.begin(), table_.end(), 0u);
        std::shuffle(table_.begin(), table_.end(), rng);
    } else {
        std::uniform_int_distribution<uint64_t> u(1, cells - 1);
        do {
            stride_ = u(rng) | 1ULL;
        } while (gcd64(stride_, cells) != 1);
        offset_ = u(rng);
    }
}

uint64_t CellPermutation::operator()(uint64_t step) const {
    if (!table_.empty()) return table_[step];
    return (static_cast<__uint128_t>(step) * stride_ + offset_) % cells_;
}

SgnsTargets sgns_targets(const CooccurrenceStats& stats, double k, bool distort) {
    double d = stats.total_weight();
    if (d <= 0) throw DataError("sgns_targets: empty statistics");
    SgnsTargets t;
    t.n = stats.vocab_size();
    t.k = k;
    t.pos = Eigen::MatrixXd::Zero(t.n, t.n);
    double scale = static_cast<double>(stats.scale());
    for (const auto& [key, num] : stats.raw_cells())
        t.pos(static_cast<int>(key >> 32), static_cast<int>(key & 0xffffffffu)) =
            static_cast<double>(num) / scale / d;
    t.p_target.resize(t.n);
    Eigen::VectorXd p_ctx(t.n);
    for (int i = 0; i < t.n; ++i) {
        t.p_target[i] = stats.target_weight(i) / d;
        p_ctx[i] = stats.context_weight(i) / d;
    }
    t.p_noise = distort ? distort_unigram(p_ctx, 0.75) : p_ctx;
    return t;
}

double sgns_loss(const SgnsTargets& t, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C) {
    const int n = t.n;
    std::vector<double> row_loss(n, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
            double x = W.col(i).dot(C.col(j));
            double a = t.pos(i, j);
            double b = t.neg(i, j);
            if (a > 0) acc -= a * log_sigmoid(x);
            if (b > 0) acc -= b * log_sigmoid(-x);
        }
        row_loss[i] = acc;
    }
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += row_loss[i];  // fixed-order reduction
    return total;
}

void sgns_gradient(const SgnsTargets& t, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C,
                   Eigen::MatrixXd& gW, Eigen::MatrixXd& gC) {
    const int n = t.n;
    // G_ij = dloss/dx_ij = -(pos_ij sig(-x) - neg_ij sig(x)); then gW = C G^T, gC = W G.
    Eigen::MatrixXd G(n, n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double x = W.col(i).dot(C.col(j));
            G(i, j) = -(t.pos(i, j) * sigmoid(-x) - t.neg(i, j) * sigmoid(x));
        }
    gW = C * G.transpose();
    gC = W * G;
}

double lsq_loss(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C) {
    return 0.5 * (W.transpose() * C - M).squaredNorm();
}

void lsq_gradient(const Eigen::MatrixXd& M, const Eigen::MatrixXd& W, const Eigen::MatrixXd& C,
                  Eigen::MatrixXd& gW, Eigen::MatrixXd& gC, bool tied) {
    Eigen::MatrixXd E = W.transpose() * C - M;  // n x n
    gW = C * E.transpose();
    gC = W * E;
    if (tied) {
        gW = gW + gC;  // single matrix, gradient accumulated from both roles
        gC = gW;
    }
}

EmbeddingSet train_sgns(const CooccurrenceStats& stats, const TrainConfig& cfg,
                        std::vector<double>* epoch_losses) {
    if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
    if (cfg.k < 1) throw ConfigError("sgns negatives k must be >= 1");
    SgnsTargets t = sgns_targets(stats, cfg.k, cfg.distort);
    const int n = t.n;

    auto rng = make_rng(cfg.seed);
    EmbeddingSet set;
    set.W = init_embeddings(cfg.dim, n, rng);
    set.C = init_embeddings(cfg.dim, n, rng);
    set.dim = cfg.dim;
    set.k_used = cfg.k;
    set.loss = LossKind::sgns;
    set.seed = cfg.seed;
    set.epochs = cfg.epochs;

    const uint64_t cells = static_cast<uint64_t>(n) * n;
    // One sweep visits each cell once; rescaling by cells/(1+k) makes a visit an
    // unbiased estimate of the full expected-loss gradient with mean coefficient
    // ~1 per cell, so learning rates live on the same scale as the LSQ trainer.
    const double cell_scale = static_cast<double>(cells) / (1.0 + cfg.k);
    Eigen::VectorXd wtmp(cfg.dim);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        CellPermutation perm(cells, rng);
        for (uint64_t step = 0; step < cells; ++step) {
            uint64_t cell = perm(step);
            int i = static_cast<int>(cell / n);
            int j = static_cast<int>(cell % n);
            double a = t.pos(i, j);
            double b = t.neg(i, j);
            if (a == 0 && b == 0) continue;
            double x = set.W.col(i).dot(set.C.col(j));
            double g = cell_scale * (a * sigmoid(-x) - b * sigmoid(x));  // -dloss/dx
            wtmp = set.W.col(i);
            set.W.col(i) += cfg.lr * g * set.C.col(j);
            set.C.col(j) += cfg.lr * g * wtmp;
        }
        double loss = sgns_loss(t, set.W, set.C);
        if (!std::isfinite(loss))
            throw NumericalError("sgns training diverged (NaN loss) at epoch " +
                                 std::to_string(epoch) + "; lower the learning rate");
        if (epoch_losses) epoch_losses->push_back(loss);
        if (cfg.verbose) std::fprintf(stderr, "sgns epoch %d loss %.6f\n", epoch, loss);
    }
    return set;
}

EmbeddingSet train_lsq(const PmiMatrix& pmi, const TrainConfig& cfg,
                       std::vector<double>* epoch_losses) {
    if (cfg.dim < 1) throw ConfigError("dim must be >= 1");
    Eigen::MatrixXd M = pmi.dense();
    const int n = static_cast<int>(M.rows());

    auto rng = make_rng(cfg.seed);
    EmbeddingSet set;
    set.W = init_embeddings(cfg.dim, n, rng);
    set.tied = cfg.tied;
    if (!cfg.tied) set.C = init_embeddings(cfg.dim, n, rng);
    set.dim = cfg.dim;
    set.k_used = std::exp(pmi.shift);
    set.loss = cfg.tied ? LossKind::lsq_tied : LossKind::lsq;
    set.seed = cfg.seed;
    set.epochs = cfg.epochs;

    const uint64_t cells = static_cast<uint64_t>(n) * n;
    Eigen::VectorXd wtmp(cfg.dim);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        CellPermutation perm(cells, rng);
        for (uint64_t step = 0; step < cells; ++step) {
            uint64_t cell = perm(step);
            int i = static_cast<int>(cell / n);
            int j = static_cast<int>(cell % n);
            if (cfg.tied) {
                double e = set.W.col(i).dot(set.W.col(j)) - M(i, j);
                if (i == j) {
                    set.W.col(i) -= cfg.lr * 2.0 * e * set.W.col(i);
                } else {
                    wtmp = set.W.col(i);
                    set.W.col(i) -= cfg.lr * e * set.W.col(j);
                    set.W.col(j) -= cfg.lr * e * wtmp;
                }
            } else {
                double e = set.W.col(i).dot(set.C.col(j)) - M(i, j);
                wtmp = set.W.col(i);
                set.W.col(i) -= cfg.lr * e * set.C.col(j);
                set.C.col(j) -= cfg.lr * e * wtmp;
            }
        }
        double loss = lsq_loss(M, set.W, set.context());
        if (!std::isfinite(loss))
            throw NumericalError("lsq training diverged (NaN loss) at epoch " +
                                 std::to_string(epoch) + "; lower the learning rate");
        if (epoch_losses) epoch_losses->push_back(loss);
        if (cfg.verbose) std::fprintf(stderr, "lsq epoch %d loss %.6f\n", epoch, loss);
    }
    return set;
}

EmbeddingSet analytic_factorize(const PmiMatrix& pmi, int d) {
    return analytic_factorize(pmi.dense(), d);
}

EmbeddingSet analytic_factorize(const Eigen::MatrixXd& symmetric, int d) {
    const int n = static_cast<int>(symmetric.rows());
    if (symmetric.cols() != n) throw ConfigError("analytic_factorize: matrix not square");
    if ((symmetric - symmetric.transpose()).lpNorm<Eigen::Infinity>() > 1e-8)
        throw NumericalError("analytic_factorize: input not symmetric");
    if (d < 1 || d > n) throw ConfigError("analytic_factorize: d out of range");

    Eigen::MatrixXd sym = 0.5 * (symmetric + symmetric.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    if (eig.info() != Eigen::Success) throw NumericalError("eigendecomposition failed");
    Eigen::VectorXd lam = eig.eigenvalues();
    Eigen::MatrixXd vec = eig.eigenvectors();

    // Canonical eigenvector signs: largest-|component| entry made positive.
    for (int c = 0; c < n; ++c) {
        int arg = 0;
        double best = 0;
        for (int r = 0; r < n; ++r)
            if (std::abs(vec(r, c)) > best) {
                best = std::abs(vec(r, c));
                arg = r;
            }
        if (vec(arg, c) < 0) vec.col(c) = -vec.col(c);
    }

    // Largest |lambda| first; ties: positive sign first, then original index.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        double aa = std::abs(lam[a]), ab = std::abs(lam[b]);
        if (aa != ab) return aa > ab;
        if ((lam[a] >= 0) != (lam[b] >= 0)) return lam[a] >= 0;
        return a < b;
    });

    EmbeddingSet set;
    set.W.resize(d, n);
    set.C.resize(d, n);
    set.dim = d;
    set.loss = LossKind::analytic;
    for (int r = 0; r < d; ++r) {
        int idx = order[r];
        double root = std::sqrt(std::abs(lam[idx]));
        double sign = lam[idx] >= 0 ? 1.0 : -1.0;
        set.W.row(r) = root * vec.col(idx).transpose();
        set.C.row(r) = sign * set.W.row(r);
    }
    return set;
}

InteractionReport interaction_identities(const EmbeddingSet& set, const Eigen::MatrixXd& P, int i,
                                         int j) {
    if (set.loss != LossKind::analytic)
        throw ConfigError("interaction_identities requires an analytic embedding set");
    const int n = static_cast<int>(P.rows());
    const int d = set.dim;

    // Recover the selected eigenstructure from the analytic construction:
    // row r of W is sqrt(|lam|) u^T and C^r = sign(lam) W^r.
    Eigen::MatrixXd E = P - set.W.transpose() * set.C;  // discarded eigenpairs
    Eigen::MatrixXd F = Eigen::MatrixXd::Zero(n, n);
    for (int r = 0; r < d; ++r) {
        double norm2 = set.W.row(r).squaredNorm();  // = |lam_r|
        if (norm2 == 0) continue;
        bool negative = set.C.row(r).dot(set.W.row(r)) < 0;
        if (negative) {
            Eigen::VectorXd u = set.W.row(r).transpose() / std::sqrt(norm2);
            F -= norm2 * (u * u.transpose());  // (S - |S|)/2 contributes -|lam| on negatives
        }
    }

    InteractionReport rep;
    rep.P = P(i, j);
    rep.E = E(i, j);
    rep.F = F(i, j);
    rep.wc = set.W.col(i).dot(set.C.col(j));
    rep.ww = set.W.col(i).dot(set.W.col(j));
    Eigen::MatrixXd A = set.mean();
    rep.aa = A.col(i).dot(A.col(j));
    rep.r_wc = std::abs(rep.wc - (rep.P - rep.E));
    rep.r_ww = std::abs(rep.ww - (rep.P - rep.E - 2 * rep.F));
    rep.r_aa = std::abs(rep.aa - (rep.P - rep.E - rep.F));
    return rep;
}

void save_embeddings(const EmbeddingSet& set, const std::string& path) {
    auto write = [&](const Eigen::MatrixXd& M, const std::string& p) {
        std::ofstream out(p);
        if (!out) throw DataError("cannot write embeddings: " + p);
        const int n = static_cast<int>(M.cols());
        out << n << " " << M.rows() << "\n";
        char buf[64];
        for (int i = 0; i < n; ++i) {
            out << (set.tokens.empty() ? "w" + std::to_string(i) : set.tokens[i]);
            for (int r = 0; r < M.rows(); ++r) {
                std::snprintf(buf, sizeof(buf), " %.9g", M(r, i));
                out << buf;
            }
            out << "\n";
        }
    };
    write(set.W, path);
    write(set.context(), path + ".ctx");
}

static Eigen::MatrixXd read_w2v_text(const std::string& path, std::vector<std::string>& tokens) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open embeddings: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty embeddings file: " + path);
    long n = 0, d = 0;
    if (std::sscanf(line.c_str(), "%ld %ld", &n, &d) != 2 || n <= 0 || d <= 0)
        throw DataError("embeddings header parse error at line 1: " + line);
    Eigen::MatrixXd M(d, n);
    tokens.resize(n);
    for (long i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw DataError("embeddings truncated at line " + std::to_string(i + 2));
        std::istringstream ss(line);
        if (!(ss >> tokens[i]))
            throw DataError("embeddings parse error at line " + std::to_string(i + 2));
        for (long r = 0; r < d; ++r)
            if (!(ss >> M(r, i)))
                throw DataError("embeddings parse error at line " + std::to_string(i + 2) +
                                ": expected " + std::to_string(d) + " values");
        double extra;
        if (ss >> extra)
            throw DataError("embeddings parse error at line " + std::to_string(i + 2) +
                            ": more values than header dimension");
    }
    return M;
}

EmbeddingSet load_embeddings(const std::string& path) {
    EmbeddingSet set;
    set.W = read_w2v_text(path, set.tokens);
    set.dim = static_cast<int>(set.W.rows());
    std::ifstream ctx(path + ".ctx");
    if (ctx.good()) {
        ctx.close();
        std::vector<std::string> ctx_tokens;
        set.C = read_w2v_text(path + ".ctx", ctx_tokens);
        if (set.C.rows() != set.W.rows() || set.C.cols() != set.W.cols())
            throw DataError("context file shape mismatch: " + path + ".ctx");
        set.has_context = true;
    } else {
        set.C = set.W;
        set.has_context = false;  // third-party single file: W only, flagged
    }
    return set;
}

}  // namespace semvec
