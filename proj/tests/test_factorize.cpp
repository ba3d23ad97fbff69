#include <cmath>
#include <fstream>
#include <random>

#include "doctest.h"
#include "semvec/factorize.hpp"

using namespace semvec;

namespace {

// Dense random counts with full support: every pair observed, so the SGNS optimum
// w.c = PMI - log k exists at every cell.
CooccurrenceStats full_support_stats(int n, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> count(1, 9);
    CooccurrenceStats stats(n, 1, Weighting::uniform);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int c = count(rng);
            for (int r = 0; r < c; ++r) stats.add(i, j, 1);
        }
    return stats;
}

Eigen::MatrixXd random_matrix(int rows, int cols, uint64_t seed, double scale = 0.3) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) m(r, c) = g(rng);
    return m;
}

Eigen::MatrixXd random_symmetric(int n, uint64_t seed) {
    Eigen::MatrixXd a = random_matrix(n, n, seed, 1.0);
    return 0.5 * (a + a.transpose());
}

double fd_check_sgns(const SgnsTargets& t, Eigen::MatrixXd W, Eigen::MatrixXd C) {
    Eigen::MatrixXd gW, gC;
    sgns_gradient(t, W, C, gW, gC);
    double h = 1e-6, worst = 0;
    auto probe = [&](Eigen::MatrixXd& M, const Eigen::MatrixXd& G) {
        for (int c = 0; c < M.cols(); ++c)
            for (int r = 0; r < M.rows(); ++r) {
                double orig = M(r, c);
                M(r, c) = orig + h;
                double up = sgns_loss(t, W, C);
                M(r, c) = orig - h;
                double dn = sgns_loss(t, W, C);
                M(r, c) = orig;
                double fd = (up - dn) / (2 * h);
                double denom = std::max({std::abs(fd), std::abs(G(r, c)), 1e-4});
                worst = std::max(worst, std::abs(fd - G(r, c)) / denom);
            }
    };
    probe(W, gW);
    probe(C, gC);
    return worst;
}

double fd_check_lsq(const Eigen::MatrixXd& M, Eigen::MatrixXd W, Eigen::MatrixXd C, bool tied) {
    Eigen::MatrixXd gW, gC;
    lsq_gradient(M, W, tied ? W : C, gW, gC, tied);
    double h = 1e-6, worst = 0;
    auto loss = [&] { return lsq_loss(M, W, tied ? W : C); };
    auto probe = [&](Eigen::MatrixXd& X, const Eigen::MatrixXd& G) {
        for (int c = 0; c < X.cols(); ++c)
            for (int r = 0; r < X.rows(); ++r) {
                double orig = X(r, c);
                X(r, c) = orig + h;
                double up = loss();
                X(r, c) = orig - h;
                double dn = loss();
                X(r, c) = orig;
                double fd = (up - dn) / (2 * h);
                double denom = std::max({std::abs(fd), std::abs(G(r, c)), 1e-4});
                worst = std::max(worst, std::abs(fd - G(r, c)) / denom);
            }
    };
    probe(W, gW);
    if (!tied) probe(C, gC);
    return worst;
}

}  // namespace

TEST_CASE("sgns gradient matches central finite differences") {
    auto stats = full_support_stats(5, 101);
    for (uint64_t seed : {7ULL, 8ULL, 9ULL}) {
        auto t = sgns_targets(stats, 3.0, true);
        CHECK(fd_check_sgns(t, random_matrix(3, 5, seed), random_matrix(3, 5, seed + 50)) < 1e-4);
    }
}

TEST_CASE("lsq gradient matches central finite differences, tied and untied") {
    Eigen::MatrixXd M = random_symmetric(5, 3);
    for (uint64_t seed : {17ULL, 18ULL}) {
        CHECK(fd_check_lsq(M, random_matrix(3, 5, seed), random_matrix(3, 5, seed + 5), false) <
              1e-4);
        CHECK(fd_check_lsq(M, random_matrix(3, 5, seed + 11), {}, true) < 1e-4);
    }
}

TEST_CASE("sgns converges to shifted PMI on a full-rank task") {
    const int n = 5;
    auto stats = full_support_stats(n, 3);
    auto model = ProbabilityModel::from_stats(stats);
    double k = 2.0;
    auto target = pmi_matrix(model, k, MissingPolicy::undefined).dense();

    TrainConfig cfg;
    cfg.dim = n;
    cfg.k = k;
    cfg.lr = 0.1;
    cfg.epochs = 4000;
    cfg.seed = 11;
    cfg.distort = false;
    std::vector<double> losses;
    auto set = train_sgns(stats, cfg, &losses);
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(set.W.col(i).dot(set.C.col(j)) - target(i, j)));
    CHECK(worst < 1e-2);

    // Expected loss is non-increasing across the first epochs.
    for (int e = 0; e + 1 < 10; ++e) CHECK(losses[e + 1] <= losses[e] + 1e-12);
}

TEST_CASE("sgns is deterministic under a fixed seed") {
    auto stats = full_support_stats(4, 5);
    TrainConfig cfg;
    cfg.dim = 3;
    cfg.k = 2.0;
    cfg.lr = 0.1;
    cfg.epochs = 50;
    cfg.seed = 42;
    auto a = train_sgns(stats, cfg);
    auto b = train_sgns(stats, cfg);
    CHECK((a.W - b.W).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK((a.C - b.C).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("lsq reaches near-zero loss when an exact factorization exists") {
    // d = n and symmetric PSD target.
    Eigen::MatrixXd root = random_matrix(6, 6, 21, 0.5);
    Eigen::MatrixXd target = root.transpose() * root;
    PmiMatrix pmi;
    pmi.n = 6;
    pmi.policy = MissingPolicy::sentinel;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) pmi.values[pair_key(i, j)] = target(i, j);

    TrainConfig cfg;
    cfg.dim = 6;
    cfg.lr = 0.05;
    cfg.epochs = 4000;
    cfg.seed = 2;
    std::vector<double> losses;
    auto set = train_lsq(pmi, cfg, &losses);
    CHECK(losses.back() < 1e-6);
    for (int e = 0; e + 1 < 10; ++e) CHECK(losses[e + 1] <= losses[e] + 1e-12);

    // Tied training drives the same PSD target down as well.
    cfg.tied = true;
    std::vector<double> tied_losses;
    auto tied = train_lsq(pmi, cfg, &tied_losses);
    CHECK(tied.tied);
    CHECK(&tied.context() == &tied.W);  // same storage
    CHECK(tied_losses.back() < 1e-4);
}

TEST_CASE("sgns with shift k agrees with lsq on the shifted PMI target") {
    const int n = 4;
    auto stats = full_support_stats(n, 13);
    auto model = ProbabilityModel::from_stats(stats);
    double k = 5.0;
    auto shifted = pmi_matrix(model, k, MissingPolicy::undefined);

    TrainConfig sg;
    sg.dim = n;
    sg.k = k;
    sg.lr = 0.3;
    sg.epochs = 6000;
    sg.seed = 7;
    sg.distort = false;
    auto a = train_sgns(stats, sg);

    TrainConfig lq;
    lq.dim = n;
    lq.lr = 0.1;
    lq.epochs = 6000;
    lq.seed = 8;
    auto b = train_lsq(shifted, lq);

    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            worst = std::max(worst, std::abs(a.W.col(i).dot(a.C.col(j)) -
                                             b.W.col(i).dot(b.C.col(j))));
    CHECK(worst < 5e-2);
}

TEST_CASE("analytic factorization: PSD input gives W = C") {
    Eigen::MatrixXd root = random_matrix(8, 8, 31, 0.7);
    Eigen::MatrixXd psd = root.transpose() * root;
    auto set = analytic_factorize(psd, 4);
    CHECK(set.loss == LossKind::analytic);
    CHECK((set.W - set.C).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("analytic factorization achieves the Eckart-Young optimum") {
    for (uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        Eigen::MatrixXd P = random_symmetric(50, seed);
        auto set = analytic_factorize(P, 10);
        double err = (set.W.transpose() * set.C - P).norm();

        // Independent oracle: truncated SVD reconstruction.
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
        Eigen::MatrixXd recon = svd.matrixU().leftCols(10) *
                                svd.singularValues().head(10).asDiagonal() *
                                svd.matrixV().leftCols(10).transpose();
        double oracle = (recon - P).norm();
        CHECK(std::abs(err - oracle) < 1e-8);

        // Rows of C equal +/- rows of W exactly; some selected eigenvalue is negative
        // for a generic symmetric matrix, so at least one sign flips.
        int negatives = 0;
        for (int r = 0; r < 10; ++r) {
            bool plus = (set.C.row(r) - set.W.row(r)).lpNorm<Eigen::Infinity>() == 0.0;
            bool minus = (set.C.row(r) + set.W.row(r)).lpNorm<Eigen::Infinity>() == 0.0;
            CHECK((plus || minus));
            negatives += minus && !plus;
        }
        CHECK(negatives > 0);
    }
}

TEST_CASE("analytic factorization input checks") {
    Eigen::MatrixXd asym = random_matrix(5, 5, 77, 1.0);
    CHECK_THROWS_AS(analytic_factorize(asym, 2), NumericalError);
    Eigen::MatrixXd sym = random_symmetric(5, 7);
    CHECK_THROWS_AS(analytic_factorize(sym, 9), ConfigError);
}

TEST_CASE("analytic WtC is deterministic") {
    Eigen::MatrixXd P = random_symmetric(20, 9);
    auto a = analytic_factorize(P, 6);
    auto b = analytic_factorize(P, 6);
    CHECK((a.W.transpose() * a.C - b.W.transpose() * b.C).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("interaction identities on selected and discarded eigenpairs") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pick(0, 19);
    Eigen::MatrixXd P = random_symmetric(20, 4);
    auto set = analytic_factorize(P, 8);
    for (int trial = 0; trial < 40; ++trial) {
        int i = pick(rng), j = pick(rng);
        auto rep = interaction_identities(set, P, i, j);
        CHECK(rep.r_wc < 1e-8);
        CHECK(rep.r_ww < 1e-8);
        CHECK(rep.r_aa < 1e-8);
        // Means halve the overestimate of w.w relative to w.c.
        CHECK(rep.aa - rep.wc == doctest::Approx(-rep.F).epsilon(1e-6));
        CHECK(rep.ww - rep.wc == doctest::Approx(-2 * rep.F).epsilon(1e-6));
    }

    // PSD input: F = 0 and all three interactions coincide.
    Eigen::MatrixXd root = random_matrix(10, 10, 8, 0.5);
    Eigen::MatrixXd psd = root.transpose() * root;
    auto pset = analytic_factorize(psd, 4);
    auto rep = interaction_identities(pset, psd, 1, 7);
    CHECK(rep.F == 0.0);
    CHECK(rep.wc == doctest::Approx(rep.ww).epsilon(1e-12));
    CHECK(rep.wc == doctest::Approx(rep.aa).epsilon(1e-12));

    CHECK_THROWS_AS(interaction_identities(EmbeddingSet{}, P, 0, 0), ConfigError);
}

TEST_CASE("mean embeddings") {
    // Tied set: A = W.
    EmbeddingSet tied;
    tied.W = random_matrix(3, 4, 2);
    tied.tied = true;
    tied.dim = 3;
    CHECK((tied.mean() - tied.W).lpNorm<Eigen::Infinity>() == 0.0);

    // Untied: elementwise mean.
    EmbeddingSet untied;
    untied.W = random_matrix(3, 4, 6);
    untied.C = random_matrix(3, 4, 7);
    untied.dim = 3;
    Eigen::MatrixXd manual = 0.5 * (untied.W + untied.C);
    CHECK((untied.mean() - manual).lpNorm<Eigen::Infinity>() == 0.0);

    // Analytic: rows with negative sign are zeroed in A.
    Eigen::MatrixXd P = random_symmetric(12, 10);
    auto set = analytic_factorize(P, 6);
    Eigen::MatrixXd A = set.mean();
    for (int r = 0; r < 6; ++r) {
        bool negative = (set.C.row(r) + set.W.row(r)).lpNorm<Eigen::Infinity>() == 0.0 &&
                        set.W.row(r).lpNorm<Eigen::Infinity>() > 0;
        if (negative) CHECK(A.row(r).lpNorm<Eigen::Infinity>() == 0.0);
        else CHECK((A.row(r) - set.W.row(r)).lpNorm<Eigen::Infinity>() == 0.0);
    }
}

TEST_CASE("embedding save/load round trip") {
    EmbeddingSet set;
    set.W = random_matrix(4, 6, 44);
    set.C = random_matrix(4, 6, 45);
    set.dim = 4;
    for (int i = 0; i < 6; ++i) set.tokens.push_back("tok" + std::to_string(i));
    save_embeddings(set, "emb_test.txt");
    auto back = load_embeddings("emb_test.txt");
    CHECK(back.has_context);
    CHECK(back.tokens == set.tokens);
    CHECK((back.W - set.W).lpNorm<Eigen::Infinity>() < 1e-6);
    CHECK((back.C - set.C).lpNorm<Eigen::Infinity>() < 1e-6);
    std::remove("emb_test.txt");
    std::remove("emb_test.txt.ctx");
}

TEST_CASE("embedding load errors carry line numbers") {
    {
        std::ofstream out("emb_bad.txt");
        out << "3 4\n";
        out << "a 1 2 3 4\n";
        out << "b 1 2 3\n";  // too short at line 3
        out << "c 1 2 3 4\n";
    }
    try {
        load_embeddings("emb_bad.txt");
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    std::remove("emb_bad.txt");
}

TEST_CASE("third-party single-file embeddings load as W with context flagged absent") {
    {
        std::ofstream out("emb_single.txt");
        out << "2 3\n";
        out << "x 0.25 -1 2\n";
        out << "y 1 0.5 -0.125\n";
    }
    auto set = load_embeddings("emb_single.txt");
    CHECK_FALSE(set.has_context);
    CHECK(set.W.cols() == 2);
    CHECK(set.W(0, 0) == doctest::Approx(0.25));
    std::remove("emb_single.txt");
}
