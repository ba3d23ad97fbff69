#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "semvec/kg.hpp"
#include "semvec/kg_diagnostics.hpp"

using namespace semvec;
using namespace testutil;

TEST_CASE("triple loading, dictionaries, dedup and unseen-entity flagging") {
    namespace fs = std::filesystem;
    fs::create_directories("kg_toy");
    {
        std::ofstream tr("kg_toy/train.txt");
        tr << "a\tlikes\tb\n";
        tr << "b\tlikes\tc\n";
        tr << "a\tlikes\tb\n";  // duplicate within split
        std::ofstream va("kg_toy/valid.txt");
        va << "c\tlikes\ta\n";
        std::ofstream te("kg_toy/test.txt");
        te << "d\tknows\ta\n";  // d unseen in train, knows new relation
    }
    auto kg = load_triples("kg_toy");
    CHECK(kg.n_entities() == 4);
    CHECK(kg.n_relations() == 2);
    CHECK(kg.train.size() == 2);  // dedup
    CHECK(kg.unseen_test_entities == 1);
    fs::remove_all("kg_toy");
}

TEST_CASE("malformed triple lines carry line numbers") {
    namespace fs = std::filesystem;
    fs::create_directories("kg_bad");
    {
        std::ofstream tr("kg_bad/train.txt");
        tr << "a\tlikes\tb\n";
        tr << "broken line without tabs\n";
    }
    try {
        load_triples("kg_bad", {"train"});
        FAIL("expected parse error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    fs::remove_all("kg_bad");
}

TEST_CASE("score functions: hand-checkable cases") {
    auto kg = random_kg(6, 2, 12, 0, 4, 1);

    // TransE at e_s + r = e_o scores exactly zero, its maximum.
    auto transe = init_kg_model(KgKind::TransE, kg, 4, 4, 3);
    transe.E.col(1) = transe.E.col(0) + transe.rel_a.col(0);
    CHECK(kg_score(transe, 0, 0, 1) == 0.0);
    CHECK(kg_score(transe, 0, 0, 2) <= 0.0);

    // DistMult is symmetric in subject and object.
    auto dm = init_kg_model(KgKind::DistMult, kg, 5, 5, 4);
    for (int s = 0; s < 6; ++s)
        for (int o = 0; o < 6; ++o)
            CHECK(kg_score(dm, s, 0, o) == doctest::Approx(kg_score(dm, o, 0, s)));

    // ComplEx breaks that symmetry for some parameterization.
    auto cx = init_kg_model(KgKind::ComplEx, kg, 5, 5, 5);
    bool asymmetric = false;
    for (int s = 0; s < 6 && !asymmetric; ++s)
        for (int o = 0; o < 6 && !asymmetric; ++o)
            if (std::abs(kg_score(cx, s, 1, o) - kg_score(cx, o, 1, s)) > 1e-9) asymmetric = true;
    CHECK(asymmetric);

    // MuRE_I equals MuRE with R pinned to the identity.
    auto mure = init_kg_model(KgKind::MuRE, kg, 4, 4, 6);
    auto murei = init_kg_model(KgKind::MuRE_I, kg, 4, 4, 6);
    murei.E = mure.E;
    murei.rel_a = mure.rel_b;  // translation
    murei.bias_s = mure.bias_s;
    murei.bias_o = mure.bias_o;
    mure.rel_a.setOnes();  // diagonal R = I
    for (const auto& t : kg.train)
        CHECK(kg_score(mure, t.s, t.r, t.o) ==
              doctest::Approx(kg_score(murei, t.s, t.r, t.o)).epsilon(1e-12));
}

TEST_CASE("TuckER subsumes DistMult through a superdiagonal core") {
    auto kg = random_kg(7, 3, 10, 0, 5, 2);
    auto dm = init_kg_model(KgKind::DistMult, kg, 4, 4, 9);
    auto tk = init_kg_model(KgKind::TuckER, kg, 4, 4, 9);
    tk.E = dm.E;
    std::fill(tk.core.begin(), tk.core.end(), 0.0);
    for (int a = 0; a < 4; ++a) tk.core[(static_cast<size_t>(a) * 4 + a) * 4 + a] = 1.0;
    tk.rel_core_vec = dm.rel_a;
    for (int s = 0; s < 7; ++s)
        for (int r = 0; r < 3; ++r)
            for (int o = 0; o < 7; ++o)
                CHECK(std::abs(kg_score(tk, s, r, o) - kg_score(dm, s, r, o)) < 1e-10);

    // And the expanded relation matrix agrees with the diagonal.
    Eigen::MatrixXd R = tk.relation_matrix(1);
    CHECK((R - Eigen::MatrixXd(dm.rel_a.col(1).asDiagonal())).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("score gradients match finite differences for every kind") {
    auto kg = random_kg(5, 2, 8, 0, 3, 7);
    std::mt19937_64 rng(19);
    for (KgKind kind : {KgKind::TransE, KgKind::DistMult, KgKind::RESCAL, KgKind::ComplEx,
                        KgKind::TuckER, KgKind::MuRE, KgKind::MuRE_I}) {
        for (int rep = 0; rep < 4; ++rep) {
            auto m = init_kg_model(kind, kg, 4, 3, rng());
            int s = static_cast<int>(rng() % 5), r = static_cast<int>(rng() % 2),
                o = static_cast<int>(rng() % 5);
            CHECK(kg_fd_max_rel_error(m, s, r, o) < 1e-4);
        }
    }

    // TransE at its stationary point has zero gradient.
    auto m = init_kg_model(KgKind::TransE, kg, 4, 4, 5);
    m.E.col(1) = m.E.col(0) + m.rel_a.col(0);
    KgGrads g = KgGrads::zeros_like(m);
    kg_score_gradient(m, 0, 0, 1, 1.0, g);
    CHECK(g.E.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(g.rel_a.lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("training reduces the loss and memorizes a toy graph") {
    auto kg = random_kg(12, 2, 20, 0, 4, 21);
    for (KgKind kind : {KgKind::DistMult, KgKind::MuRE, KgKind::TransE}) {
        KgTrainConfig cfg;
        cfg.de = 12;
        cfg.dr = 12;
        cfg.lr = 0.05;
        cfg.batch = 8;
        cfg.negs = 4;
        cfg.epochs = 50;
        cfg.seed = 5;
        cfg.early_stop = false;
        std::vector<double> losses;
        train_kg(kg, kind, cfg, &losses);
        CHECK(losses.back() < losses.front());
    }

    // Memorization needs an asymmetric scorer; d_e = n_e gives MuRE the capacity.
    KgTrainConfig cfg;
    cfg.de = 12;
    cfg.dr = 12;
    cfg.lr = 0.05;
    cfg.batch = 8;
    cfg.negs = 4;
    cfg.epochs = 2000;
    cfg.seed = 5;
    cfg.early_stop = false;
    auto model = train_kg(kg, KgKind::MuRE, cfg);
    auto cls = classify_eval(model, kg);
    CHECK(cls.overall.accuracy_train() == doctest::Approx(1.0));
    CHECK(cls.overall.other_avg() < 3.0);
}

TEST_CASE("rank_eval matches the brute-force oracle triple for triple") {
    auto kg = random_kg(30, 3, 60, 0, 25, 31);
    for (KgKind kind : {KgKind::DistMult, KgKind::MuRE, KgKind::TuckER, KgKind::ComplEx,
                        KgKind::TransE, KgKind::RESCAL, KgKind::MuRE_I}) {
        auto m = init_kg_model(kind, kg, 6, 4, 77);
        auto fast = rank_eval(m, kg, "test", 1);
        auto oracle = brute_force_rank(m, kg, "test");
        CHECK(fast.overall.hits10 == doctest::Approx(oracle.overall.hits10).epsilon(1e-12));
        CHECK(fast.overall.mrr == doctest::Approx(oracle.overall.mrr).epsilon(1e-10));
        auto parallel = rank_eval(m, kg, "test", 4);
        CHECK(fast.overall.hits10 == parallel.overall.hits10);
        CHECK(fast.overall.mrr == parallel.overall.mrr);
    }
}

TEST_CASE("pessimistic ties: constant scores never hit, random scores hit ~10/n_e") {
    auto kg = random_kg(100, 1, 10, 0, 100, 41);

    // All-equal scores: the truth is ranked last.
    auto constant = init_kg_model(KgKind::DistMult, kg, 3, 3, 1);
    constant.E.setZero();
    auto res = rank_eval(constant, kg, "test");
    CHECK(res.overall.hits10 == 0.0);
    auto oracle = brute_force_rank(constant, kg, "test");
    CHECK(oracle.overall.hits10 == 0.0);

    // Generic random model: roughly uniform ranks.
    auto noisy = init_kg_model(KgKind::DistMult, kg, 8, 8, 9);
    auto rnd = rank_eval(noisy, kg, "test");
    CHECK(rnd.overall.hits10 == doctest::Approx(0.10).epsilon(0.8));
    auto rnd_oracle = brute_force_rank(noisy, kg, "test");
    CHECK(rnd.overall.hits10 == doctest::Approx(rnd_oracle.overall.hits10).epsilon(1e-12));
}

TEST_CASE("adding a constant to all scores leaves ranks unchanged") {
    auto kg = random_kg(20, 2, 30, 0, 10, 51);
    auto m = init_kg_model(KgKind::MuRE, kg, 5, 5, 3);
    auto base = rank_eval(m, kg, "test");
    auto shifted = m;
    shifted.bias_s.array() += 4.0;
    shifted.bias_o.array() += 3.0;
    auto res = rank_eval(shifted, kg, "test");
    CHECK(base.overall.hits10 == res.overall.hits10);
    CHECK(base.overall.mrr == doctest::Approx(res.overall.mrr).epsilon(1e-12));
}

TEST_CASE("filtered ranking skips known-true competitors") {
    // Two true objects for the same (s, r); scores make the other true object
    // outrank the test one, so filtering improves the rank.
    std::vector<std::vector<std::array<std::string, 3>>> splits(3);
    splits[0] = {{"s", "r", "o1"}};
    splits[2] = {{"s", "r", "o2"}};
    for (int i = 0; i < 30; ++i) splits[0].push_back({"f" + std::to_string(i), "r", "s"});
    auto kg = kg_from_triples(splits);
    auto m = init_kg_model(KgKind::DistMult, kg, 6, 6, 13);
    auto raw = rank_eval(m, kg, "test", 1, false);
    auto filtered = rank_eval(m, kg, "test", 1, true);
    CHECK(filtered.overall.mrr >= raw.overall.mrr);
}

TEST_CASE("classification boundary: the all-zero model predicts nothing") {
    auto kg = random_kg(15, 2, 25, 0, 10, 61);
    auto m = init_kg_model(KgKind::DistMult, kg, 4, 4, 2);
    m.E.setZero();  // sigma(0) = 0.5, not > 0.5
    auto res = classify_eval(m, kg);
    CHECK(res.overall.accuracy_train() == 0.0);
    CHECK(res.overall.accuracy_test() == 0.0);
    CHECK(res.overall.other_avg() == 0.0);
    CHECK(res.overall.pairs > 0);
}

TEST_CASE("khs on canonical graphs") {
    std::vector<std::vector<std::array<std::string, 3>>> splits(1);

    // Single edge: a DAG, Khs = 1.
    splits[0] = {{"a", "r", "b"}};
    auto kg1 = kg_from_triples(splits);
    auto k1 = khs(kg1, 0);
    CHECK(k1.khs == 1.0);
    CHECK(k1.max_path == 1);
    CHECK(k1.avg_path == doctest::Approx(1.0));

    // Two-cycle: everything mutually reachable, Khs = 0.
    splits[0] = {{"a", "r", "b"}, {"b", "r", "a"}};
    auto kg2 = kg_from_triples(splits);
    CHECK(khs(kg2, 0).khs == 0.0);

    // Chain a->b->c: Khs = 1, max path 2, avg path 4/3.
    splits[0] = {{"a", "r", "b"}, {"b", "r", "c"}};
    auto kg3 = kg_from_triples(splits);
    auto k3 = khs(kg3, 0);
    CHECK(k3.khs == 1.0);
    CHECK(k3.max_path == 2);
    CHECK(k3.avg_path == doctest::Approx(4.0 / 3.0));

    // Parallel closure agrees with serial.
    std::mt19937_64 rng(71);
    splits[0].clear();
    for (int i = 0; i < 400; ++i)
        splits[0].push_back({"n" + std::to_string(rng() % 80), "r",
                             "n" + std::to_string(rng() % 80)});
    auto kg4 = kg_from_triples(splits);
    auto serial = khs(kg4, 0, "train", 1);
    auto parallel = khs(kg4, 0, "train", 4);
    CHECK(serial.khs == parallel.khs);
    CHECK(serial.max_path == parallel.max_path);
    CHECK(serial.avg_path == parallel.avg_path);
    CHECK(serial.khs >= 0.0);
    CHECK(serial.khs <= 1.0);
}

TEST_CASE("symmetry score") {
    Eigen::MatrixXd sym(2, 2), anti(2, 2);
    sym << 0, 1, 1, 0;
    anti << 0, 1, -1, 0;
    CHECK(*symmetry_score(sym) == 1.0);
    CHECK(*symmetry_score(anti) == doctest::Approx(-1.0));

    // Exactly symmetric larger matrix short-circuits to +1.
    Eigen::MatrixXd s3(3, 3);
    s3 << 0, 1, 2, 1, 0, 3, 2, 3, 0;
    CHECK(*symmetry_score(s3) == 1.0);

    // Transpose invariance on a random matrix.
    std::mt19937_64 rng(81);
    std::normal_distribution<double> g(0, 1);
    Eigen::MatrixXd r(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) r(i, j) = g(rng);
    auto a = symmetry_score(r);
    auto b = symmetry_score(r.transpose());
    REQUIRE(a.has_value());
    CHECK(*a == doctest::Approx(*b).epsilon(1e-12));
    CHECK(*a >= -1.0);
    CHECK(*a <= 1.0);
}

TEST_CASE("relation spectra and vector norms") {
    auto kg = random_kg(6, 3, 10, 0, 2, 91);
    auto m = init_kg_model(KgKind::MuRE, kg, 3, 3, 4);
    m.rel_a.col(0) << 1, 1, 1;  // identity diag
    m.rel_a.col(1) << 2, 1, 0;
    auto id_spec = relation_spectrum(m, 0);
    CHECK(id_spec == std::vector<double>{1.0, 1.0, 1.0});
    auto spec = relation_spectrum(m, 1);
    CHECK(spec == std::vector<double>{1.0, 0.5, 0.0});

    m.rel_b.col(2) << 3, 4, 0;
    auto norms = relation_vector_norms(m);
    CHECK(norms[2] == doctest::Approx(5.0));
    m.rel_b.col(2).setZero();
    CHECK(relation_vector_norms(m)[2] == 0.0);

    auto transe = init_kg_model(KgKind::TransE, kg, 3, 3, 4);
    CHECK_THROWS_AS(relation_spectrum(transe, 0), ConfigError);
    auto dm = init_kg_model(KgKind::DistMult, kg, 3, 3, 4);
    CHECK_THROWS_AS(relation_vector_norms(dm), ConfigError);

    // RESCAL spectra come from eigenvalue magnitudes.
    auto rescal = init_kg_model(KgKind::RESCAL, kg, 3, 3, 4);
    rescal.rel_full[0] = Eigen::Vector3d(4, 2, 1).asDiagonal();
    auto rspec = relation_spectrum(rescal, 0);
    CHECK(rspec[0] == doctest::Approx(1.0));
    CHECK(rspec[1] == doctest::Approx(0.5));
    CHECK(rspec[2] == doctest::Approx(0.25));
}

TEST_CASE("split_nell contract") {
    std::mt19937_64 rng(3);
    std::vector<std::vector<std::array<std::string, 3>>> splits(3);
    for (int i = 0; i < 26000; ++i)
        splits[i % 3].push_back({"e" + std::to_string(rng() % 500), "r" + std::to_string(rng() % 12),
                                 "e" + std::to_string(rng() % 500)});
    auto kg = kg_from_triples(splits);
    size_t total = kg.train.size() + kg.valid.size() + kg.test.size();

    auto s1 = split_nell(kg, 7);
    CHECK(s1.valid.size() == 10000);
    CHECK(s1.test.size() == 10000);
    CHECK(s1.train.size() == total - 20000);

    // Conservation: the union multiset is unchanged.
    auto collect = [](const KnowledgeGraph& g) {
        std::vector<uint64_t> keys;
        for (const auto* sp : {&g.train, &g.valid, &g.test})
            for (const auto& t : *sp)
                keys.push_back((static_cast<uint64_t>(t.s) << 40) |
                               (static_cast<uint64_t>(t.r) << 22) | t.o);
        std::sort(keys.begin(), keys.end());
        return keys;
    };
    CHECK(collect(s1) == collect(kg));

    // Reproducible under the seed, different under another.
    auto same = [](const KnowledgeGraph& a, const KnowledgeGraph& b) {
        return a.train == b.train && a.valid == b.valid && a.test == b.test;
    };
    auto s2 = split_nell(kg, 7);
    CHECK(same(s1, s2));
    auto s3 = split_nell(kg, 8);
    CHECK_FALSE(same(s1, s3));

    std::vector<std::vector<std::array<std::string, 3>>> small(1);
    for (int i = 0; i < 100; ++i) small[0].push_back({"a", "r" + std::to_string(i), "b"});
    CHECK_THROWS_AS(split_nell(kg_from_triples(small), 1), DataError);
}

TEST_CASE("kg model binary round trip") {
    auto kg = random_kg(9, 2, 14, 0, 3, 15);
    for (KgKind kind : {KgKind::TuckER, KgKind::MuRE, KgKind::ComplEx, KgKind::RESCAL}) {
        auto m = init_kg_model(kind, kg, 4, 3, 8);
        m.save("kg_model_test.bin");
        auto back = KgModel::load("kg_model_test.bin");
        CHECK(back.kind == m.kind);
        for (const auto& t : kg.train)
            CHECK(kg_score(back, t.s, t.r, t.o) == kg_score(m, t.s, t.r, t.o));
    }
    std::remove("kg_model_test.bin");
}
