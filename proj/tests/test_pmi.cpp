#include <cmath>
#include <random>

#include "doctest.h"
#include "semvec/pmi.hpp"

using namespace semvec;

static ProbabilityModel abab_model() {
    std::vector<int> ids{0, 1, 0, 1};
    auto stats = CooccurrenceStats::from_stream(ids, 2, 1, Weighting::uniform);
    return ProbabilityModel::from_stats(stats);
}

TEST_CASE("probability estimates from [a,b,a,b]") {
    auto m = abab_model();
    CHECK(m.p_pair(0, 1) == doctest::Approx(0.5));
    CHECK(m.p_target(0) == doctest::Approx(0.5));
    CHECK(m.p_target(1) == doctest::Approx(0.5));
    CHECK(m.target_marginal().sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(m.context_marginal().sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimate_probabilities refuses D = 0") {
    CooccurrenceStats empty(3, 1, Weighting::uniform);
    CHECK_THROWS_AS(ProbabilityModel::from_stats(empty), DataError);
}

TEST_CASE("pmi_value on the log-2 case and shifts") {
    auto m = abab_model();
    auto v = pmi_value(m, 0, 1, 1.0);
    REQUIRE(v.has_value());
    CHECK(*v == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    auto shifted = pmi_value(m, 0, 1, 5.0);
    CHECK(*shifted == doctest::Approx(std::log(2.0) - std::log(5.0)).epsilon(1e-12));
    CHECK_FALSE(pmi_value(m, 0, 0, 1.0).has_value());  // unobserved pair -> missing
}

TEST_CASE("independent exact distribution has PMI identically zero") {
    Eigen::VectorXd u(3);
    u << 0.5, 0.3, 0.2;
    auto exact = ExactWindowModel::independent(3, 3, u);
    auto m = ProbabilityModel::from_exact(exact);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(*pmi_value(m, i, j, 1.0) == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("zero marginal raises, distinct from a missing pair") {
    // Token 2 exists in the dictionary but never appears in the stream.
    std::vector<int> ids{0, 1, 0, 1};
    auto stats = CooccurrenceStats::from_stream(ids, 3, 1, Weighting::uniform);
    auto m = ProbabilityModel::from_stats(stats);
    CHECK_THROWS_AS(pmi_value(m, 2, 0, 1.0), NumericalError);
    CHECK_THROWS_AS(pmi_vector(m, 2), NumericalError);
}

TEST_CASE("pmi_matrix policies") {
    auto m = abab_model();
    auto s = pmi_matrix(m, 1.0, MissingPolicy::sentinel, -1.0);
    CHECK(*s.value(0, 0) == -1.0);  // zero-count pair takes the sentinel
    CHECK(*s.value(0, 1) == doctest::Approx(std::log(2.0)));
    Eigen::MatrixXd dense = s.dense();
    CHECK(dense(1, 1) == -1.0);

    auto u = pmi_matrix(m, 1.0, MissingPolicy::undefined);
    CHECK_FALSE(u.value(0, 0).has_value());
    CHECK_THROWS_AS(u.dense(), NumericalError);
}

TEST_CASE("shift linearity at every defined entry") {
    std::mt19937_64 rng(19);
    std::vector<int> ids(2000);
    for (auto& v : ids) v = static_cast<int>(rng() % 8);
    auto m = ProbabilityModel::from_stats(
        CooccurrenceStats::from_stream(ids, 8, 3, Weighting::inverse_distance));
    auto p1 = pmi_matrix(m, 1.0, MissingPolicy::undefined);
    auto pk = pmi_matrix(m, 7.0, MissingPolicy::undefined);
    for (auto& [key, v] : p1.values) {
        auto other = pk.values.find(key);
        REQUIRE(other != pk.values.end());
        CHECK(other->second == doctest::Approx(v - std::log(7.0)).epsilon(1e-12));
    }
}

TEST_CASE("PMI symmetry for symmetric pair distributions") {
    std::mt19937_64 rng(31);
    std::vector<int> ids(3000);
    for (auto& v : ids) v = static_cast<int>(rng() % 6);
    auto m = ProbabilityModel::from_stats(
        CooccurrenceStats::from_stream(ids, 6, 2, Weighting::uniform));
    auto p = pmi_matrix(m, 1.0, MissingPolicy::sentinel, -1.0);
    CHECK(p.symmetric(1e-10));
}

TEST_CASE("ppmi clamps and dominates") {
    auto m = abab_model();
    auto p = pmi_matrix(m, 5.0, MissingPolicy::sentinel, -1.0);
    auto pp = ppmi(p);
    for (auto& [key, v] : pp.values) {
        CHECK(v >= 0.0);
        CHECK(v >= p.values.at(key));
    }
    CHECK(pp.sentinel == 0.0);
}

TEST_CASE("pmi_vector matches the matrix row") {
    auto m = abab_model();
    auto vec = pmi_vector(m, 0, 1.0, -1.0);
    auto mat = pmi_matrix(m, 1.0, MissingPolicy::sentinel, -1.0);
    for (int j = 0; j < 2; ++j) CHECK(vec[j] == doctest::Approx(*mat.value(0, j)));
}

TEST_CASE("pmi_vector components verified against direct formula on an exact model") {
    auto exact = ExactWindowModel::dirichlet(3, 3, 1.0, 99);
    auto m = ProbabilityModel::from_exact(exact);
    auto vec = pmi_vector(m, 1);
    for (int j = 0; j < 3; ++j) {
        double direct = std::log(exact.p_pair(1, j)) - std::log(exact.p_word(1)) -
                        std::log(exact.p_word(j));
        CHECK(vec[j] == doctest::Approx(direct).epsilon(1e-12));
    }
}

TEST_CASE("exact window model invariants") {
    auto exact = ExactWindowModel::dirichlet(4, 4, 0.7, 5);
    auto m = ProbabilityModel::from_exact(exact);

    // Pair distribution is symmetric and normalised.
    double sum = 0;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            CHECK(m.p_pair(i, j) == doctest::Approx(m.p_pair(j, i)).epsilon(1e-12));
            sum += m.p_pair(i, j);
        }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    // Induced distributions and set conditionals normalise.
    for (int i = 0; i < 4; ++i)
        CHECK(m.induced_distribution(i).sum() == doctest::Approx(1.0).epsilon(1e-9));
    for (auto& set : std::vector<std::vector<int>>{{0}, {1, 2}, {0, 2, 3}}) {
        CHECK(m.p_ctx_given_set(set).sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(m.p_set(set) > 0.0);
    }

    // Singleton reduction: p(c|{w}) equals the pairwise conditional exactly.
    for (int w = 0; w < 4; ++w) {
        auto joint = m.p_ctx_given_set({w});
        auto pairc = m.induced_distribution(w);
        for (int j = 0; j < 4; ++j) CHECK(joint[j] == pairc[j]);
    }
}

TEST_CASE("non-normalised exact spec is a hard error") {
    std::vector<double> bad(16, 1.0);  // sums to 16
    CHECK_THROWS_AS(ExactWindowModel::from_table(2, 4, bad), ConfigError);
    CHECK_THROWS_AS(ExactWindowModel::from_table(2, 4, std::vector<double>(3, 0.2)), ConfigError);
}

TEST_CASE("empirical joint tables flow into the probability model") {
    std::mt19937_64 rng(3);
    std::vector<int> ids(500);
    for (auto& v : ids) v = static_cast<int>(rng() % 4);
    auto stats = CooccurrenceStats::from_stream(ids, 4, 3, Weighting::uniform);
    auto joints = accumulate_joint(ids, 4, {{0, 1}}, 3);
    auto m = ProbabilityModel::from_stats(stats, joints);
    CHECK(m.p_set({0, 1}) > 0.0);
    CHECK(m.p_ctx_given_set({0, 1}).sum() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(m.p_set({2, 3}), ConfigError);  // unregistered set
}

TEST_CASE("unigram distortion renormalises") {
    Eigen::VectorXd p(3);
    p << 0.7, 0.2, 0.1;
    auto q = distort_unigram(p, 0.75);
    CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q[2] / q[0] > p[2] / p[0]);  // flattened towards uniform
}

TEST_CASE("PMI file round trip") {
    auto m = abab_model();
    auto p = pmi_matrix(m, 5.0, MissingPolicy::sentinel, -1.0);
    p.save("pmi_test.tsv");
    auto back = PmiMatrix::load("pmi_test.tsv");
    CHECK(back.n == p.n);
    CHECK(back.shift == doctest::Approx(p.shift));
    CHECK(back.policy == MissingPolicy::sentinel);
    for (auto& [key, v] : p.values) CHECK(back.values.at(key) == doctest::Approx(v));
    std::remove("pmi_test.tsv");
}
