#include <map>
#include <random>

#include "doctest.h"
#include "semvec/corpus.hpp"

using namespace semvec;

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    auto toks = tokenize("Hello, WORLD!  a_b-c 42x");
    CHECK(toks == std::vector<std::string>{"hello", "world", "a", "b", "c", "42x"});
}

TEST_CASE("build_dictionary counts, filters and orders") {
    std::vector<std::string> stream{"a", "b", "a", "b", "c"};
    auto dict = build_dictionary(stream, 2);
    REQUIRE(dict.size() == 2);
    // a and b tie at count 2; lexicographic tie-break puts a first.
    CHECK(dict.tokens[0] == "a");
    CHECK(dict.tokens[1] == "b");
    CHECK(dict.counts[0] == 2);
    CHECK(dict.id_of("c") == -1);
    CHECK(dict.total_tokens == 5);

    auto all = build_dictionary(stream, 1);
    CHECK(all.size() == 3);  // min_count 1 retains every distinct token

    CHECK_THROWS_AS(build_dictionary(stream, 100), DataError);
    CHECK_THROWS_AS(build_dictionary({}, 1), DataError);
}

TEST_CASE("dictionary id order is by descending count") {
    std::vector<std::string> stream;
    for (int i = 0; i < 5; ++i) stream.push_back("x");
    for (int i = 0; i < 3; ++i) stream.push_back("y");
    stream.push_back("z");
    auto dict = build_dictionary(stream, 1);
    CHECK(dict.tokens == std::vector<std::string>{"x", "y", "z"});
}

TEST_CASE("vocab file round trip") {
    std::vector<std::string> stream{"b", "b", "b", "a", "a", "q"};
    auto dict = build_dictionary(stream, 2);
    save_vocab(dict, "vocab_test.tsv");
    auto back = load_vocab("vocab_test.tsv");
    CHECK(back.tokens == dict.tokens);
    CHECK(back.counts == dict.counts);
    CHECK(back.total_tokens == dict.total_tokens);
    std::remove("vocab_test.tsv");
}

TEST_CASE("subsampling boundaries") {
    // f(w) <= tau: keep probability 1, token always kept.
    std::vector<std::string> stream(1000, "rare");
    for (int i = 0; i < 9000; ++i) stream.push_back("common");
    auto dict = build_dictionary(stream, 1);

    double tau = 0.2;  // f(rare) = 0.1 <= tau
    SubsampleStats st;
    auto ids = subsample_filter(stream, dict, tau, 42, &st);
    int rare_id = dict.id_of("rare");
    int64_t kept_rare = 0;
    for (int id : ids) kept_rare += id == rare_id;
    CHECK(kept_rare == 1000);

    // tau = 1: nothing is ever discarded.
    auto all = subsample_filter(stream, dict, 1.0, 42, &st);
    CHECK(all.size() == stream.size());
    CHECK(st.dropped_subsample == 0);

    CHECK_THROWS_AS(subsample_filter(stream, dict, 0.0, 1, nullptr), ConfigError);
}

TEST_CASE("oov tokens are dropped silently and counted") {
    std::vector<std::string> stream{"a", "a", "b", "a", "a"};
    auto dict = build_dictionary(stream, 4);  // only a survives
    SubsampleStats st;
    auto ids = subsample_filter(stream, dict, 1.0, 0, &st);
    CHECK(ids.size() == 4);
    CHECK(st.dropped_oov == 1);
}

TEST_CASE("subsampling keep-rate matches the Monte-Carlo oracle at f = 4 tau") {
    // 100k tokens, word w with count 4000 -> f = 0.04; tau = 0.01 -> keep = 0.5.
    std::vector<std::string> stream;
    stream.reserve(100000);
    std::mt19937_64 rng(7);
    for (int i = 0; i < 100000; ++i)
        stream.push_back(i % 25 == 0 ? "w" : "f" + std::to_string(rng() % 50));
    auto dict = build_dictionary(stream, 1);
    REQUIRE(dict.counts[dict.id_of("w")] == 4000);

    double tau = 0.01;
    auto ids = subsample_filter(stream, dict, tau, 1234, nullptr);
    int w_id = dict.id_of("w");
    int64_t kept = 0;
    for (int id : ids) kept += id == w_id;
    double rate = static_cast<double>(kept) / 4000.0;

    // Independent Monte-Carlo oracle with its own RNG.
    std::mt19937_64 mc(999);
    std::bernoulli_distribution keep(std::sqrt(tau / 0.04));
    int64_t mc_kept = 0;
    for (int i = 0; i < 4000; ++i) mc_kept += keep(mc);
    double mc_rate = static_cast<double>(mc_kept) / 4000.0;

    CHECK(rate == doctest::Approx(0.5).epsilon(0.07));
    CHECK(rate == doctest::Approx(mc_rate).epsilon(0.1));
}

TEST_CASE("subsampling is deterministic and monotone in tau") {
    std::vector<std::string> stream;
    for (int i = 0; i < 20000; ++i) stream.push_back("t" + std::to_string(i % 7));
    auto dict = build_dictionary(stream, 1);

    auto a = subsample_filter(stream, dict, 1e-3, 5, nullptr);
    auto b = subsample_filter(stream, dict, 1e-3, 5, nullptr);
    CHECK(a == b);  // bit-identical under the same seed
    auto c = subsample_filter(stream, dict, 1e-3, 6, nullptr);
    CHECK(a != c);

    // Smaller tau keeps a subset of occurrences at the same seed.
    auto tight = subsample_filter(stream, dict, 1e-4, 5, nullptr);
    CHECK(tight.size() <= a.size());
    std::map<int, int64_t> count_a, count_tight;
    for (int id : a) ++count_a[id];
    for (int id : tight) ++count_tight[id];
    for (auto [id, n] : count_tight) CHECK(n <= count_a[id]);
}

TEST_CASE("extract_pairs window enumeration") {
    // [a,b,a,b], l=1, uniform: (a,b) x3, (b,a) x3, D = 6.
    std::vector<int> ids{0, 1, 0, 1};
    auto pairs = extract_pairs(ids, 1, Weighting::uniform);
    double d = 0, ab = 0, ba = 0;
    for (auto& p : pairs) {
        d += p.weight;
        if (p.target == 0 && p.context == 1) ab += p.weight;
        if (p.target == 1 && p.context == 0) ba += p.weight;
    }
    CHECK(d == 6.0);
    CHECK(ab == 3.0);
    CHECK(ba == 3.0);

    // Single-token corpus: empty stream.
    CHECK(extract_pairs({3}, 2, Weighting::uniform).empty());

    // [a,b,c], l=2, inverse distance.
    auto inv = extract_pairs({0, 1, 2}, 2, Weighting::inverse_distance);
    std::map<std::pair<int, int>, double> w;
    for (auto& p : inv) w[{p.target, p.context}] += p.weight;
    CHECK(w[{0, 1}] == 1.0);
    CHECK(w[{0, 2}] == 0.5);
    CHECK(w[{1, 0}] == 1.0);
    CHECK(w[{1, 2}] == 1.0);
    CHECK(w[{2, 1}] == 1.0);
    CHECK(w[{2, 0}] == 0.5);
}

TEST_CASE("pair totals are symmetric under uniform weighting") {
    std::mt19937_64 rng(3);
    std::vector<int> ids(500);
    for (auto& v : ids) v = static_cast<int>(rng() % 11);
    std::map<std::pair<int, int>, double> w;
    for_each_pair(ids, 4, Weighting::uniform, [&](const CorpusPair& p) {
        w[{p.target, p.context}] += p.weight;
    });
    for (auto& [key, weight] : w) CHECK(weight == w[{key.second, key.first}]);
}
