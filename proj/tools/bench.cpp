// Timing comparison of the serial reference paths against the OpenMP kernels:
// co-occurrence accumulation, full SGNS loss sweeps, KG ranking, transitive closure.
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <omp.h>

#include "semvec/cooccur.hpp"
#include "semvec/factorize.hpp"
#include "semvec/kg.hpp"
#include "semvec/kg_diagnostics.hpp"

using namespace semvec;

namespace {

struct Timing {
    double serial, parallel;
};

template <class F>
double time_best_of(int reps, F&& fn) {
    double best = 1e30;
    for (int r = 0; r < reps; ++r) {
        double t0 = omp_get_wtime();
        fn();
        best = std::min(best, omp_get_wtime() - t0);
    }
    return best;
}

void report(const char* name, Timing t) {
    std::printf("%-28s serial %8.3f ms   omp %8.3f ms   speedup %5.2fx\n", name,
                1e3 * t.serial, 1e3 * t.parallel, t.serial / t.parallel);
}

}  // namespace

int main(int argc, char** argv) {
    int threads = argc > 1 ? std::atoi(argv[1]) : omp_get_max_threads();
    int scale = argc > 2 ? std::atoi(argv[2]) : 1;
    std::printf("benchmarking with %d threads (scale %d)\n\n", threads, scale);

    std::mt19937_64 rng(7);

    {  // co-occurrence accumulation over a synthetic id stream
        int n_tokens = 400000 * scale, vocab = 2000, window = 5;
        std::uniform_int_distribution<int> pick(0, vocab - 1);
        std::vector<int> ids(n_tokens);
        for (auto& v : ids) v = pick(rng);
        Timing t;
        t.serial = time_best_of(3, [&] {
            CooccurrenceStats::from_stream(ids, vocab, window, Weighting::inverse_distance, 1);
        });
        t.parallel = time_best_of(3, [&] {
            CooccurrenceStats::from_stream(ids, vocab, window, Weighting::inverse_distance,
                                           threads);
        });
        report("cooccur accumulate", t);
    }

    {  // full SGNS loss sweep
        int n = 300, d = 64;
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::vector<int> ids(20000);
        for (auto& v : ids) v = pick(rng);
        auto stats = CooccurrenceStats::from_stream(ids, n, 5, Weighting::uniform, 1);
        auto targets = sgns_targets(stats, 5.0, true);
        std::normal_distribution<double> gauss(0, 0.1);
        Eigen::MatrixXd W(d, n), C(d, n);
        for (int c = 0; c < n; ++c)
            for (int r = 0; r < d; ++r) {
                W(r, c) = gauss(rng);
                C(r, c) = gauss(rng);
            }
        volatile double sink = 0;
        Timing t;
        omp_set_num_threads(1);
        t.serial = time_best_of(3, [&] { sink = sgns_loss(targets, W, C); });
        omp_set_num_threads(threads);
        t.parallel = time_best_of(3, [&] { sink = sgns_loss(targets, W, C); });
        (void)sink;
        report("sgns full loss", t);
    }

    {  // KG ranking over a synthetic graph
        int ne = 3000, nr = 8, ntrain = 12000, ntest = 600 * scale;
        std::uniform_int_distribution<int> pe(0, ne - 1), pr(0, nr - 1);
        std::vector<std::vector<std::array<std::string, 3>>> splits(3);
        auto draw = [&](int count, std::vector<std::array<std::string, 3>>& out) {
            for (int i = 0; i < count; ++i)
                out.push_back({"e" + std::to_string(pe(rng)), "r" + std::to_string(pr(rng)),
                               "e" + std::to_string(pe(rng))});
        };
        draw(ntrain, splits[0]);
        draw(64, splits[1]);
        draw(ntest, splits[2]);
        auto kg = kg_from_triples(splits);
        auto model = init_kg_model(KgKind::MuRE, kg, 64, 64, 3);
        Timing t;
        t.serial = time_best_of(2, [&] { rank_eval(model, kg, "test", 1); });
        t.parallel = time_best_of(2, [&] { rank_eval(model, kg, "test", threads); });
        report("kg rank_eval", t);

        Timing tc;
        tc.serial = time_best_of(2, [&] { classify_eval(model, kg, 1); });
        tc.parallel = time_best_of(2, [&] { classify_eval(model, kg, threads); });
        report("kg classify_eval", tc);
    }

    {  // transitive closure on a sparse random digraph
        int nodes = 3000 * scale, edges = 9000 * scale;
        std::uniform_int_distribution<int> pn(0, nodes - 1);
        std::vector<std::vector<std::array<std::string, 3>>> splits(1);
        for (int i = 0; i < edges; ++i)
            splits[0].push_back({"n" + std::to_string(pn(rng)), "rel",
                                 "n" + std::to_string(pn(rng))});
        auto kg = kg_from_triples(splits);
        Timing t;
        t.serial = time_best_of(2, [&] { khs(kg, 0, "train", 1); });
        t.parallel = time_best_of(2, [&] { khs(kg, 0, "train", threads); });
        report("khs transitive closure", t);
    }

    return 0;
}
