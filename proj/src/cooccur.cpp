#include "semvec/cooccur.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semvec {

int64_t lcm_up_to(int n) {
    int64_t l = 1;
    for (int d = 2; d <= n; ++d) l = std::lcm(l, static_cast<int64_t>(d));
    return l;
}

CooccurrenceStats::CooccurrenceStats(int vocab_size, int window, Weighting weighting)
    : n_(vocab_size),
      window_(window),
      weighting_(weighting),
      scale_(weighting == Weighting::inverse_distance ? lcm_up_to(window) : 1),
      target_(vocab_size, 0),
      context_(vocab_size, 0) {
    if (vocab_size <= 0) throw ConfigError("vocab_size must be positive");
    if (window < 1) throw ConfigError("window must be >= 1");
}

void CooccurrenceStats::add(int target, int context, int distance) {
    if (target < 0 || target >= n_ || context < 0 || context >= n_)
        throw DataError("pair id out of dictionary range");
    if (distance < 1 || distance > window_) throw DataError("pair distance out of window range");
    int64_t num = weighting_ == Weighting::inverse_distance ? scale_ / distance : 1;
    cells_[pair_key(target, context)] += num;
    target_[target] += num;
    context_[context] += num;
    total_ += num;
}

CooccurrenceStats CooccurrenceStats::from_pairs(const std::vector<CorpusPair>& pairs,
                                                int vocab_size, int window, Weighting weighting) {
    CooccurrenceStats s(vocab_size, window, weighting);
    for (const auto& p : pairs) s.add(p.target, p.context, p.distance);
    return s;
}

CooccurrenceStats CooccurrenceStats::from_stream(const std::vector<int>& ids, int vocab_size,
                                                 int window, Weighting weighting, int nthreads) {
    if (nthreads <= 1 || ids.size() < 2) {
        CooccurrenceStats s(vocab_size, window, weighting);
        for_each_pair(ids, window, weighting,
                      [&](const CorpusPair& p) { s.add(p.target, p.context, p.distance); });
        return s;
    }

    // Shard by contiguous target-position ranges; contexts may read across shard borders.
    int shards = nthreads;
    const auto n = static_cast<ptrdiff_t>(ids.size());
    std::vector<CooccurrenceStats> parts;
    parts.reserve(shards);
    for (int s = 0; s < shards; ++s) parts.emplace_back(vocab_size, window, weighting);

#ifdef _OPENMP
#pragma omp parallel for num_threads(nthreads) schedule(static, 1)
#endif
    for (int s = 0; s < shards; ++s) {
        ptrdiff_t lo = n * s / shards;
        ptrdiff_t hi = n * (s + 1) / shards;
        auto& part = parts[s];
        for (ptrdiff_t t = lo; t < hi; ++t) {
            ptrdiff_t a = std::max<ptrdiff_t>(0, t - window);
            ptrdiff_t b = std::min<ptrdiff_t>(n - 1, t + window);
            for (ptrdiff_t u = a; u <= b; ++u) {
                if (u == t) continue;
                part.add(ids[t], ids[u], static_cast<int>(u > t ? u - t : t - u));
            }
        }
    }

    CooccurrenceStats out = std::move(parts[0]);
    for (int s = 1; s < shards; ++s) out = merge(out, parts[s]);
    return out;
}

CooccurrenceStats CooccurrenceStats::merge(const CooccurrenceStats& a, const CooccurrenceStats& b) {
    if (!a.config_matches(b)) throw ConfigError("cooccurrence merge: config mismatch");
    CooccurrenceStats out = a;
    for (const auto& [key, v] : b.cells_) out.cells_[key] += v;
    for (int i = 0; i < out.n_; ++i) {
        out.target_[i] += b.target_[i];
        out.context_[i] += b.context_[i];
    }
    out.total_ += b.total_;
    return out;
}

double CooccurrenceStats::pair_weight(int i, int j) const {
    auto it = cells_.find(pair_key(i, j));
    return it == cells_.end() ? 0.0 : to_weight(it->second);
}

std::vector<std::pair<uint64_t, int64_t>> CooccurrenceStats::sorted_cells() const {
    std::vector<std::pair<uint64_t, int64_t>> v(cells_.begin(), cells_.end());
    std::sort(v.begin(), v.end());
    return v;
}

void CooccurrenceStats::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write cooccurrence file: " + path);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "#D=%.9g l=%d weighting=%s n=%d scale=%lld\n", total_weight(),
                  window_, weighting_name(weighting_), n_, static_cast<long long>(scale_));
    out << buf;
    for (const auto& [key, num] : sorted_cells()) {
        int i = static_cast<int>(key >> 32);
        int j = static_cast<int>(key & 0xffffffffu);
        std::snprintf(buf, sizeof(buf), "%d\t%d\t%.9g\n", i, j,
                      static_cast<double>(num) / static_cast<double>(scale_));
        out << buf;
    }
}

CooccurrenceStats CooccurrenceStats::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open cooccurrence file: " + path);
    std::string header;
    if (!std::getline(in, header) || header.rfind("#D=", 0) != 0)
        throw DataError("cooccurrence file missing header: " + path);
    int l = 0, n = 0;
    long long scale = 1;
    char wname[64] = {0};
    double d_declared = 0;
    if (std::sscanf(header.c_str(), "#D=%lg l=%d weighting=%63s n=%d scale=%lld", &d_declared, &l,
                    wname, &n, &scale) != 5)
        throw DataError("cooccurrence header parse error: " + header);
    CooccurrenceStats s(n, l, weighting_from_name(wname));
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        int i, j;
        double w;
        if (std::sscanf(line.c_str(), "%d\t%d\t%lg", &i, &j, &w) != 3)
            throw DataError("cooccurrence parse error at line " + std::to_string(lineno));
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw DataError("cooccurrence id out of range at line " + std::to_string(lineno));
        auto num = static_cast<int64_t>(std::llround(w * static_cast<double>(s.scale_)));
        s.cells_[pair_key(i, j)] += num;
        s.target_[i] += num;
        s.context_[j] += num;
        s.total_ += num;
    }
    return s;
}

std::vector<JointStats> accumulate_joint(const std::vector<int>& ids, int vocab_size,
                                         const std::vector<std::vector<int>>& sets, int window) {
    if (window < 1) throw ConfigError("window must be >= 1");
    std::vector<JointStats> out;
    out.reserve(sets.size());

    std::vector<int64_t> incidence(vocab_size, 0);
    const auto n = static_cast<ptrdiff_t>(ids.size());
    for (ptrdiff_t u = 0; u < n; ++u) {
        if (ids[u] < 0 || ids[u] >= vocab_size) throw DataError("token id out of range");
        ptrdiff_t first_t = std::max<ptrdiff_t>(0, u - window);
        ptrdiff_t last_t = std::min<ptrdiff_t>(n - 1, u + window);
        incidence[ids[u]] += last_t - first_t + 1;
    }

    for (const auto& raw : sets) {
        JointStats js;
        js.words = raw;
        std::sort(js.words.begin(), js.words.end());
        js.words.erase(std::unique(js.words.begin(), js.words.end()), js.words.end());
        if (static_cast<int>(js.words.size()) >= window)
            throw ConfigError("joint set size must be < window");
        if (static_cast<int>(js.words.size()) > window / 2)
            std::fprintf(stderr, "warning: joint set of size %zu vs window %d; counts get sparse\n",
                         js.words.size(), window);
        js.window = window;
        js.n_windows = n;
        js.context_incidence = incidence;

        std::vector<char> member(vocab_size, 0);
        for (int w : js.words) member[w] = 1;
        std::vector<int64_t> in_window(js.words.size(), 0);
        auto idx_of = [&](int id) {
            return static_cast<int>(std::lower_bound(js.words.begin(), js.words.end(), id) -
                                    js.words.begin());
        };

        // Sliding occupancy counts of each member over the window t-l..t+l.
        int missing = static_cast<int>(js.words.size());
        auto add_tok = [&](int id, int dir) {
            if (!member[id]) return;
            auto& c = in_window[idx_of(id)];
            if (dir > 0) {
                if (c++ == 0) --missing;
            } else {
                if (--c == 0) ++missing;
            }
        };

        for (ptrdiff_t u = 0; u <= std::min<ptrdiff_t>(n - 1, window); ++u) add_tok(ids[u], +1);
        for (ptrdiff_t t = 0; t < n; ++t) {
            if (t > 0) {
                ptrdiff_t incoming = t + window;
                if (incoming < n) add_tok(ids[incoming], +1);
                ptrdiff_t outgoing = t - window - 1;
                if (outgoing >= 0) add_tok(ids[outgoing], -1);
            }
            if (missing == 0) {
                ++js.set_count;
                ptrdiff_t a = std::max<ptrdiff_t>(0, t - window);
                ptrdiff_t b = std::min<ptrdiff_t>(n - 1, t + window);
                for (ptrdiff_t u = a; u <= b; ++u)
                    if (!member[ids[u]]) ++js.set_context[ids[u]];
            }
        }
        out.push_back(std::move(js));
    }
    return out;
}

}  // namespace semvec
