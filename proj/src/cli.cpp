#include "semvec/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "semvec/cooccur.hpp"
#include "semvec/corpus.hpp"
#include "semvec/eval.hpp"
#include "semvec/factorize.hpp"
#include "semvec/kg.hpp"
#include "semvec/kg_diagnostics.hpp"
#include "semvec/manifest.hpp"
#include "semvec/pmi.hpp"
#include "semvec/semantics.hpp"
#include "semvec/surface.hpp"

namespace fs = std::filesystem;

namespace semvec {

namespace {

uint64_t effective_seed(uint64_t configured) {
    if (const char* env = std::getenv("SEMVEC_SEED")) return std::strtoull(env, nullptr, 10);
    return configured;
}

std::string join_args(int argc, const char* const* argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += " ";
        s += argv[i];
    }
    return s;
}

std::vector<int> resolve_tokens(const std::vector<std::string>& names,
                                const std::vector<std::string>& vocab) {
    std::vector<int> ids;
    for (const auto& name : names) {
        auto it = std::find(vocab.begin(), vocab.end(), name);
        if (it == vocab.end()) throw DataError("word not in dictionary: " + name);
        ids.push_back(static_cast<int>(it - vocab.begin()));
    }
    return ids;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write: " + path);
    out << text;
}

// ----- corpus -----

int cmd_corpus_vocab(const std::string& input, int64_t min_count, const std::string& out) {
    auto tokens = read_tokens(input);
    auto dict = build_dictionary(tokens, min_count);
    save_vocab(dict, out);
    std::printf("vocab: %d tokens (total %lld) -> %s\n", dict.size(),
                static_cast<long long>(dict.total_tokens), out.c_str());
    return 0;
}

int cmd_corpus_pairs(const std::string& input, const std::string& vocab_path, int window,
                     const std::string& weighting, double subsample, uint64_t seed,
                     const std::string& out) {
    auto tokens = read_tokens(input);
    Dictionary dict = vocab_path.empty() ? build_dictionary(tokens, 1) : load_vocab(vocab_path);
    SubsampleStats st;
    auto ids = subsample > 0 ? subsample_filter(tokens, dict, subsample, seed, &st)
                             : to_ids(tokens, dict, &st);
    auto pairs = extract_pairs(ids, window, weighting_from_name(weighting));
    save_pairs(pairs, out);
    std::printf("pairs: %zu emitted (%lld kept tokens, %lld oov, %lld subsampled) -> %s\n",
                pairs.size(), static_cast<long long>(st.kept),
                static_cast<long long>(st.dropped_oov),
                static_cast<long long>(st.dropped_subsample), out.c_str());
    return 0;
}

int cmd_corpus_counts(const std::string& input, const std::string& vocab_path, int window,
                      const std::string& weighting, double subsample, uint64_t seed, int threads,
                      const std::string& out) {
    auto tokens = read_tokens(input);
    Dictionary dict = vocab_path.empty() ? build_dictionary(tokens, 1) : load_vocab(vocab_path);
    SubsampleStats st;
    auto ids = subsample > 0 ? subsample_filter(tokens, dict, subsample, seed, &st)
                             : to_ids(tokens, dict, &st);
    auto stats =
        CooccurrenceStats::from_stream(ids, dict.size(), window, weighting_from_name(weighting),
                                       threads);
    stats.save(out);
    std::printf("counts: D=%.9g nnz=%zu -> %s\n", stats.total_weight(), stats.nonzeros(),
                out.c_str());
    return 0;
}

// ----- pmi -----

int cmd_pmi_build(const std::string& counts, double k, const std::string& missing, double sentinel,
                  bool use_ppmi, const std::string& out) {
    auto stats = CooccurrenceStats::load(counts);
    auto model = ProbabilityModel::from_stats(stats);
    MissingPolicy policy =
        missing == "sentinel" ? MissingPolicy::sentinel : MissingPolicy::undefined;
    PmiMatrix pmi = pmi_matrix(model, k, policy, sentinel);
    if (use_ppmi) pmi = ppmi(pmi);
    pmi.save(out);
    std::printf("pmi: n=%d defined=%zu shift=%.9g -> %s\n", pmi.n, pmi.values.size(), pmi.shift,
                out.c_str());
    return 0;
}

// ----- surface -----

int cmd_surface_check(const std::string& dist, int samples, uint64_t seed,
                      const std::string& report_path) {
    std::vector<std::string> words;
    auto exact = ExactWindowModel::from_json_file(dist, &words);
    auto model = ProbabilityModel::from_exact(exact);
    const int n = model.size();

    Eigen::VectorXd p = model.context_marginal();
    auto rng = make_rng(seed);

    nlohmann::json rep;
    bool ok = true;

    // Word-induced points.
    double max_p3 = 0.0;
    bool p4_ok = true;
    for (int i = 0; i < n; ++i) {
        auto pt = surface_point(model.induced_distribution(i), p);
        max_p3 = std::max(max_p3, tangent_normal_residual(pt));
        Orthant o = orthant_check(pt.s, 1e-12);
        if (o == Orthant::all_positive || o == Orthant::all_negative) p4_ok = false;
    }

    // Random sampled points.
    double max_p2 = tangent_normal_residual(surface_point(p, p));
    double origin_norm = surface_point(p, p).s.lpNorm<Eigen::Infinity>();
    double max_closure_sym = 0.0;
    bool p1_violation_found = false;
    int closure_pairs = 0;
    for (int s = 0; s < samples; ++s) {
        auto a = random_surface_point(p, 1.0, rng);
        auto b = random_surface_point(p, 1.0, rng);
        max_p3 = std::max(max_p3, tangent_normal_residual(a));
        Orthant o = orthant_check(a.s, 1e-12);
        if (o == Orthant::all_positive || o == Orthant::all_negative) p4_ok = false;
        double rab = sum_closure_residual(a, b);
        double rba = sum_closure_residual(b, a);
        max_closure_sym = std::max(max_closure_sym, std::abs(rab - rba));
        // Midpoint off the surface -> non-linearity.
        Eigen::VectorXd mid = 0.5 * (a.s + b.s);
        if (off_surface_deviation(mid, p) > 1e-6) p1_violation_found = true;
        // Constructed partner closes exactly.
        auto partner = closure_partner(a, rng);
        max_closure_sym = std::max(max_closure_sym, std::abs(sum_closure_residual(a, partner)));
        ++closure_pairs;
    }

    rep["p1_nonlinearity_witnessed"] = p1_violation_found;
    rep["p2_origin_max_abs"] = origin_norm;
    rep["p3_max_normal_residual"] = max_p3;
    rep["p4_all_mixed_sign"] = p4_ok;
    rep["p5_max_residual"] = max_closure_sym;
    rep["samples"] = samples;
    rep["closure_pairs"] = closure_pairs;
    rep["words"] = words;

    ok = p1_violation_found && origin_norm == 0.0 && max_p3 < 1e-8 && p4_ok &&
         max_closure_sym < 1e-10;
    rep["pass"] = ok;
    if (!report_path.empty()) write_text(report_path, rep.dump(2) + "\n");
    std::printf("%s surface check (P1 %d, P2 %.3g, P3 %.3g, P4 %d, P5 %.3g)\n",
                ok ? "[PASS]" : "[FAIL]", static_cast<int>(p1_violation_found), origin_norm,
                max_p3, static_cast<int>(p4_ok), max_closure_sym);
    if (!ok) throw NumericalError("surface properties violated");
    return 0;
}

// ----- train -----

int cmd_train(const std::string& mode, const std::string& pmi_path, const std::string& counts_path,
              const std::string& vocab_path, int dim, double k, double lr, int epochs,
              uint64_t seed, bool no_distort, const std::string& out_dir,
              const std::string& cmdline) {
    if (mode != "sgns" && mode != "lsq" && mode != "tied")
        throw ConfigError("train mode must be sgns, lsq or tied");
    fs::create_directories(out_dir);

    nlohmann::json cfg{{"mode", mode},   {"dim", dim},       {"k", k},
                       {"lr", lr},       {"epochs", epochs}, {"seed", seed},
                       {"distort", !no_distort}};
    RunManifest manifest(cmdline, cfg, seed);

    TrainConfig tc;
    tc.dim = dim;
    tc.k = k;
    tc.lr = lr;
    tc.epochs = epochs;
    tc.seed = seed;
    tc.distort = !no_distort;
    tc.tied = mode == "tied";

    std::vector<double> losses;
    EmbeddingSet set;
    std::string vectors = out_dir + "/vectors.txt";
    manifest.add_output(vectors);
    if (mode == "sgns") {
        if (counts_path.empty()) throw ConfigError("train sgns needs --counts");
        manifest.add_input(counts_path);
        manifest.begin(out_dir + "/manifest.json");
        auto stats = CooccurrenceStats::load(counts_path);
        set = train_sgns(stats, tc, &losses);
    } else {
        PmiMatrix pmi;
        if (!pmi_path.empty()) {
            manifest.add_input(pmi_path);
            manifest.begin(out_dir + "/manifest.json");
            pmi = PmiMatrix::load(pmi_path);
        } else if (!counts_path.empty()) {
            manifest.add_input(counts_path);
            manifest.begin(out_dir + "/manifest.json");
            auto stats = CooccurrenceStats::load(counts_path);
            pmi = pmi_matrix(ProbabilityModel::from_stats(stats), 1.0, MissingPolicy::sentinel,
                             -1.0);
        } else {
            throw ConfigError("train lsq/tied needs --pmi or --counts");
        }
        set = train_lsq(pmi, tc, &losses);
    }
    if (!vocab_path.empty()) {
        auto dict = load_vocab(vocab_path);
        if (dict.size() != set.W.cols())
            throw DataError("vocab size does not match the trained matrix");
        set.tokens = dict.tokens;
    }
    save_embeddings(set, vectors);
    manifest.add_output(vectors + ".ctx");
    manifest.set("final_loss", losses.empty() ? 0.0 : losses.back());
    manifest.set("epoch_losses", losses);
    manifest.finalize();
    std::printf("train %s: dim=%d epochs=%d final loss %.6g -> %s\n", mode.c_str(), dim, epochs,
                losses.empty() ? 0.0 : losses.back(), vectors.c_str());
    return 0;
}

// ----- semantics -----

int cmd_semantics_decompose(const std::string& dist, const std::string& target,
                            const std::string& set_csv, const std::string& out) {
    std::vector<std::string> words;
    auto exact = ExactWindowModel::from_json_file(dist, &words);
    auto model = ProbabilityModel::from_exact(exact);
    int t = resolve_tokens({target}, words)[0];
    auto W = resolve_tokens(split_commas(set_csv), words);
    auto rep = verify_lemma1(model, t, W);
    nlohmann::json j;
    j["target"] = target;
    j["set"] = split_commas(set_csv);
    j["rho"] = vector_json(rep.rho);
    j["sigma"] = vector_json(rep.sigma);
    j["tau"] = rep.tau;
    j["lhs"] = vector_json(rep.lhs);
    j["rhs"] = vector_json(rep.rhs);
    j["residual"] = rep.residual;
    std::string text = j.dump(2) + "\n";
    if (out.empty()) std::fputs(text.c_str(), stdout);
    else write_text(out, text);
    return 0;
}

int cmd_semantics_analogy(const std::string& model_path, const std::string& method,
                          const std::string& query, const std::string& interaction,
                          const std::string& metric, bool include_inputs, int top_k,
                          const std::string& out) {
    auto set = load_embeddings(model_path);
    auto names = tokenize(query);
    if (names.size() != 3) throw ConfigError("analogy query must be three words: \"a a* b\"");
    std::vector<std::string> raw(names.begin(), names.end());
    auto ids = resolve_tokens(raw, set.tokens);
    auto res = solve_analogy(set, ids[0], ids[1], ids[2], analogy_method_from_name(method),
                             !include_inputs, interaction_from_name(interaction),
                             metric == "euclidean" ? RankMetric::euclidean : RankMetric::cosine,
                             nullptr, top_k);
    nlohmann::json j;
    j["query"] = raw;
    j["method"] = method;
    nlohmann::json ranked = nlohmann::json::array();
    for (auto [w, score] : res.ranked)
        ranked.push_back({{"word", set.tokens[w]}, {"score", score}});
    j["ranked"] = ranked;
    std::string text = j.dump(2) + "\n";
    if (out.empty()) std::fputs(text.c_str(), stdout);
    else write_text(out, text);
    return 0;
}

int cmd_semantics_arora(const std::string& model_path, const std::string& counts_path,
                        int max_pairs, uint64_t seed, const std::string& out) {
    auto set = load_embeddings(model_path);
    auto stats = CooccurrenceStats::load(counts_path);
    auto model = ProbabilityModel::from_stats(stats);
    if (model.size() != set.W.cols())
        throw DataError("counts vocabulary does not match the embedding matrix");
    auto rep = arora_assumption_check(set, model, max_pairs, seed);

    std::ofstream csv(out);
    if (!csv) throw DataError("cannot write: " + out);
    csv << "kind,i,j,residual\n";
    char buf[96];
    for (int i = 0; i < rep.word_residuals.size(); ++i) {
        if (std::isnan(rep.word_residuals[i])) continue;
        std::snprintf(buf, sizeof(buf), "word,%d,,%.9g\n", i, rep.word_residuals[i]);
        csv << buf;
    }
    for (auto& [i, j, r] : rep.pair_residuals) {
        std::snprintf(buf, sizeof(buf), "pair,%d,%d,%.9g\n", i, j, r);
        csv << buf;
    }
    std::printf(
        "arora check: %zu word rows (%d skipped, mean |res| %.4g), %zu pair rows (mean |res| "
        "%.4g) -> %s\n",
        static_cast<size_t>(rep.word_residuals.size()) - rep.skipped_words, rep.skipped_words,
        rep.word_mean_abs, rep.pair_residuals.size(), rep.pair_mean_abs, out.c_str());
    return 0;
}

// ----- eval -----

int cmd_eval_wordsim(const std::string& model_path, const std::string& data,
                     const std::string& interaction, const std::string& out) {
    auto set = load_embeddings(model_path);
    auto ds = load_wordsim(data);
    auto res = eval_wordsim(set, set.tokens, ds, interaction_from_name(interaction));
    std::printf("wordsim %s: spearman %.4f over %d pairs (%d oov)\n", data.c_str(), res.rho,
                res.scored, res.oov);
    if (!out.empty()) {
        nlohmann::json rec = nlohmann::json::array();
        rec.push_back({{"model", model_path},
                       {"task", "wordsim:" + data},
                       {"interaction", interaction},
                       {"value", res.rho},
                       {"scored", res.scored},
                       {"oov", res.oov}});
        write_text(out, rec.dump(2) + "\n");
    }
    return 0;
}

int cmd_eval_analogy(const std::string& model_path, const std::string& data,
                     const std::string& method, const std::string& metric, bool include_inputs,
                     int threads, const std::string& out) {
    auto set = load_embeddings(model_path);
    auto ds = load_analogy(data);
    auto res = eval_analogies(set, set.tokens, ds, analogy_method_from_name(method),
                              !include_inputs,
                              metric == "cosine" ? RankMetric::cosine : RankMetric::euclidean,
                              Interaction::WW, threads);
    std::printf("analogy %s: accuracy %.4f over %d questions (%d oov)\n", data.c_str(),
                res.accuracy, res.scored, res.oov);
    for (auto& [section, acc] : res.per_section)
        std::printf("  %-40s %.4f\n", section.c_str(), acc);
    if (!out.empty()) {
        nlohmann::json rec = nlohmann::json::array();
        rec.push_back({{"model", model_path},
                       {"task", "analogy:" + data},
                       {"interaction", method},
                       {"value", res.accuracy},
                       {"scored", res.scored},
                       {"oov", res.oov}});
        write_text(out, rec.dump(2) + "\n");
    }
    return 0;
}

// ----- kg -----

int cmd_kg_train(const std::string& data_dir, const std::string& kind_name, int dim, int dr,
                 double lr, int batch, int negs, int epochs, int patience, uint64_t seed,
                 const std::string& out, const std::string& cmdline) {
    auto kg = load_triples(data_dir);
    KgKind kind = kg_kind_from_name(kind_name);
    KgTrainConfig cfg;
    cfg.de = dim;
    cfg.dr = kind == KgKind::TuckER ? dr : dim;
    cfg.lr = lr;
    cfg.batch = batch;
    cfg.negs = negs;
    cfg.epochs = epochs;
    cfg.patience = patience;
    cfg.seed = seed;
    cfg.verbose = true;

    nlohmann::json jc{{"model", kind_name}, {"de", cfg.de},     {"dr", cfg.dr},
                      {"lr", lr},           {"batch", batch},   {"negs", negs},
                      {"epochs", epochs},   {"patience", patience}, {"seed", seed}};
    RunManifest manifest(cmdline, jc, seed);
    for (const char* split : {"train", "valid", "test"})
        manifest.add_input(data_dir + "/" + split + ".txt");
    manifest.add_output(out);
    manifest.begin(out + ".manifest.json");

    std::vector<double> losses;
    KgModel model = train_kg(kg, kind, cfg, &losses);
    model.save(out);
    manifest.set("final_loss", losses.empty() ? 0.0 : losses.back());
    manifest.finalize();
    std::printf("kg train %s: %d entities, %d relations -> %s\n", kind_name.c_str(),
                kg.n_entities(), kg.n_relations(), out.c_str());
    return 0;
}

int cmd_kg_eval(const std::string& what, const std::string& model_path,
                const std::string& data_dir, const std::string& split, bool filtered,
                int threads) {
    auto kg = load_triples(data_dir);
    auto model = KgModel::load(model_path);
    if (what == "rank") {
        auto res = rank_eval(model, kg, split, threads, filtered);
        std::printf("rank (%s, %s): Hits@10 %.4f MRR %.4f over %lld evals\n", split.c_str(),
                    filtered ? "filtered" : "raw", res.overall.hits10, res.overall.mrr,
                    static_cast<long long>(res.overall.evals));
        for (auto& [r, st] : res.per_relation)
            std::printf("  %-40s Hits@10 %.4f MRR %.4f\n", kg.relations[r].c_str(), st.hits10,
                        st.mrr);
    } else if (what == "classify") {
        auto res = classify_eval(model, kg, threads);
        std::printf("classify: train acc %.4f test acc %.4f other/pair %.2f (%lld pairs)\n",
                    res.overall.accuracy_train(), res.overall.accuracy_test(),
                    res.overall.other_avg(), static_cast<long long>(res.overall.pairs));
        for (auto& [r, st] : res.per_relation)
            std::printf("  %-40s train %.4f test %.4f other %.2f\n", kg.relations[r].c_str(),
                        st.accuracy_train(), st.accuracy_test(), st.other_avg());
    } else {
        throw ConfigError("kg eval expects rank or classify");
    }
    return 0;
}

int cmd_kg_diagnose(const std::string& model_path, const std::string& data_dir,
                    const std::string& types_path, bool with_eval, int threads,
                    const std::string& out) {
    auto kg = load_triples(data_dir);
    if (!types_path.empty()) load_relation_types(kg, types_path);
    std::optional<KgModel> model;
    if (!model_path.empty()) model = KgModel::load(model_path);
    std::optional<RankResult> ranks;
    std::optional<ClassifyResult> classes;
    if (with_eval && model) {
        ranks = rank_eval(*model, kg, "test", threads);
        classes = classify_eval(*model, kg, threads);
    }
    auto reports = diagnose(kg, model ? &*model : nullptr, ranks ? &*ranks : nullptr,
                            classes ? &*classes : nullptr, threads);
    std::string text = relation_report_json(reports) + "\n";
    if (out.empty()) std::fputs(text.c_str(), stdout);
    else write_text(out, text);
    return 0;
}

int cmd_kg_split_nell(const std::string& data_dir, uint64_t seed, const std::string& out_dir) {
    auto kg = load_triples(data_dir);
    auto split = split_nell(kg, seed);
    fs::create_directories(out_dir);
    auto dump = [&](const std::vector<Triple>& triples, const std::string& name) {
        std::ofstream out(out_dir + "/" + name + ".txt");
        if (!out) throw DataError("cannot write: " + out_dir + "/" + name + ".txt");
        for (const auto& t : triples)
            out << split.entities[t.s] << "\t" << split.relations[t.r] << "\t"
                << split.entities[t.o] << "\n";
    };
    dump(split.train, "train");
    dump(split.valid, "valid");
    dump(split.test, "test");
    std::printf("split-nell: train %zu valid %zu test %zu -> %s\n", split.train.size(),
                split.valid.size(), split.test.size(), out_dir.c_str());
    return 0;
}

// ----- report -----

int cmd_report(const std::vector<std::string>& inputs, const std::string& out) {
    std::vector<Table> tables;
    for (const auto& path : inputs) tables.push_back(Table::load(path));
    Table::merge(tables).save(out);
    std::printf("report: %zu inputs -> %s\n", inputs.size(), out.c_str());
    return 0;
}

// ----- run pipeline -----

const std::vector<std::string> kStageKeys = {
    "stage",     "input",  "vocab",   "min_count", "window", "weighting", "subsample",
    "counts",    "pmi",    "shift_k", "missing",   "sentinel", "ppmi",    "loss",
    "dim",       "neg",    "lr",      "epochs",    "out",    "model",    "data",
    "interaction", "method", "metric", "threads",  "batch",  "negs",     "patience",
    "dr",        "split",  "types",    "inputs"};

void validate_stage_keys(const nlohmann::json& stage, size_t index) {
    for (auto it = stage.begin(); it != stage.end(); ++it) {
        if (std::find(kStageKeys.begin(), kStageKeys.end(), it.key()) == kStageKeys.end())
            throw ConfigError("unknown key 'stages[" + std::to_string(index) + "]." + it.key() +
                              "' in pipeline config");
    }
}

int cmd_run(const std::string& config_path, const std::string& cmdline) {
    std::ifstream in(config_path);
    if (!in) throw DataError("cannot open config: " + config_path);
    nlohmann::json cfg;
    try {
        in >> cfg;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        std::string k = it.key();
        if (k != "seed" && k != "out_dir" && k != "stages")
            throw ConfigError("unknown key '" + k + "' in pipeline config");
    }
    uint64_t seed = effective_seed(cfg.value("seed", 1ULL));
    std::string out_dir = cfg.value("out_dir", std::string("runs/out"));
    fs::create_directories(out_dir);
    auto resolve = [&](const std::string& p) {
        return p.empty() || p[0] == '/' || p.rfind("./", 0) == 0 ? p : out_dir + "/" + p;
    };

    RunManifest manifest(cmdline, cfg, seed);
    manifest.begin(out_dir + "/manifest.json");

    const auto& stages = cfg.value("stages", nlohmann::json::array());
    for (size_t si = 0; si < stages.size(); ++si) {
        const auto& st = stages[si];
        validate_stage_keys(st, si);
        std::string kind = st.value("stage", "");
        if (kind.empty()) throw ConfigError("stages[" + std::to_string(si) + "].stage missing");

        // Content address: stage config + input hashes + root seed.
        std::string address = st.dump() + "|" + std::to_string(seed);
        std::vector<std::string> outputs;
        auto note_output = [&](const std::string& p) { outputs.push_back(resolve(p)); };
        for (const char* key : {"input", "vocab", "counts", "pmi", "model", "data", "types"}) {
            if (st.contains(key)) {
                std::string p = resolve(st[key].get<std::string>());
                if (fs::exists(p) && fs::is_regular_file(p)) address += "|" + hash_file_hex(p);
            }
        }
        if (st.contains("out")) note_output(st["out"].get<std::string>());
        std::string stage_hash = hash_string_hex(address);

        bool fresh = !outputs.empty();
        for (const auto& o : outputs) {
            std::string marker = o + ".stagehash";
            if (!fs::exists(o) || !fs::exists(marker)) {
                fresh = false;
                break;
            }
            std::ifstream m(marker);
            std::string prev((std::istreambuf_iterator<char>(m)),
                             std::istreambuf_iterator<char>());
            if (prev != stage_hash) {
                fresh = false;
                break;
            }
        }
        if (fresh) {
            std::printf("stage %zu (%s): up to date, skipped\n", si, kind.c_str());
            continue;
        }

        if (kind == "vocab") {
            cmd_corpus_vocab(resolve(st.at("input")), st.value("min_count", 5), resolve(st.at("out")));
        } else if (kind == "counts") {
            cmd_corpus_counts(resolve(st.at("input")),
                              st.contains("vocab") ? resolve(st.at("vocab")) : "",
                              st.value("window", 5),
                              st.value("weighting", std::string("inverse_distance")),
                              st.value("subsample", 1e-5), seed, st.value("threads", 1),
                              resolve(st.at("out")));
        } else if (kind == "pmi") {
            cmd_pmi_build(resolve(st.at("counts")), st.value("shift_k", 1.0),
                          st.value("missing", std::string("sentinel")), st.value("sentinel", -1.0),
                          st.value("ppmi", false), resolve(st.at("out")));
        } else if (kind == "train") {
            cmd_train(st.value("loss", std::string("lsq")),
                      st.contains("pmi") ? resolve(st.at("pmi")) : "",
                      st.contains("counts") ? resolve(st.at("counts")) : "",
                      st.contains("vocab") ? resolve(st.at("vocab")) : "", st.value("dim", 100),
                      st.value("neg", 5.0), st.value("lr", 0.01), st.value("epochs", 10), seed,
                      false, resolve(st.at("out")), cmdline);
        } else if (kind == "eval_wordsim") {
            cmd_eval_wordsim(resolve(st.at("model")) + "/vectors.txt", resolve(st.at("data")),
                             st.value("interaction", std::string("WW")),
                             st.contains("out") ? resolve(st.at("out")) : "");
        } else if (kind == "eval_analogy") {
            cmd_eval_analogy(resolve(st.at("model")) + "/vectors.txt", resolve(st.at("data")),
                             st.value("method", std::string("offset")),
                             st.value("metric", std::string("euclidean")), false,
                             st.value("threads", 1),
                             st.contains("out") ? resolve(st.at("out")) : "");
        } else if (kind == "report") {
            std::vector<std::string> inputs;
            for (const auto& p : st.at("inputs")) inputs.push_back(resolve(p.get<std::string>()));
            cmd_report(inputs, resolve(st.at("out")));
        } else if (kind == "kg_train") {
            cmd_kg_train(resolve(st.at("data")), st.value("model", std::string("mure")),
                         st.value("dim", 200), st.value("dr", 30), st.value("lr", 0.001),
                         st.value("batch", 128), st.value("negs", 50), st.value("epochs", 500),
                         st.value("patience", 20), seed, resolve(st.at("out")), cmdline);
        } else {
            throw ConfigError("unknown stage '" + kind + "' at stages[" + std::to_string(si) + "]");
        }
        for (const auto& o : outputs)
            if (fs::exists(o)) write_text(o + ".stagehash", stage_hash);
    }
    manifest.finalize();
    return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"semvec: PMI statistics, embedding factorization, semantic identity checks, "
                 "and knowledge-graph relation diagnostics"};
    app.require_subcommand(1);
    std::string cmdline = join_args(argc, argv);

    // corpus
    auto* corpus = app.add_subcommand("corpus", "dictionary and pair extraction");
    corpus->require_subcommand(1);
    std::string c_input, c_out, c_vocab, c_weighting = "inverse_distance";
    int64_t c_min_count = 5;
    int c_window = 5, c_threads = 1;
    double c_subsample = 1e-5;
    uint64_t c_seed = 1;
    auto* vocab = corpus->add_subcommand("vocab", "build the vocabulary TSV");
    vocab->add_option("--input", c_input)->required();
    vocab->add_option("--min-count", c_min_count);
    vocab->add_option("--out", c_out)->required();
    auto* pairs = corpus->add_subcommand("pairs", "emit the weighted pair stream");
    pairs->add_option("--input", c_input)->required();
    pairs->add_option("--vocab", c_vocab);
    pairs->add_option("--window", c_window);
    pairs->add_option("--weighting", c_weighting);
    pairs->add_option("--subsample", c_subsample);
    pairs->add_option("--seed", c_seed);
    pairs->add_option("--out", c_out)->required();
    auto* counts = corpus->add_subcommand("counts", "accumulate co-occurrence statistics");
    counts->add_option("--input", c_input)->required();
    counts->add_option("--vocab", c_vocab);
    counts->add_option("--window", c_window);
    counts->add_option("--weighting", c_weighting);
    counts->add_option("--subsample", c_subsample);
    counts->add_option("--seed", c_seed);
    counts->add_option("--threads", c_threads);
    counts->add_option("--out", c_out)->required();

    // pmi
    auto* pmi_cmd = app.add_subcommand("pmi", "derive (shifted) PMI matrices");
    std::string p_counts, p_out, p_missing = "sentinel";
    double p_k = 1.0, p_sentinel = -1.0;
    bool p_ppmi = false;
    pmi_cmd->add_option("--counts", p_counts)->required();
    pmi_cmd->add_option("--shift-k", p_k);
    pmi_cmd->add_option("--missing", p_missing)->check(CLI::IsMember({"sentinel", "undefined"}));
    pmi_cmd->add_option("--sentinel", p_sentinel);
    pmi_cmd->add_flag("--ppmi", p_ppmi);
    pmi_cmd->add_option("--out", p_out)->required();

    // surface
    auto* surface_cmd = app.add_subcommand("surface", "PMI-surface property checks");
    surface_cmd->require_subcommand(1);
    auto* scheck = surface_cmd->add_subcommand("check", "verify P1-P5 on a distribution");
    std::string s_dist, s_report;
    int s_samples = 100;
    uint64_t s_seed = 1;
    scheck->add_option("--dist", s_dist)->required();
    scheck->add_option("--samples", s_samples);
    scheck->add_option("--seed", s_seed);
    scheck->add_option("--report", s_report);

    // train
    auto* train_cmd = app.add_subcommand("train", "train embeddings (sgns|lsq|tied)");
    std::string t_mode, t_pmi, t_counts, t_vocab, t_out;
    int t_dim = 100, t_epochs = 10;
    double t_k = 5.0, t_lr = 0.01;
    uint64_t t_seed = 1;
    bool t_no_distort = false;
    train_cmd->add_option("mode", t_mode)->required()->check(CLI::IsMember({"sgns", "lsq", "tied"}));
    train_cmd->add_option("--pmi", t_pmi);
    train_cmd->add_option("--counts", t_counts);
    train_cmd->add_option("--vocab", t_vocab);
    train_cmd->add_option("--dim", t_dim);
    train_cmd->add_option("--neg", t_k);
    train_cmd->add_option("--lr", t_lr);
    train_cmd->add_option("--epochs", t_epochs);
    train_cmd->add_option("--seed", t_seed);
    train_cmd->add_flag("--no-distort", t_no_distort);
    train_cmd->add_option("--out", t_out)->required();

    // semantics
    auto* sem = app.add_subcommand("semantics", "decompositions and analogy queries");
    sem->require_subcommand(1);
    auto* decompose = sem->add_subcommand("decompose", "Lemma-1 decomposition on an exact model");
    std::string d_dist, d_target, d_set, d_out;
    decompose->add_option("--dist", d_dist)->required();
    decompose->add_option("--target", d_target)->required();
    decompose->add_option("--set", d_set)->required();
    decompose->add_option("--out", d_out);
    auto* arora = sem->add_subcommand("arora", "per-word/pair residuals of the latent-model relations");
    std::string ar_model, ar_counts, ar_out;
    int ar_pairs = 1000;
    uint64_t ar_seed = 1;
    arora->add_option("--model", ar_model)->required();
    arora->add_option("--counts", ar_counts)->required();
    arora->add_option("--pairs", ar_pairs);
    arora->add_option("--seed", ar_seed);
    arora->add_option("--out", ar_out)->required();
    auto* analogy = sem->add_subcommand("analogy", "solve an analogy query");
    std::string a_model, a_method = "offset", a_query, a_interaction = "WW", a_metric = "cosine",
                a_out;
    bool a_include = false;
    int a_topk = 10;
    analogy->add_option("--model", a_model)->required();
    analogy->add_option("--method", a_method);
    analogy->add_option("--query", a_query)->required();
    analogy->add_option("--interaction", a_interaction);
    analogy->add_option("--metric", a_metric);
    analogy->add_flag("--include-inputs", a_include);
    analogy->add_option("--top", a_topk);
    analogy->add_option("--out", a_out);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "intrinsic embedding evaluation");
    eval_cmd->require_subcommand(1);
    auto* ws = eval_cmd->add_subcommand("wordsim", "Spearman against human judgements");
    std::string e_model, e_data, e_interaction = "WW";
    std::string e_out;
    ws->add_option("--model", e_model)->required();
    ws->add_option("--data", e_data)->required();
    ws->add_option("--interaction", e_interaction);
    ws->add_option("--out", e_out);
    auto* an = eval_cmd->add_subcommand("analogy", "analogy accuracy");
    std::string an_model, an_data, an_method = "offset", an_metric = "euclidean";
    bool an_include = false;
    int an_threads = 1;
    an->add_option("--model", an_model)->required();
    an->add_option("--data", an_data)->required();
    an->add_option("--method", an_method);
    an->add_option("--metric", an_metric);
    an->add_flag("--include-inputs", an_include);
    an->add_option("--threads", an_threads);
    std::string an_out;
    an->add_option("--out", an_out);

    // kg
    auto* kg_cmd = app.add_subcommand("kg", "knowledge-graph models and diagnostics");
    kg_cmd->require_subcommand(1);
    auto* ktrain = kg_cmd->add_subcommand("train", "train a link-prediction model");
    std::string k_data, k_model = "mure", k_out = "model.kg";
    int k_dim = 200, k_dr = 30, k_batch = 128, k_negs = 50, k_epochs = 500, k_patience = 20;
    double k_lr = 0.001;
    uint64_t k_seed = 1;
    ktrain->add_option("--data", k_data)->required();
    ktrain->add_option("--model", k_model);
    ktrain->add_option("--dim", k_dim);
    ktrain->add_option("--dr", k_dr);
    ktrain->add_option("--lr", k_lr);
    ktrain->add_option("--batch", k_batch);
    ktrain->add_option("--negs", k_negs);
    ktrain->add_option("--epochs", k_epochs);
    ktrain->add_option("--patience", k_patience);
    ktrain->add_option("--seed", k_seed);
    ktrain->add_option("--out", k_out);
    auto* keval = kg_cmd->add_subcommand("eval", "rank or classification evaluation");
    std::string ke_what, ke_model, ke_data, ke_split = "test";
    bool ke_filtered = false;
    int ke_threads = 1;
    keval->add_option("what", ke_what)->required()->check(CLI::IsMember({"rank", "classify"}));
    keval->add_option("--model", ke_model)->required();
    keval->add_option("--data", ke_data)->required();
    keval->add_option("--split", ke_split);
    keval->add_flag("--filtered", ke_filtered);
    keval->add_option("--threads", ke_threads);
    auto* kdiag = kg_cmd->add_subcommand("diagnose", "per-relation diagnostics report");
    std::string kd_model, kd_data, kd_types, kd_out;
    bool kd_eval = false;
    int kd_threads = 1;
    kdiag->add_option("--model", kd_model);
    kdiag->add_option("--data", kd_data)->required();
    kdiag->add_option("--types", kd_types);
    kdiag->add_flag("--with-eval", kd_eval);
    kdiag->add_option("--threads", kd_threads);
    kdiag->add_option("--out", kd_out);
    auto* ksplit = kg_cmd->add_subcommand("split-nell", "re-split pooled triples 10k/10k");
    std::string ks_data, ks_out;
    uint64_t ks_seed = 1;
    ksplit->add_option("--data", ks_data)->required();
    ksplit->add_option("--seed", ks_seed);
    ksplit->add_option("--out-dir", ks_out)->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "merge tabular artifacts");
    std::vector<std::string> r_inputs;
    std::string r_out;
    report_cmd->add_option("inputs", r_inputs)->required();
    report_cmd->add_option("--out", r_out)->required();

    // run
    auto* run_cmd = app.add_subcommand("run", "execute a pipeline config");
    std::string run_config;
    run_cmd->add_option("--config", run_config)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (vocab->parsed()) return cmd_corpus_vocab(c_input, c_min_count, c_out);
        if (pairs->parsed())
            return cmd_corpus_pairs(c_input, c_vocab, c_window, c_weighting, c_subsample,
                                    effective_seed(c_seed), c_out);
        if (counts->parsed())
            return cmd_corpus_counts(c_input, c_vocab, c_window, c_weighting, c_subsample,
                                     effective_seed(c_seed), c_threads, c_out);
        if (pmi_cmd->parsed())
            return cmd_pmi_build(p_counts, p_k, p_missing, p_sentinel, p_ppmi, p_out);
        if (scheck->parsed())
            return cmd_surface_check(s_dist, s_samples, effective_seed(s_seed), s_report);
        if (train_cmd->parsed())
            return cmd_train(t_mode, t_pmi, t_counts, t_vocab, t_dim, t_k, t_lr, t_epochs,
                             effective_seed(t_seed), t_no_distort, t_out, cmdline);
        if (decompose->parsed()) return cmd_semantics_decompose(d_dist, d_target, d_set, d_out);
        if (arora->parsed())
            return cmd_semantics_arora(ar_model, ar_counts, ar_pairs, effective_seed(ar_seed),
                                       ar_out);
        if (analogy->parsed())
            return cmd_semantics_analogy(a_model, a_method, a_query, a_interaction, a_metric,
                                         a_include, a_topk, a_out);
        if (ws->parsed()) return cmd_eval_wordsim(e_model, e_data, e_interaction, e_out);
        if (an->parsed())
            return cmd_eval_analogy(an_model, an_data, an_method, an_metric, an_include,
                                    an_threads, an_out);
        if (ktrain->parsed())
            return cmd_kg_train(k_data, k_model, k_dim, k_dr, k_lr, k_batch, k_negs, k_epochs,
                                k_patience, effective_seed(k_seed), k_out, cmdline);
        if (keval->parsed())
            return cmd_kg_eval(ke_what, ke_model, ke_data, ke_split, ke_filtered, ke_threads);
        if (kdiag->parsed())
            return cmd_kg_diagnose(kd_model, kd_data, kd_types, kd_eval, kd_threads, kd_out);
        if (ksplit->parsed()) return cmd_kg_split_nell(ks_data, effective_seed(ks_seed), ks_out);
        if (report_cmd->parsed()) return cmd_report(r_inputs, r_out);
        if (run_cmd->parsed()) return cmd_run(run_config, cmdline);
        throw ConfigError("no subcommand");
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

}  // namespace semvec
