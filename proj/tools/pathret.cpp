// pathret: corpus indexing, search-path training data, n-gram scorer
// training, constrained decoding and evaluation in one binary.

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pathret/batch.hpp"
#include "pathret/decoder.hpp"
#include "pathret/eval.hpp"
#include "pathret/fm_index.hpp"
#include "pathret/traingen.hpp"

using namespace pathret;

namespace {

int g_log_level = 1;  // 0 quiet, 1 info, 2 debug

void log_info(const std::string& msg) {
    if (g_log_level >= 1) std::cerr << "[pathret] " << msg << "\n";
}

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 0;  // 0: serial
    std::string log_level = "info";
};

void echo_config(const std::string& subcommand, const std::vector<std::string>& kv) {
    if (g_log_level < 1) return;
    std::ostringstream ss;
    ss << "run " << subcommand << " {";
    for (std::size_t i = 0; i < kv.size(); ++i) ss << (i ? ", " : "") << kv[i];
    ss << "}";
    log_info(ss.str());
}

FMIndex load_or_build_index(const std::string& index_path, const std::string& corpus_path,
                            std::size_t sample_rate) {
    if (!index_path.empty()) {
        log_info("loading index " + index_path);
        return FMIndex::load(index_path);
    }
    log_info("building index from " + corpus_path);
    return FMIndex::build(ingest_file(corpus_path), sample_rate);
}

void run_inspect_query(const FMIndex& idx, const std::string& text) {
    const Vocabulary& v = idx.vocabulary();
    std::vector<TokenId> ngram;
    for (const std::string& w : tokenize_words(text)) {
        auto id = v.lookup(w);
        if (!id) {
            std::cout << "token \"" << w << "\" not in vocabulary; no matches\n";
            return;
        }
        ngram.push_back(*id);
    }
    if (ngram.empty()) return;
    std::cout << "count: " << idx.count(ngram) << "\n";
    DocSet docs = idx.match_docs(ngram);
    std::cout << "docs (" << docs.size() << "):";
    std::size_t shown = 0;
    for (DocId d : docs) {
        if (++shown > 20) {
            std::cout << " ...";
            break;
        }
        std::cout << " " << d;
    }
    std::cout << "\ncontinuations:";
    auto conts = idx.continuations(ngram);
    std::sort(conts.begin(), conts.end(),
              [](auto& a, auto& b) { return a.second > b.second; });
    for (std::size_t i = 0; i < conts.size() && i < 20; ++i) {
        std::cout << " " << v.surface(conts[i].first) << "(" << conts[i].second << ")";
    }
    std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"search-path retrieval over an FM-indexed corpus"};
    app.require_subcommand(1);
    app.set_config("--config");

    GlobalOpts global;
    app.add_option("--seed", global.seed, "global random seed")->capture_default_str();
    app.add_option("--threads", global.threads, "worker threads (0 = serial)")
        ->capture_default_str();
    app.add_option("--log-level", global.log_level, "quiet|info|debug")->capture_default_str();

    // index build / inspect
    auto* index_cmd = app.add_subcommand("index", "index operations");
    index_cmd->require_subcommand(1);
    auto* build_cmd = index_cmd->add_subcommand("build", "build an index from a corpus");
    std::string corpus_path, out_path;
    std::size_t sample_rate = 32;
    build_cmd->add_option("--corpus", corpus_path, "corpus jsonl")->required();
    build_cmd->add_option("--out", out_path, "output index file")->required();
    build_cmd->add_option("--sample-rate", sample_rate, "suffix-array sample rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* inspect_cmd = app.add_subcommand("inspect", "index statistics and n-gram queries");
    std::string inspect_index, inspect_ngram;
    inspect_cmd->add_option("--index", inspect_index, "index file")->required();
    inspect_cmd->add_option("--ngram", inspect_ngram, "one-shot query (otherwise reads stdin)");

    // traingen
    auto* tg_cmd = app.add_subcommand("traingen", "generate training search paths");
    std::string tg_corpus, tg_index, tg_dataset, tg_out;
    TraingenConfig tg_cfg;
    tg_cmd->add_option("--corpus", tg_corpus, "corpus jsonl")->required();
    tg_cmd->add_option("--index", tg_index, "prebuilt index (else built from corpus)");
    tg_cmd->add_option("--dataset", tg_dataset, "qa jsonl with gold_doc_id/gold_answer")
        ->required();
    tg_cmd->add_option("--out", tg_out, "output jsonl")->required();
    tg_cmd->add_option("--max-keyword-len", tg_cfg.max_keyword_len)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tg_cmd->add_option("--min-count", tg_cfg.min_count)->capture_default_str();
    tg_cmd->add_option("--max-count-frac", tg_cfg.max_count_frac)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    tg_cmd->add_option("--w-entity", tg_cfg.w_entity)->capture_default_str();
    tg_cmd->add_option("--w-freq", tg_cfg.w_freq)->capture_default_str();
    tg_cmd->add_option("--w-title", tg_cfg.w_title)->capture_default_str();
    tg_cmd->add_option("--w-answer", tg_cfg.w_answer)->capture_default_str();
    tg_cmd->add_option("--title-first-prob", tg_cfg.title_first_prob)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    tg_cmd->add_option("--punct-augment-prob", tg_cfg.punct_augment_prob)
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    tg_cmd->add_option("--paths-per-query", tg_cfg.paths_per_query)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tg_cmd->add_option("--max-path-len", tg_cfg.max_path_len)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tg_cmd->add_option("--partition-target", tg_cfg.partition_target)
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    tg_cmd->add_option("--kw-sep", tg_cfg.kw_sep, "keyword separator string")
        ->capture_default_str();
    tg_cmd->add_option("--ans-sep", tg_cfg.ans_sep, "answer separator string")
        ->capture_default_str();

    // train-scorer
    auto* ts_cmd = app.add_subcommand("train-scorer", "train the n-gram scoring model");
    std::string ts_index, ts_train, ts_out;
    int ts_order = 4;
    ts_cmd->add_option("--index", ts_index, "index file (base vocabulary)")->required();
    ts_cmd->add_option("--train", ts_train, "traingen output jsonl")->required();
    ts_cmd->add_option("--out", ts_out, "output model file")->required();
    ts_cmd->add_option("--order", ts_order, "n-gram order")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    std::string ts_kw_sep = std::string(kKwSepSurface), ts_ans_sep = std::string(kAnsSepSurface);
    ts_cmd->add_option("--kw-sep", ts_kw_sep, "keyword separator string")->capture_default_str();
    ts_cmd->add_option("--ans-sep", ts_ans_sep, "answer separator string")->capture_default_str();

    // decode
    auto* dec_cmd = app.add_subcommand("decode", "constrained beam decoding over a dataset");
    std::string dec_index, dec_model, dec_dataset, dec_out;
    BatchDecodeOptions dec_opts;
    bool unconstrained = false;
    dec_cmd->add_option("--index", dec_index, "index file")->required();
    dec_cmd->add_option("--model", dec_model, "scorer model file")->required();
    dec_cmd->add_option("--dataset", dec_dataset, "qa jsonl")->required();
    dec_cmd->add_option("--out", dec_out, "predictions jsonl")->required();
    dec_cmd->add_option("--beam", dec_opts.decode.beam_size, "beam size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    dec_cmd->add_option("--max-tokens", dec_opts.decode.max_tokens)
        ->check(CLI::Range(std::size_t{2}, std::size_t{100000}))
        ->capture_default_str();
    dec_cmd->add_option("--cost-cap", dec_opts.decode.cost_cap)->capture_default_str();
    dec_cmd->add_option("--record-docs", dec_opts.record_docs)->capture_default_str();
    dec_cmd->add_flag("--unconstrained", unconstrained, "decode without corpus constraints");

    // eval
    auto* ev_cmd = app.add_subcommand("eval", "score predictions against a dataset");
    std::string ev_pred, ev_dataset, ev_corpus, ev_out;
    std::vector<std::size_t> ev_ks = {1, 5};
    bool ev_docid = false;
    ev_cmd->add_option("--predictions", ev_pred)->required();
    ev_cmd->add_option("--dataset", ev_dataset)->required();
    ev_cmd->add_option("--corpus", ev_corpus)->required();
    ev_cmd->add_option("--k", ev_ks, "hits@k cutoffs")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    ev_cmd->add_flag("--doc-id-mode", ev_docid, "hit = gold doc id retrieved");
    ev_cmd->add_option("--out", ev_out, "machine-readable report path");

    for (CLI::App* sc : {index_cmd, build_cmd, inspect_cmd, tg_cmd, ts_cmd, dec_cmd, ev_cmd}) {
        sc->fallthrough();  // global flags may follow the subcommand
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    g_log_level = global.log_level == "quiet" ? 0 : global.log_level == "debug" ? 2 : 1;

    try {
        if (*build_cmd) {
            echo_config("index build", {"corpus=" + corpus_path, "out=" + out_path,
                                        "sample_rate=" + std::to_string(sample_rate)});
            Corpus corpus = ingest_file(corpus_path);
            FMIndex idx = FMIndex::build(corpus, sample_rate);
            idx.save(out_path);
            log_info("indexed " + std::to_string(idx.doc_count()) + " docs, " +
                     std::to_string(idx.text_size()) + " tokens -> " + out_path);
        } else if (*inspect_cmd) {
            FMIndex idx = FMIndex::load(inspect_index);
            std::cout << "documents:  " << idx.doc_count() << "\n"
                      << "tokens:     " << idx.text_size() << "\n"
                      << "vocabulary: " << idx.vocabulary().size() << "\n"
                      << "sample rate: " << idx.sample_rate() << "\n";
            if (!inspect_ngram.empty()) {
                run_inspect_query(idx, inspect_ngram);
            } else if (!isatty(0)) {
                std::string line;
                while (std::getline(std::cin, line)) {
                    if (!line.empty()) run_inspect_query(idx, line);
                }
            } else {
                std::cout << "enter n-grams, one per line (ctrl-d to quit)\n";
                std::string line;
                while (std::getline(std::cin, line)) {
                    if (!line.empty()) run_inspect_query(idx, line);
                }
            }
        } else if (*tg_cmd) {
            echo_config("traingen",
                        {"corpus=" + tg_corpus, "dataset=" + tg_dataset, "out=" + tg_out,
                         "seed=" + std::to_string(global.seed),
                         "paths_per_query=" + std::to_string(tg_cfg.paths_per_query),
                         "title_first_prob=" + std::to_string(tg_cfg.title_first_prob)});
            Corpus corpus = ingest_file(tg_corpus);
            FMIndex idx = tg_index.empty() ? FMIndex::build(corpus)
                                           : FMIndex::load(tg_index);
            auto dataset = read_qa_file(tg_dataset);
            auto examples =
                global.threads > 1
                    ? traingen_parallel(corpus, idx, dataset, tg_cfg, global.seed, global.threads)
                    : traingen_serial(corpus, idx, dataset, tg_cfg, global.seed);
            write_train_records(tg_out, examples, corpus);
            std::size_t warnings = 0;
            for (const auto& ex : examples) warnings += ex.oversized_partition ? 1 : 0;
            log_info("wrote " + std::to_string(examples.size()) + " examples (" +
                     std::to_string(warnings) + " oversized) -> " + tg_out);
        } else if (*ts_cmd) {
            echo_config("train-scorer", {"index=" + ts_index, "train=" + ts_train,
                                         "order=" + std::to_string(ts_order), "out=" + ts_out});
            FMIndex idx = FMIndex::load(ts_index);
            auto pairs = read_train_pairs(ts_train);
            Vocabulary vocab = idx.vocabulary();
            TraingenConfig cfg;
            cfg.kw_sep = ts_kw_sep;
            cfg.ans_sep = ts_ans_sep;
            auto examples = encode_train_pairs(pairs, vocab, cfg);
            NgramModel model = NgramModel::train(examples, vocab, ts_order);
            model.save(ts_out);
            log_info("trained order-" + std::to_string(ts_order) + " model on " +
                     std::to_string(examples.size()) + " examples -> " + ts_out);
        } else if (*dec_cmd) {
            dec_opts.constrained = !unconstrained;
            echo_config("decode",
                        {"index=" + dec_index, "model=" + dec_model, "dataset=" + dec_dataset,
                         "out=" + dec_out, "beam=" + std::to_string(dec_opts.decode.beam_size),
                         "max_tokens=" + std::to_string(dec_opts.decode.max_tokens),
                         "cost_cap=" + std::to_string(dec_opts.decode.cost_cap),
                         std::string("constrained=") + (dec_opts.constrained ? "yes" : "no")});
            FMIndex idx = FMIndex::load(dec_index);
            NgramModel model = NgramModel::load(dec_model);
            auto dataset = read_qa_file(dec_dataset);
            auto records =
                global.threads > 1
                    ? decode_dataset_parallel(idx, model, dataset, dec_opts, global.threads)
                    : decode_dataset_serial(idx, model, dataset, dec_opts);
            write_decode_records(dec_out, records);
            std::size_t failed = 0, fallback = 0;
            for (const auto& r : records) {
                failed += r.failed ? 1 : 0;
                fallback += r.used_fallback ? 1 : 0;
            }
            log_info("decoded " + std::to_string(records.size()) + " queries (" +
                     std::to_string(failed) + " failed, " + std::to_string(fallback) +
                     " fallback) -> " + dec_out);
        } else if (*ev_cmd) {
            echo_config("eval", {"predictions=" + ev_pred, "dataset=" + ev_dataset,
                                 "corpus=" + ev_corpus});
            Corpus corpus = ingest_file(ev_corpus);
            auto dataset = read_qa_file(ev_dataset);
            auto records = load_eval_records(ev_pred, dataset, corpus);
            MetricsReport report = evaluate(records, corpus, ev_ks, ev_docid);
            std::cout << report_to_table(report);
            if (!ev_out.empty()) {
                std::ofstream out(ev_out);
                if (!out) throw DataError("cannot write report: " + ev_out);
                out << report_to_json(report) << "\n";
            }
        }
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
