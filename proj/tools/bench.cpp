// Benchmark: serial reference vs OpenMP kernels (traingen and batch decode)
// on a synthetic corpus, plus index build and query throughput numbers.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "pathret/batch.hpp"
#include "pathret/fm_index.hpp"
#include "support/synth.hpp"

using namespace pathret;
using Clock = std::chrono::steady_clock;

namespace {

double time_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool same_records(const std::vector<DecodeRecord>& a, const std::vector<DecodeRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].emitted != b[i].emitted || a[i].score != b[i].score) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t docs = 600;
    std::size_t queries = 150;
    int threads = 4;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--smoke") == 0) {
            docs = 40;
            queries = 20;
        } else if (std::strcmp(argv[i], "--docs") == 0 && i + 1 < argc) {
            docs = static_cast<std::size_t>(std::stoul(argv[++i]));
        } else if (std::strcmp(argv[i], "--queries") == 0 && i + 1 < argc) {
            queries = static_cast<std::size_t>(std::stoul(argv[++i]));
        } else if (std::strcmp(argv[i], "--threads") == 0 && i + 1 < argc) {
            threads = std::stoi(argv[++i]);
        }
    }

    std::printf("corpus: %zu docs, %zu queries, %d threads\n", docs, queries, threads);
    auto qc = synth::qa_corpus(docs, 12345);
    qc.dataset.resize(std::min(queries, qc.dataset.size()));

    auto t0 = Clock::now();
    FMIndex idx = FMIndex::build(qc.corpus, 16);
    std::printf("index build:        %7.3fs (%zu tokens)\n", time_since(t0), idx.text_size());

    TraingenConfig cfg;
    cfg.paths_per_query = 4;

    t0 = Clock::now();
    auto tg_serial = traingen_serial(qc.corpus, idx, qc.dataset, cfg, 1);
    double tg_s = time_since(t0);
    std::printf("traingen serial:    %7.3fs (%zu examples)\n", tg_s, tg_serial.size());

    t0 = Clock::now();
    auto tg_par = traingen_parallel(qc.corpus, idx, qc.dataset, cfg, 1, threads);
    double tg_p = time_since(t0);
    bool tg_same = tg_par.size() == tg_serial.size();
    for (std::size_t i = 0; tg_same && i < tg_par.size(); ++i) {
        tg_same = tg_par[i].target == tg_serial[i].target;
    }
    std::printf("traingen parallel:  %7.3fs (speedup %.2fx, identical: %s)\n", tg_p,
                tg_s / tg_p, tg_same ? "yes" : "NO");

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& ex : tg_serial) pairs.emplace_back(ex.input, ex.target);
    Vocabulary vocab = qc.corpus.vocabulary();
    auto train = encode_train_pairs(pairs, vocab, cfg);
    t0 = Clock::now();
    NgramModel model = NgramModel::train(train, vocab, 4);
    std::printf("scorer training:    %7.3fs\n", time_since(t0));

    BatchDecodeOptions opts;
    opts.decode.beam_size = 5;
    t0 = Clock::now();
    auto dec_serial = decode_dataset_serial(idx, model, qc.dataset, opts);
    double dec_s = time_since(t0);
    std::printf("decode serial:      %7.3fs (%zu queries)\n", dec_s, dec_serial.size());

    t0 = Clock::now();
    auto dec_par = decode_dataset_parallel(idx, model, qc.dataset, opts, threads);
    double dec_p = time_since(t0);
    std::printf("decode parallel:    %7.3fs (speedup %.2fx, identical: %s)\n", dec_p,
                dec_s / dec_p, same_records(dec_serial, dec_par) ? "yes" : "NO");

    return (tg_same && same_records(dec_serial, dec_par)) ? 0 : 1;
}
