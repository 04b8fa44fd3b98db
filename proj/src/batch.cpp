#include "pathret/batch.hpp"

#include <fstream>

#include <json.hpp>

namespace pathret {

DecodeRecord decode_one(const FMIndex& index, const ScoringModel& scorer, const QaRecord& qa,
                        const BatchDecodeOptions& opts) {
    DecodeRecord rec;
    rec.question = qa.question;
    std::vector<TokenId> query =
        tokenize_lookup(serialize_input(qa.question), scorer.vocabulary());
    try {
        DecodeResult res = opts.constrained
                               ? decode(query, scorer, index, opts.decode)
                               : decode_unconstrained(query, scorer, index, opts.decode);
        for (const Keyword& k : res.path.keywords) rec.path.push_back(k.surface);
        if (res.path.answer) rec.path.push_back(res.path.answer->surface);
        rec.answer = res.answer;
        rec.evidence_doc_id = res.evidence_doc_id ? static_cast<std::int64_t>(*res.evidence_doc_id)
                                                  : -1;
        rec.matched_doc_count = res.docset.size();
        rec.score = res.score;
        rec.used_fallback = res.used_fallback;
        rec.emitted = res.emitted;
        std::size_t keep = std::min(opts.record_docs, res.docset.size());
        rec.docs.assign(res.docset.ids().begin(),
                        res.docset.ids().begin() + static_cast<std::ptrdiff_t>(keep));
    } catch (const DecodeFailedError& e) {
        rec.failed = true;
        for (const Keyword& k : e.best_partial.keywords) rec.path.push_back(k.surface);
    }
    return rec;
}

std::vector<DecodeRecord> decode_dataset_serial(const FMIndex& index, const ScoringModel& scorer,
                                                const std::vector<QaRecord>& dataset,
                                                const BatchDecodeOptions& opts) {
    std::vector<DecodeRecord> out;
    out.reserve(dataset.size());
    for (const QaRecord& qa : dataset) out.push_back(decode_one(index, scorer, qa, opts));
    return out;
}

std::vector<DecodeRecord> decode_dataset_parallel(const FMIndex& index,
                                                  const ScoringModel& scorer,
                                                  const std::vector<QaRecord>& dataset,
                                                  const BatchDecodeOptions& opts, int threads) {
    std::vector<DecodeRecord> out(dataset.size());
    const std::int64_t n = static_cast<std::int64_t>(dataset.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : 1)
    for (std::int64_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] =
            decode_one(index, scorer, dataset[static_cast<std::size_t>(i)], opts);
    }
    return out;
}

std::vector<TrainingExample> traingen_serial(const Corpus& corpus, const FMIndex& index,
                                             const std::vector<QaRecord>& dataset,
                                             const TraingenConfig& config, std::uint64_t seed) {
    std::vector<TrainingExample> out;
    for (std::size_t q = 0; q < dataset.size(); ++q) {
        auto ex = generate_for_query(corpus, index, dataset[q], config, seed, q);
        out.insert(out.end(), std::make_move_iterator(ex.begin()),
                   std::make_move_iterator(ex.end()));
    }
    return out;
}

std::vector<TrainingExample> traingen_parallel(const Corpus& corpus, const FMIndex& index,
                                               const std::vector<QaRecord>& dataset,
                                               const TraingenConfig& config, std::uint64_t seed,
                                               int threads) {
    std::vector<std::vector<TrainingExample>> per_query(dataset.size());
    const std::int64_t n = static_cast<std::int64_t>(dataset.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : 1)
    for (std::int64_t q = 0; q < n; ++q) {
        per_query[static_cast<std::size_t>(q)] = generate_for_query(
            corpus, index, dataset[static_cast<std::size_t>(q)], config, seed,
            static_cast<std::size_t>(q));
    }
    std::vector<TrainingExample> out;
    for (auto& v : per_query) {
        out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    }
    return out;
}

void write_decode_records(const std::string& path, const std::vector<DecodeRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write predictions file: " + path);
    for (const DecodeRecord& rec : records) {
        nlohmann::json j;
        j["question"] = rec.question;
        j["path"] = rec.path;
        j["answer"] = rec.answer;
        j["evidence_doc_id"] = rec.evidence_doc_id;
        j["matched_doc_count"] = rec.matched_doc_count;
        j["score"] = rec.score;
        j["used_fallback"] = rec.used_fallback;
        j["failed"] = rec.failed;
        j["docs"] = rec.docs;
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failure on predictions file: " + path);
}

void write_train_records(const std::string& path, const std::vector<TrainingExample>& examples,
                         const Corpus& corpus) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write traingen file: " + path);
    for (const TrainingExample& ex : examples) {
        nlohmann::json j;
        j["question"] = ex.question;
        std::vector<std::string> kws;
        for (const Keyword& k : ex.path.keywords) kws.push_back(k.surface);
        j["keywords"] = kws;
        j["answer"] = ex.path.answer ? ex.path.answer->surface : "";
        j["input"] = ex.input;
        j["target"] = ex.target;
        j["gold_doc_id"] = corpus.doc(ex.gold_doc_id).external_id;
        j["matched_docs"] = ex.matched_docs;
        j["oversized_partition"] = ex.oversized_partition;
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failure on traingen file: " + path);
}

std::vector<std::pair<std::string, std::string>> read_train_pairs(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open traingen file: " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            out.emplace_back(j.at("input").get<std::string>(), j.at("target").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw DataError("traingen line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<TrainExample> encode_train_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs, Vocabulary& vocab,
    const TraingenConfig& config) {
    std::vector<TrainExample> out;
    out.reserve(pairs.size());
    for (const auto& [input, target] : pairs) {
        TrainExample ex;
        ex.input = tokenize_extend(input, vocab);
        ex.target = encode_target(target, vocab, config);
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace pathret
