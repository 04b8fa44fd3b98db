#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathret/corpus.hpp"
#include "pathret/decoder.hpp"
#include "pathret/fm_index.hpp"
#include "pathret/scorer.hpp"
#include "pathret/traingen.hpp"

// Batch drivers over a dataset. Each kernel comes in a serial reference
// version and an OpenMP version; outputs are identical for any thread count
// (per-query state, order-preserving collection, per-query RNG seeding).

namespace pathret {

struct DecodeRecord {
    std::string question;
    std::vector<std::string> path;  // keyword surfaces, decode order
    std::string answer;
    std::int64_t evidence_doc_id = -1;  // -1 when no document matched
    std::size_t matched_doc_count = 0;
    double score = 0.0;
    bool used_fallback = false;
    bool failed = false;
    std::vector<DocId> docs;  // leading matched doc ids, ascending
    std::vector<TokenId> emitted;
};

struct BatchDecodeOptions {
    DecodeOptions decode;
    bool constrained = true;
    std::size_t record_docs = 16;  // matched doc ids kept per record
};

DecodeRecord decode_one(const FMIndex& index, const ScoringModel& scorer, const QaRecord& qa,
                        const BatchDecodeOptions& opts);

std::vector<DecodeRecord> decode_dataset_serial(const FMIndex& index, const ScoringModel& scorer,
                                                const std::vector<QaRecord>& dataset,
                                                const BatchDecodeOptions& opts);
std::vector<DecodeRecord> decode_dataset_parallel(const FMIndex& index,
                                                  const ScoringModel& scorer,
                                                  const std::vector<QaRecord>& dataset,
                                                  const BatchDecodeOptions& opts, int threads);

std::vector<TrainingExample> traingen_serial(const Corpus& corpus, const FMIndex& index,
                                             const std::vector<QaRecord>& dataset,
                                             const TraingenConfig& config, std::uint64_t seed);
std::vector<TrainingExample> traingen_parallel(const Corpus& corpus, const FMIndex& index,
                                               const std::vector<QaRecord>& dataset,
                                               const TraingenConfig& config, std::uint64_t seed,
                                               int threads);

void write_decode_records(const std::string& path, const std::vector<DecodeRecord>& records);
void write_train_records(const std::string& path, const std::vector<TrainingExample>& examples,
                         const Corpus& corpus);

// (input, target) string pairs from a traingen output file.
std::vector<std::pair<std::string, std::string>> read_train_pairs(const std::string& path);

// Serialized pairs -> id-level training examples, extending `vocab` with
// input-side words.
std::vector<TrainExample> encode_train_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs, Vocabulary& vocab,
    const TraingenConfig& config);

}  // namespace pathret
