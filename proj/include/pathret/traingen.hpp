#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pathret/corpus.hpp"
#include "pathret/fm_index.hpp"
#include "pathret/partitioner.hpp"

namespace pathret {

struct TraingenConfig {
    std::size_t max_keyword_len = 5;
    std::size_t min_count = 2;
    double max_count_frac = 0.10;  // cap = max(1, ceil(frac * doc_count))
    double w_entity = 0.1;
    double w_freq = 0.05;
    double w_title = 1.0;
    double w_answer = 0.5;
    double title_first_prob = 0.88;
    double punct_augment_prob = 0.25;
    std::size_t paths_per_query = 6;
    std::size_t max_path_len = 8;
    std::size_t partition_target = 10;  // keep sampling until |D_p| < this
    std::string kw_sep = std::string(kKwSepSurface);
    std::string ans_sep = std::string(kAnsSepSurface);

    std::size_t max_count(std::size_t doc_count) const;
};

struct KeywordCandidate {
    Keyword keyword;
    double rouge1 = 0.0;
    std::size_t corpus_count = 0;
    bool entity_award = false;
    bool is_title = false;
    bool contains_answer = false;
    double final_score = 0.0;
};

struct TrainingExample {
    std::string question;
    SearchPath path;  // answer included
    std::string input;
    std::string target;
    DocId gold_doc_id = 0;
    std::size_t matched_docs = 0;          // |partition(keywords only)|
    bool oversized_partition = false;      // could not reach |D_p| < target
};

class StopWords {
public:
    StopWords();  // default English list; punctuation marks count as stops
    bool contains(const std::string& word) const;

private:
    std::unordered_set<std::string> words_;
};

// Unigram overlap F1 between two token sequences, stop words removed from
// both sides, clipped multiset counts.
double rouge1_f1(std::span<const TokenId> a, std::span<const TokenId> b, const StopWords& stops,
                 const Vocabulary& vocab);

// Combines a candidate's score components; stores and returns final_score.
double score_candidate(KeywordCandidate& c, std::span<const TokenId> query_tokens,
                       const StopWords& stops, const Vocabulary& vocab,
                       const TraingenConfig& config);

// All distinct n-grams of the gold document (lengths 1..max_keyword_len),
// minus those starting or ending with a stop word and those outside the
// corpus-count thresholds. Scored and sorted best-first.
std::vector<KeywordCandidate> extract_candidates(const Corpus& corpus, const FMIndex& index,
                                                 const Document& gold,
                                                 std::span<const TokenId> query_tokens,
                                                 std::span<const TokenId> answer_tokens,
                                                 const StopWords& stops,
                                                 const TraingenConfig& config,
                                                 MatchCache* cache = nullptr);

// Samples one search path: the gold title first with probability
// title_first_prob, otherwise the top candidate; then score-proportional
// draws over non-overlapping candidates until fewer than partition_target
// documents match; the answer is appended last (widened to adjacent
// punctuation with probability punct_augment_prob).
TrainingExample sample_path(const Corpus& corpus, const FMIndex& index,
                            const std::string& question, const Document& gold,
                            const Keyword& answer,
                            const std::vector<KeywordCandidate>& candidates,
                            const TraingenConfig& config, std::uint64_t rng_seed,
                            MatchCache* cache = nullptr);

std::string serialize_input(const std::string& question);
std::string serialize_target(const SearchPath& path, const TraingenConfig& config);
SearchPath parse_target(const std::string& target, const Vocabulary& vocab,
                        const TraingenConfig& config);

// Target string -> decoder-grammar token stream (no trailing EOS), extending
// `vocab` with unseen words.
std::vector<TokenId> encode_target(const std::string& target, Vocabulary& vocab,
                                   const TraingenConfig& config);

// paths_per_query examples for one query. The RNG is seeded from
// (global_seed, query_index) so results are independent of worker count.
std::vector<TrainingExample> generate_for_query(const Corpus& corpus, const FMIndex& index,
                                                const QaRecord& qa, const TraingenConfig& config,
                                                std::uint64_t global_seed,
                                                std::size_t query_index);

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace pathret
