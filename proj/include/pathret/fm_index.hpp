#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathret/corpus.hpp"
#include "pathret/wavelet.hpp"

namespace pathret {

/// Sorted set of document ids. Ascending iteration order, no duplicates.
class DocSet {
public:
    DocSet() = default;
    explicit DocSet(std::vector<DocId> ids);  // sorts and dedupes
    static DocSet full(std::size_t doc_count);

    bool contains(DocId d) const;
    DocSet intersect(const DocSet& other) const;

    std::size_t size() const { return ids_.size(); }
    bool empty() const { return ids_.empty(); }
    const std::vector<DocId>& ids() const { return ids_; }
    auto begin() const { return ids_.begin(); }
    auto end() const { return ids_.end(); }
    bool operator==(const DocSet& other) const { return ids_ == other.ids_; }

private:
    std::vector<DocId> ids_;
};

struct TokenVecHash {
    std::size_t operator()(const std::vector<TokenId>& v) const;
};

/// Per-session memo for keyword -> document-set queries.
using MatchCache = std::unordered_map<std::vector<TokenId>, DocSet, TokenVecHash>;

/// Full-text index over the concatenated corpus (each document terminated by
/// a separator sentinel). Internally the BWT is taken over the reversed
/// stream so that forward continuation enumeration is a rank query; callers
/// only ever see forward semantics. Immutable after build; all queries are
/// read-only.
class FMIndex {
public:
    FMIndex() = default;

    static FMIndex build(const Corpus& corpus, std::size_t sample_rate = 32);

    // Occurrences of `ngram` in the corpus, never crossing document
    // boundaries. Throws std::invalid_argument on reserved ids.
    std::size_t count(std::span<const TokenId> ngram) const;

    // All (token, occurrence count) pairs x with count(ngram + x) > 0, in
    // ascending token order. Empty prefix enumerates every corpus token.
    std::vector<std::pair<TokenId, std::size_t>> continuations(
        std::span<const TokenId> prefix) const;

    // Documents containing `ngram`. Empty set when absent. With a cache,
    // repeated keywords are memoized.
    DocSet match_docs(std::span<const TokenId> ngram) const;
    DocSet match_docs(std::span<const TokenId> ngram, MatchCache* cache) const;

    // Tokens x such that prefix + x occurs within some document of `docs`.
    // Returns nullopt (CostExceeded) when the scan the query requires would
    // exceed `cost_cap` located occurrences. A full-corpus `docs` delegates
    // to continuations() and is never capped.
    std::optional<std::vector<TokenId>> continuations_in(std::span<const TokenId> prefix,
                                                         const DocSet& docs,
                                                         std::uint64_t cost_cap) const;

    std::size_t doc_count() const { return doc_starts_.empty() ? 0 : doc_starts_.size() - 1; }
    std::size_t text_size() const { return text_.size(); }  // tokens + separators
    std::size_t token_count(TokenId t) const;
    std::span<const TokenId> doc_tokens(DocId d) const;
    const Vocabulary& vocabulary() const { return vocab_; }
    std::size_t sample_rate() const { return sample_rate_; }

    void save(const std::string& path) const;
    static FMIndex load(const std::string& path);

    bool operator==(const FMIndex& other) const {
        return text_ == other.text_ && doc_starts_ == other.doc_starts_ &&
               vocab_ == other.vocab_ && sample_rate_ == other.sample_rate_;
    }

private:
    struct Range {
        std::size_t lo = 0, hi = 0;
        std::size_t size() const { return hi - lo; }
        bool empty() const { return lo >= hi; }
    };

    Range whole() const { return {0, bwt_.size()}; }
    Range extend(Range r, TokenId tok) const;  // forward extension by one token
    Range find(std::span<const TokenId> ngram) const;
    std::size_t locate(std::size_t row) const;      // SA value for a row
    std::size_t lf(std::size_t row, std::int32_t sym) const;
    DocId doc_of_text_pos(std::size_t forward_pos) const;
    void build_structures(std::vector<std::int32_t> reversed_with_term);
    static void validate_query(std::span<const TokenId> ngram);

    TokenId sep_symbol() const { return static_cast<TokenId>(vocab_.size()); }
    TokenId term_symbol() const { return static_cast<TokenId>(vocab_.size() + 1); }

    std::vector<TokenId> text_;         // forward stream: doc tokens with separators
    std::vector<std::size_t> doc_starts_;  // doc_count + 1 offsets into text_
    Vocabulary vocab_;
    std::size_t sample_rate_ = 32;

    WaveletMatrix bwt_;
    std::size_t primary_ = 0;                 // row whose suffix starts at position 0
    std::vector<std::size_t> occ_cum_;        // C array over index symbols
    BitVector sample_marks_;                  // rows carrying a suffix-array sample
    std::vector<std::uint64_t> sample_vals_;  // sample values in row order
};

}  // namespace pathret
