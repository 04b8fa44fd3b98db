#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathret/corpus.hpp"
#include "pathret/fm_index.hpp"

namespace pathret {

/// An n-gram keyword: token ids plus their surface rendering.
struct Keyword {
    std::vector<TokenId> tokens;
    std::string surface;

    static Keyword from_tokens(std::vector<TokenId> toks, const Vocabulary& vocab);
    bool operator==(const Keyword& other) const { return tokens == other.tokens; }
};

/// Ordered keywords plus an optional terminal answer.
struct SearchPath {
    std::vector<Keyword> keywords;
    std::optional<Keyword> answer;

    // Keywords plus the answer, the order they were produced in.
    std::vector<Keyword> all_segments() const;
};

// F(docs, k): documents of `docs` that contain the keyword.
DocSet filter_docs(const FMIndex& index, const DocSet& docs, const Keyword& keyword,
                   MatchCache* cache = nullptr);

// P(D, path): intersection of filter_docs over every keyword (and the answer,
// when present). The empty path maps to the full corpus.
DocSet partition(const FMIndex& index, const SearchPath& path, MatchCache* cache = nullptr);

// Splits a decoder emission stream (K_SEP-prefixed segments, optional
// K_SEP-A_SEP answer, optional trailing EOS) into a SearchPath. Tolerates
// ill-formed streams by dropping empty segments.
SearchPath parse_emitted(std::span<const TokenId> emitted, const Vocabulary& vocab);

}  // namespace pathret
