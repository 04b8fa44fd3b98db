#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathret/fm_index.hpp"
#include "pathret/partitioner.hpp"
#include "pathret/scorer.hpp"

namespace pathret {

inline constexpr std::uint64_t kDefaultCostCap = 10'000;
inline constexpr std::uint64_t kNoCostCap = std::numeric_limits<std::uint64_t>::max();

enum class Phase { AtSeparator, InKeyword, InAnswer, Done };

/// One beam entry. Scores are raw cumulative log-probs; there is no
/// renormalization over the allowed set.
struct BeamHypothesis {
    std::vector<TokenId> emitted;   // includes the seed K_SEP
    std::vector<Keyword> keywords;  // closed keywords
    DocSet partition;               // docs matching all closed segments
    std::vector<TokenId> segment;   // open segment tokens
    double score = 0.0;
    bool answer_segment = false;    // open segment is the answer
    bool answer_closed = false;
    bool used_fallback = false;
    bool done = false;
    std::optional<Keyword> answer;

    Phase phase() const;
};

struct AllowedTokens {
    std::vector<TokenId> tokens;  // ascending
    bool cost_exceeded = false;
};

/// Per-decode memo: keyword -> DocSet plus continuation-set lookups
/// (constraints are computed lazily and cached for the session).
struct DecodeSession {
    MatchCache match_cache;
    std::unordered_map<std::vector<TokenId>, std::optional<std::vector<TokenId>>, TokenVecHash>
        continuation_cache;
};

// Legal next tokens for a hypothesis: continuations of the open segment
// within the current partition, K_SEP/EOS once the segment is non-empty and
// itself occurs in the partition, and A_SEP directly after a K_SEP while no
// answer was emitted. A continuation query over the cost cap flips
// cost_exceeded and opens the full non-reserved vocabulary.
AllowedTokens allowed_tokens(const BeamHypothesis& h, const FMIndex& index,
                             std::uint64_t cost_cap, DecodeSession& session);

struct DecodeResult {
    SearchPath path;
    std::string answer;
    DocSet docset;
    std::optional<DocId> evidence_doc_id;  // smallest id in docset
    double score = 0.0;
    bool used_fallback = false;
    std::vector<TokenId> emitted;  // full scored token stream
};

class DecodeFailedError : public std::runtime_error {
public:
    DecodeFailedError(std::string what, SearchPath best_partial)
        : std::runtime_error(std::move(what)), best_partial(std::move(best_partial)) {}
    SearchPath best_partial;
};

struct DecodeOptions {
    std::size_t beam_size = 5;
    std::size_t max_tokens = 64;
    std::uint64_t cost_cap = kDefaultCostCap;
};

// Constrained beam search. Every expansion is restricted to allowed_tokens;
// completed hypotheses are held aside and the best one is returned. Throws
// DecodeFailedError when nothing completes within max_tokens.
DecodeResult decode(std::span<const TokenId> query, const ScoringModel& scorer,
                    const FMIndex& index, const DecodeOptions& opts);

// Same beam search without masking; the produced path is looked up in the
// corpus afterward, so the docset may be empty. used_fallback is always set.
DecodeResult decode_unconstrained(std::span<const TokenId> query, const ScoringModel& scorer,
                                  const FMIndex& index, const DecodeOptions& opts);

}  // namespace pathret
