#include "pathret/decoder.hpp"

#include <algorithm>
#include <cmath>

namespace pathret {

namespace {

bool segment_in_partition(const std::vector<TokenId>& segment, const DocSet& partition,
                          const FMIndex& index, DecodeSession& session) {
    if (segment.empty() || partition.empty()) return false;
    DocSet matched = index.match_docs(segment, &session.match_cache);
    return !matched.intersect(partition).empty();
}

// Memoized continuations_in keyed by (segment, partition).
std::optional<std::vector<TokenId>> cached_continuations(const std::vector<TokenId>& segment,
                                                         const DocSet& partition,
                                                         const FMIndex& index,
                                                         std::uint64_t cost_cap,
                                                         DecodeSession& session) {
    std::vector<TokenId> key;
    key.reserve(segment.size() + partition.size() + 1);
    key.insert(key.end(), segment.begin(), segment.end());
    key.push_back(-1);  // never a token id; separates segment from doc ids
    for (DocId d : partition) key.push_back(static_cast<TokenId>(d));
    auto it = session.continuation_cache.find(key);
    if (it != session.continuation_cache.end()) return it->second;
    auto result = index.continuations_in(segment, partition, cost_cap);
    session.continuation_cache.emplace(std::move(key), result);
    return result;
}

std::vector<TokenId> full_non_reserved_vocab(std::size_t vocab_size) {
    std::vector<TokenId> out;
    out.reserve(vocab_size - static_cast<std::size_t>(kFirstRegularToken));
    for (std::size_t t = kFirstRegularToken; t < vocab_size; ++t) {
        out.push_back(static_cast<TokenId>(t));
    }
    return out;
}

}  // namespace

Phase BeamHypothesis::phase() const {
    if (done) return Phase::Done;
    if (segment.empty()) return Phase::AtSeparator;
    return answer_segment ? Phase::InAnswer : Phase::InKeyword;
}

AllowedTokens allowed_tokens(const BeamHypothesis& h, const FMIndex& index,
                             std::uint64_t cost_cap, DecodeSession& session) {
    if (h.done) throw std::invalid_argument("allowed_tokens on a completed hypothesis");

    AllowedTokens out;
    if (h.used_fallback) {
        out.tokens = full_non_reserved_vocab(index.vocabulary().size());
    } else {
        auto cont = cached_continuations(h.segment, h.partition, index, cost_cap, session);
        if (!cont) {
            out.cost_exceeded = true;
            out.tokens = full_non_reserved_vocab(index.vocabulary().size());
        } else {
            out.tokens = std::move(*cont);
        }
    }

    const bool fallback_mode = h.used_fallback || out.cost_exceeded;
    if (h.segment.empty()) {
        // No separators after an empty segment (empty keywords are illegal),
        // except A_SEP directly after a K_SEP while no answer exists yet.
        if (!h.answer_segment && !h.answer) out.tokens.push_back(kAnsSep);
    } else {
        bool grounded =
            fallback_mode || segment_in_partition(h.segment, h.partition, index, session);
        if (grounded) {
            out.tokens.push_back(kEos);
            if (!h.answer_segment) out.tokens.push_back(kKwSep);
        }
    }
    std::sort(out.tokens.begin(), out.tokens.end());
    return out;
}

namespace {

struct Candidate {
    double score;
    std::size_t parent;
    TokenId tok;
    bool cost_exceeded;
};

// Score-descending; ties broken toward lexicographically smaller emission.
// All parents within a step share the same emitted length.
bool candidate_less(const Candidate& a, const Candidate& b,
                    const std::vector<BeamHypothesis>& live) {
    if (a.score != b.score) return a.score > b.score;
    const auto& ea = live[a.parent].emitted;
    const auto& eb = live[b.parent].emitted;
    if (ea != eb) return std::lexicographical_compare(ea.begin(), ea.end(), eb.begin(), eb.end());
    return a.tok < b.tok;
}

// Final-result ordering over completed hypotheses.
bool hypothesis_less(const BeamHypothesis& a, const BeamHypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.emitted.size() != b.emitted.size()) return a.emitted.size() < b.emitted.size();
    return a.emitted < b.emitted;
}

BeamHypothesis extend_hypothesis(const BeamHypothesis& parent, TokenId tok, double logprob,
                                 bool cost_exceeded, bool constrained, const FMIndex& index,
                                 const Vocabulary& vocab, DecodeSession& session) {
    BeamHypothesis h = parent;
    h.emitted.push_back(tok);
    h.score += logprob;
    if (cost_exceeded) h.used_fallback = true;

    auto close_segment = [&] {
        if (h.segment.empty()) return;
        Keyword kw = Keyword::from_tokens(h.segment, vocab);
        h.segment.clear();
        if (constrained) {
            h.partition = h.partition.intersect(index.match_docs(kw.tokens, &session.match_cache));
        }
        if (h.answer_segment && !h.answer) {
            h.answer = std::move(kw);
            h.answer_closed = true;
        } else {
            h.keywords.push_back(std::move(kw));
        }
    };

    if (tok == kKwSep) {
        close_segment();
    } else if (tok == kAnsSep) {
        close_segment();  // only reachable unconstrained; grammar keeps it empty otherwise
        h.answer_segment = true;
    } else if (tok == kEos) {
        close_segment();
        h.done = true;
    } else {
        h.segment.push_back(tok);
    }
    return h;
}

bool is_complete(const BeamHypothesis& h) {
    if (!h.done) return false;
    // EOS counts after a non-empty answer segment, or after >= 1 keyword
    // without an answer segment.
    if (h.answer_segment) return h.answer_closed;
    return !h.keywords.empty();
}

DecodeResult run_beam(std::span<const TokenId> query, const ScoringModel& scorer,
                      const FMIndex& index, const DecodeOptions& opts, bool constrained) {
    if (opts.beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
    if (opts.max_tokens < 2) throw std::invalid_argument("max_tokens must be >= 2");
    if (!index.vocabulary().is_prefix_of(scorer.vocabulary())) {
        throw std::invalid_argument("scorer vocabulary does not extend the index vocabulary");
    }

    DecodeSession session;
    const std::size_t scorer_vocab = scorer.vocab_size();

    std::vector<BeamHypothesis> live;
    {
        BeamHypothesis seed;
        seed.partition = DocSet::full(index.doc_count());
        auto lp = scorer.next_token_logprobs(query, {});
        seed.score = lp[static_cast<std::size_t>(kKwSep)];
        seed.emitted.push_back(kKwSep);
        live.push_back(std::move(seed));
    }

    std::vector<BeamHypothesis> completed;
    std::optional<BeamHypothesis> best_partial;
    auto note_partial = [&](const BeamHypothesis& h) {
        if (!best_partial || hypothesis_less(h, *best_partial)) best_partial = h;
    };

    std::vector<TokenId> unconstrained_tokens;
    if (!constrained) {
        unconstrained_tokens = full_non_reserved_vocab(scorer_vocab);
        unconstrained_tokens.push_back(kEos);
        unconstrained_tokens.push_back(kKwSep);
        unconstrained_tokens.push_back(kAnsSep);
        std::sort(unconstrained_tokens.begin(), unconstrained_tokens.end());
    }

    while (!live.empty()) {
        std::vector<Candidate> candidates;
        for (std::size_t pi = 0; pi < live.size(); ++pi) {
            const BeamHypothesis& h = live[pi];
            if (h.emitted.size() >= opts.max_tokens) {
                note_partial(h);
                continue;
            }
            const std::vector<TokenId>* allowed = nullptr;
            bool cost_exceeded = false;
            AllowedTokens at;
            if (constrained) {
                at = allowed_tokens(h, index, opts.cost_cap, session);
                cost_exceeded = at.cost_exceeded;
                allowed = &at.tokens;
            } else {
                allowed = &unconstrained_tokens;
            }
            if (allowed->empty()) {
                note_partial(h);
                continue;
            }
            auto lp = scorer.next_token_logprobs(query, h.emitted);
            for (TokenId tok : *allowed) {
                if (static_cast<std::size_t>(tok) >= lp.size()) continue;
                candidates.push_back(
                    {h.score + lp[static_cast<std::size_t>(tok)], pi, tok, cost_exceeded});
            }
        }
        if (candidates.empty()) break;

        std::size_t keep = std::min(opts.beam_size, candidates.size());
        std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                          candidates.end(),
                          [&](const Candidate& a, const Candidate& b) {
                              return candidate_less(a, b, live);
                          });
        candidates.resize(keep);

        std::vector<BeamHypothesis> next_live;
        for (const Candidate& c : candidates) {
            BeamHypothesis child = extend_hypothesis(live[c.parent], c.tok, c.score - live[c.parent].score,
                                                     c.cost_exceeded, constrained, index,
                                                     scorer.vocabulary(), session);
            if (child.done) {
                if (is_complete(child)) {
                    completed.push_back(std::move(child));
                }  // an EOS with no content dies
            } else {
                next_live.push_back(std::move(child));
            }
        }
        live = std::move(next_live);

        if (!completed.empty() && !live.empty()) {
            double best_done = std::max_element(completed.begin(), completed.end(),
                                                [](const auto& a, const auto& b) {
                                                    return a.score < b.score;
                                                })
                                   ->score;
            double best_live = std::max_element(live.begin(), live.end(),
                                                [](const auto& a, const auto& b) {
                                                    return a.score < b.score;
                                                })
                                   ->score;
            // Log-probs are strictly negative, so no extension can catch up.
            if (best_done >= best_live) break;
        }
    }

    if (completed.empty()) {
        SearchPath partial;
        if (best_partial) {
            partial.keywords = best_partial->keywords;
            partial.answer = best_partial->answer;
        }
        throw DecodeFailedError("no hypothesis completed within max_tokens", std::move(partial));
    }

    const BeamHypothesis& best =
        *std::min_element(completed.begin(), completed.end(), hypothesis_less);

    DecodeResult result;
    result.path.keywords = best.keywords;
    result.path.answer = best.answer;
    result.emitted = best.emitted;
    result.score = best.score;
    if (best.answer) {
        result.answer = best.answer->surface;
    } else if (!best.keywords.empty()) {
        result.answer = best.keywords.back().surface;  // last keyword is the answer
    }
    if (constrained) {
        result.docset = best.partition;
        result.used_fallback = best.used_fallback;
    } else {
        result.docset = partition(index, result.path, &session.match_cache);
        result.used_fallback = true;
    }
    if (!result.docset.empty()) result.evidence_doc_id = result.docset.ids().front();
    return result;
}

}  // namespace

DecodeResult decode(std::span<const TokenId> query, const ScoringModel& scorer,
                    const FMIndex& index, const DecodeOptions& opts) {
    return run_beam(query, scorer, index, opts, /*constrained=*/true);
}

DecodeResult decode_unconstrained(std::span<const TokenId> query, const ScoringModel& scorer,
                                  const FMIndex& index, const DecodeOptions& opts) {
    return run_beam(query, scorer, index, opts, /*constrained=*/false);
}

}  // namespace pathret
