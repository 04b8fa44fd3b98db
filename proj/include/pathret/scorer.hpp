#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathret/corpus.hpp"
#include "pathret/fm_index.hpp"

namespace pathret {

/// Next-token scoring contract the decoder consumes. Implementations must be
/// deterministic and return a proper log-distribution over their full
/// vocabulary (log-sum-exp == 0 within 1e-6).
class ScoringModel {
public:
    virtual ~ScoringModel() = default;

    virtual const Vocabulary& vocabulary() const = 0;
    std::size_t vocab_size() const { return vocabulary().size(); }

    // Log-probabilities for the next token given the query and the target
    // tokens emitted so far (separators included).
    virtual std::vector<double> next_token_logprobs(std::span<const TokenId> query,
                                                    std::span<const TokenId> emitted) const = 0;
};

struct TrainExample {
    std::vector<TokenId> input;
    std::vector<TokenId> target;  // serialized path tokens; EOS appended by the trainer
};

/// Interpolated relative-frequency token n-gram model. The conditioning
/// context is the concatenation of query and emitted tokens, truncated to the
/// last order-1 tokens. A small uniform floor keeps every token finite.
class NgramModel : public ScoringModel {
public:
    NgramModel() = default;
    NgramModel(Vocabulary vocab, int order);

    static NgramModel train(const std::vector<TrainExample>& examples, Vocabulary vocab,
                            int order);

    const Vocabulary& vocabulary() const override { return vocab_; }
    std::vector<double> next_token_logprobs(std::span<const TokenId> query,
                                            std::span<const TokenId> emitted) const override;

    int order() const { return order_; }

    void save(const std::string& path) const;
    static NgramModel load(const std::string& path);

private:
    struct ContextCounts {
        std::uint64_t total = 0;
        std::unordered_map<TokenId, std::uint64_t> next;
    };
    using CountTable = std::unordered_map<std::vector<TokenId>, ContextCounts, TokenVecHash>;

    void observe(std::span<const TokenId> context, TokenId next);

    Vocabulary vocab_;
    int order_ = 4;
    std::vector<CountTable> tables_;  // tables_[k]: contexts of length k
};

/// Deterministic scorer that walks a programmed token sequence by position:
/// the argmax at step i is sequence[i], then EOS. Mass `hit_prob` goes to the
/// preferred token, the rest is spread uniformly.
class SequenceScorer : public ScoringModel {
public:
    SequenceScorer(std::vector<TokenId> sequence, Vocabulary vocab, double hit_prob = 0.9);

    const Vocabulary& vocabulary() const override { return vocab_; }
    std::vector<double> next_token_logprobs(std::span<const TokenId> query,
                                            std::span<const TokenId> emitted) const override;

private:
    std::vector<TokenId> sequence_;
    Vocabulary vocab_;
    double hit_prob_;
};

}  // namespace pathret
