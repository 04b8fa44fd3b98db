#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "pathret/scorer.hpp"

namespace pathret::synth {

/// Test scorer keyed on the exact emitted sequence: each scripted context
/// assigns explicit probabilities to preferred tokens, the remaining mass is
/// uniform; unscripted contexts prefer EOS.
class ScriptedScorer : public ScoringModel {
public:
    using Prefs = std::vector<std::pair<TokenId, double>>;

    ScriptedScorer(Vocabulary vocab, std::map<std::vector<TokenId>, Prefs> script,
                   double default_eos = 0.9)
        : vocab_(std::move(vocab)), script_(std::move(script)), default_eos_(default_eos) {}

    const Vocabulary& vocabulary() const override { return vocab_; }

    std::vector<double> next_token_logprobs(std::span<const TokenId> /*query*/,
                                            std::span<const TokenId> emitted) const override {
        const std::size_t v = vocab_.size();
        std::vector<TokenId> key(emitted.begin(), emitted.end());
        auto it = script_.find(key);
        Prefs prefs = it != script_.end() ? it->second : Prefs{{kEos, default_eos_}};
        double mass = 0.0;
        for (auto& [tok, p] : prefs) mass += p;
        double rest = (1.0 - mass) / static_cast<double>(v - prefs.size());
        std::vector<double> out(v, std::log(rest));
        for (auto& [tok, p] : prefs) out[static_cast<std::size_t>(tok)] = std::log(p);
        return out;
    }

private:
    Vocabulary vocab_;
    std::map<std::vector<TokenId>, Prefs> script_;
    double default_eos_;
};

}  // namespace pathret::synth
