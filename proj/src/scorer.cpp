#include "pathret/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pathret/serde.hpp"

namespace pathret {

namespace {
constexpr char kModelMagic[5] = "PRNM";
constexpr std::uint32_t kModelVersion = 1;
constexpr double kFloorPerToken = 1e-9;

// Geometric interpolation weights: each longer order weighs 3x the previous
// one, so a fully-seen context dominates (> 1/2 of the mixture) and greedy
// decoding reproduces memorized targets.
double order_weight(int k) { return std::pow(3.0, k); }
}  // namespace

NgramModel::NgramModel(Vocabulary vocab, int order) : vocab_(std::move(vocab)), order_(order) {
    if (order_ < 1) throw std::invalid_argument("ngram order must be >= 1");
    tables_.resize(static_cast<std::size_t>(order_));
}

void NgramModel::observe(std::span<const TokenId> context, TokenId next) {
    for (int k = 0; k < order_; ++k) {
        if (static_cast<std::size_t>(k) > context.size()) break;
        std::vector<TokenId> ctx(context.end() - k, context.end());
        auto& cc = tables_[static_cast<std::size_t>(k)][std::move(ctx)];
        cc.total += 1;
        cc.next[next] += 1;
    }
}

NgramModel NgramModel::train(const std::vector<TrainExample>& examples, Vocabulary vocab,
                             int order) {
    if (examples.empty()) throw std::invalid_argument("train requires at least one example");
    NgramModel model(std::move(vocab), order);
    std::vector<TokenId> seq;
    for (const TrainExample& ex : examples) {
        seq.clear();
        seq.insert(seq.end(), ex.input.begin(), ex.input.end());
        std::size_t target_from = seq.size();
        seq.insert(seq.end(), ex.target.begin(), ex.target.end());
        seq.push_back(kEos);
        for (std::size_t i = target_from; i < seq.size(); ++i) {
            model.observe(std::span<const TokenId>(seq.data(), i), seq[i]);
        }
    }
    return model;
}

std::vector<double> NgramModel::next_token_logprobs(std::span<const TokenId> query,
                                                    std::span<const TokenId> emitted) const {
    const std::size_t v = vocab_.size();
    std::vector<TokenId> ctx;
    ctx.reserve(static_cast<std::size_t>(order_));
    {
        // last order-1 tokens of query + emitted
        std::size_t want = static_cast<std::size_t>(order_ - 1);
        std::size_t from_emitted = std::min(want, emitted.size());
        std::size_t from_query = std::min(want - from_emitted, query.size());
        ctx.insert(ctx.end(), query.end() - from_query, query.end());
        ctx.insert(ctx.end(), emitted.end() - from_emitted, emitted.end());
    }

    const double eps = std::min(kFloorPerToken * static_cast<double>(v), 0.5);
    std::vector<double> probs(v, eps / static_cast<double>(v));

    // Collect the seen orders and their normalized weights.
    std::vector<const ContextCounts*> seen;
    std::vector<double> weights;
    double wsum = 0.0;
    for (int k = 0; k < order_ && static_cast<std::size_t>(k) <= ctx.size(); ++k) {
        if (tables_.empty()) break;
        std::vector<TokenId> key(ctx.end() - k, ctx.end());
        auto it = tables_[static_cast<std::size_t>(k)].find(key);
        if (it == tables_[static_cast<std::size_t>(k)].end()) continue;
        seen.push_back(&it->second);
        weights.push_back(order_weight(k));
        wsum += weights.back();
    }

    if (seen.empty()) {
        // Untrained (or fully unseen) context: uniform.
        std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(v));
    } else {
        for (std::size_t i = 0; i < seen.size(); ++i) {
            double lw = (1.0 - eps) * weights[i] / wsum;
            double total = static_cast<double>(seen[i]->total);
            for (const auto& [tok, cnt] : seen[i]->next) {
                probs[static_cast<std::size_t>(tok)] += lw * static_cast<double>(cnt) / total;
            }
        }
    }

    std::vector<double> out(v);
    for (std::size_t i = 0; i < v; ++i) out[i] = std::log(probs[i]);
    return out;
}

void NgramModel::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path);
    serde::write_magic(out, kModelMagic, kModelVersion);
    serde::write_vocabulary(out, vocab_);
    serde::write_u64(out, static_cast<std::uint64_t>(order_));
    for (const CountTable& table : tables_) {
        // Deterministic bytes: contexts in sorted order.
        std::vector<const std::vector<TokenId>*> keys;
        keys.reserve(table.size());
        for (const auto& [ctx, cc] : table) keys.push_back(&ctx);
        std::sort(keys.begin(), keys.end(),
                  [](const auto* a, const auto* b) { return *a < *b; });
        serde::write_u64(out, keys.size());
        for (const auto* key : keys) {
            serde::write_u64(out, key->size());
            for (TokenId t : *key) serde::write_i32(out, t);
            const ContextCounts& cc = table.at(*key);
            std::vector<std::pair<TokenId, std::uint64_t>> next(cc.next.begin(), cc.next.end());
            std::sort(next.begin(), next.end());
            serde::write_u64(out, next.size());
            for (auto& [tok, cnt] : next) {
                serde::write_i32(out, tok);
                serde::write_u64(out, cnt);
            }
        }
    }
    if (!out) throw DataError("write failure on model file: " + path);
}

NgramModel NgramModel::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path);
    serde::expect_magic(in, kModelMagic, kModelVersion);
    Vocabulary vocab = serde::read_vocabulary(in);
    int order = static_cast<int>(serde::read_u64(in));
    NgramModel model(std::move(vocab), order);
    for (int k = 0; k < order; ++k) {
        std::uint64_t nctx = serde::read_u64(in);
        for (std::uint64_t c = 0; c < nctx; ++c) {
            std::uint64_t klen = serde::read_u64(in);
            std::vector<TokenId> key(klen);
            for (auto& t : key) t = serde::read_i32(in);
            ContextCounts cc;
            std::uint64_t nnext = serde::read_u64(in);
            for (std::uint64_t j = 0; j < nnext; ++j) {
                TokenId tok = serde::read_i32(in);
                std::uint64_t cnt = serde::read_u64(in);
                cc.next[tok] = cnt;
                cc.total += cnt;
            }
            model.tables_[static_cast<std::size_t>(k)].emplace(std::move(key), std::move(cc));
        }
    }
    return model;
}

SequenceScorer::SequenceScorer(std::vector<TokenId> sequence, Vocabulary vocab, double hit_prob)
    : sequence_(std::move(sequence)), vocab_(std::move(vocab)), hit_prob_(hit_prob) {
    if (vocab_.size() < 2) throw std::invalid_argument("vocab too small");
}

std::vector<double> SequenceScorer::next_token_logprobs(std::span<const TokenId> /*query*/,
                                                        std::span<const TokenId> emitted) const {
    const std::size_t v = vocab_.size();
    TokenId preferred = emitted.size() < sequence_.size() ? sequence_[emitted.size()] : kEos;
    double rest = (1.0 - hit_prob_) / static_cast<double>(v - 1);
    std::vector<double> out(v, std::log(rest));
    out[static_cast<std::size_t>(preferred)] = std::log(hit_prob_);
    return out;
}

}  // namespace pathret
