#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "pathret/scorer.hpp"
#include "pathret/traingen.hpp"

using namespace pathret;

namespace {

Vocabulary small_vocab(std::size_t words) {
    Vocabulary v;
    auto pool = [&](std::size_t i) { return "w" + std::to_string(i); };
    for (std::size_t i = 0; i < words; ++i) v.add(pool(i));
    return v;
}

double logsumexp(const std::vector<double>& lp) {
    double mx = lp[0];
    for (double x : lp) mx = std::max(mx, x);
    double s = 0;
    for (double x : lp) s += std::exp(x - mx);
    return mx + std::log(s);
}

std::vector<TokenId> greedy_decode(const ScoringModel& m, std::span<const TokenId> query,
                                   std::size_t max_len) {
    std::vector<TokenId> emitted;
    for (std::size_t i = 0; i < max_len; ++i) {
        auto lp = m.next_token_logprobs(query, emitted);
        TokenId best = 0;
        for (std::size_t t = 1; t < lp.size(); ++t) {
            if (lp[t] > lp[static_cast<std::size_t>(best)]) best = static_cast<TokenId>(t);
        }
        if (best == kEos) break;
        emitted.push_back(best);
    }
    return emitted;
}

}  // namespace

TEST_SUITE("scorer") {

TEST_CASE("untrained model is uniform") {
    Vocabulary v = small_vocab(12);
    NgramModel m(v, 4);
    auto lp = m.next_token_logprobs({}, {});
    for (double x : lp) CHECK(x == doctest::Approx(-std::log(16.0)).epsilon(1e-9));
}

TEST_CASE("logprobs normalize and are deterministic") {
    Vocabulary v = small_vocab(30);
    std::vector<TrainExample> ex;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 10; ++i) {
        TrainExample e;
        for (int j = 0; j < 6; ++j) e.input.push_back(static_cast<TokenId>(4 + rng() % 30));
        e.target.push_back(kKwSep);
        for (int j = 0; j < 8; ++j) e.target.push_back(static_cast<TokenId>(4 + rng() % 30));
        ex.push_back(std::move(e));
    }
    NgramModel m = NgramModel::train(ex, v, 4);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<TokenId> q, emitted;
        for (int j = 0; j < 4; ++j) q.push_back(static_cast<TokenId>(4 + rng() % 30));
        for (int j = 0; j < static_cast<int>(rng() % 5); ++j) {
            emitted.push_back(static_cast<TokenId>(4 + rng() % 30));
        }
        auto lp = m.next_token_logprobs(q, emitted);
        CHECK(std::abs(logsumexp(lp)) < 1e-6);
        CHECK(m.next_token_logprobs(q, emitted) == lp);
        for (double x : lp) CHECK(std::isfinite(x));
    }
}

TEST_CASE("single-example training memorizes its target") {
    Vocabulary v = small_vocab(40);
    TrainExample e;
    e.input = {10, 11, 12, 13};
    e.target = {kKwSep, 20, 21, kKwSep, 22, 23, 24, kKwSep, kAnsSep, 25};
    NgramModel m = NgramModel::train({e}, v, 4);
    auto out = greedy_decode(m, e.input, 32);
    CHECK(out == e.target);
}

TEST_CASE("two queries reproduce their own targets") {
    Vocabulary v = small_vocab(40);
    TrainExample a, b;
    a.input = {10, 11};
    a.target = {kKwSep, 20, 21, kKwSep, kAnsSep, 22};
    b.input = {12, 13};
    b.target = {kKwSep, 30, 31, kKwSep, kAnsSep, 32};
    NgramModel m = NgramModel::train({a, b}, v, 4);
    CHECK(greedy_decode(m, a.input, 16) == a.target);
    CHECK(greedy_decode(m, b.input, 16) == b.target);
}

TEST_CASE("order-1 model ignores context") {
    Vocabulary v = small_vocab(20);
    TrainExample e;
    e.input = {10, 11};
    e.target = {kKwSep, 12, 13, 14};
    NgramModel m = NgramModel::train({e}, v, 1);
    std::vector<TokenId> q1 = {10, 11}, e1 = {kKwSep, 12};
    std::vector<TokenId> q2 = {17}, e2 = {15, 16, 18};
    CHECK(m.next_token_logprobs(q1, e1) == m.next_token_logprobs(q2, e2));
}

TEST_CASE("train rejects empty example lists") {
    CHECK_THROWS_AS(NgramModel::train({}, small_vocab(8), 4), std::invalid_argument);
}

TEST_CASE("sequence scorer argmax walks its programmed sequence") {
    Vocabulary v = small_vocab(16);
    std::vector<TokenId> seq = {kKwSep, 7, 8, kKwSep, kAnsSep, 9};
    SequenceScorer s(seq, v);
    auto out = greedy_decode(s, {}, 32);
    CHECK(out == seq);
    auto lp = s.next_token_logprobs({}, {});
    CHECK(std::abs(logsumexp(lp)) < 1e-9);
}

TEST_CASE("model serialization round-trips logprobs") {
    Vocabulary v = small_vocab(25);
    std::vector<TrainExample> ex;
    std::mt19937_64 rng(9);
    for (int i = 0; i < 5; ++i) {
        TrainExample e;
        for (int j = 0; j < 5; ++j) e.input.push_back(static_cast<TokenId>(4 + rng() % 25));
        e.target = {kKwSep};
        for (int j = 0; j < 6; ++j) e.target.push_back(static_cast<TokenId>(4 + rng() % 25));
        ex.push_back(std::move(e));
    }
    NgramModel m = NgramModel::train(ex, v, 3);
    m.save("test_model.bin");
    NgramModel loaded = NgramModel::load("test_model.bin");
    CHECK(loaded.order() == 3);
    CHECK(loaded.vocabulary() == m.vocabulary());
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<TokenId> q = {static_cast<TokenId>(4 + rng() % 25)};
        std::vector<TokenId> emitted = {kKwSep, static_cast<TokenId>(4 + rng() % 25)};
        CHECK(loaded.next_token_logprobs(q, emitted) == m.next_token_logprobs(q, emitted));
    }
    std::remove("test_model.bin");
}

}  // TEST_SUITE
