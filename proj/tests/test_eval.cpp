#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "pathret/eval.hpp"

using namespace pathret;

namespace {

Corpus corpus3() { return ingest_file(std::string(PATHRET_FIXTURES) + "/corpus3.jsonl"); }

EvalRecord record(const std::string& q, std::vector<std::string> golds, std::string pred,
                  std::vector<DocId> docs) {
    EvalRecord r;
    r.question = q;
    r.gold_answers = std::move(golds);
    r.predicted_answer = std::move(pred);
    r.predicted_docs = std::move(docs);
    r.matched_doc_count = r.predicted_docs.size();
    return r;
}

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("normalize_answer lowercases, strips punctuation and articles") {
    CHECK(normalize_answer("The Ten Commandments.") == "ten commandments");
    CHECK(normalize_answer("23%") == "23");
    CHECK(normalize_answer("") == "");
    CHECK(normalize_answer("An   Apple a day") == "apple day");
}

TEST_CASE("exact match and token f1") {
    CHECK(exact_match("twice", {"twice"}) == 1);
    CHECK(exact_match("the twice", {"twice"}) == 1);
    CHECK(exact_match("two times", {"twice"}) == 0);
    CHECK_THROWS_AS(exact_match("x", {}), std::invalid_argument);

    CHECK(token_f1("hebrew bible books", {"books of exodus"}) == doctest::Approx(1.0 / 3.0));
    CHECK(token_f1("twice", {"twice"}) == doctest::Approx(1.0));
    CHECK(token_f1("alpha beta", {"gamma delta"}) == doctest::Approx(0.0));
    CHECK(token_f1("", {""}) == doctest::Approx(1.0));
    CHECK(token_f1("", {"x"}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(token_f1("x", {}), std::invalid_argument);
}

TEST_CASE("hits@k uses answer presence over ranked docs") {
    Corpus c = corpus3();
    std::vector<EvalRecord> recs = {record("q1", {"twice"}, "x", {0})};
    CHECK(hits_at_k(recs, 1, c) == doctest::Approx(1.0));

    recs = {record("q1", {"twice"}, "x", {})};
    CHECK(hits_at_k(recs, 1, c) == doctest::Approx(0.0));

    // gold only present in the rank-2 document
    recs = {record("q1", {"cecil demille"}, "x", {0, 1})};
    CHECK(hits_at_k(recs, 1, c) == doctest::Approx(0.0));
    CHECK(hits_at_k(recs, 2, c) == doctest::Approx(1.0));

    CHECK_THROWS_AS(hits_at_k(recs, 0, c), std::invalid_argument);

    // doc-id mode compares against the gold document id
    recs = {record("q1", {"twice"}, "x", {1, 0})};
    recs[0].gold_doc_id = 0;
    CHECK(hits_at_k(recs, 1, c, true) == doctest::Approx(0.0));
    CHECK(hits_at_k(recs, 2, c, true) == doctest::Approx(1.0));
}

TEST_CASE("evaluate aggregates answer and retrieval metrics") {
    Corpus c = corpus3();
    std::vector<EvalRecord> recs = {record("q1", {"twice"}, "twice", {0})};
    recs[0].matched_doc_count = 1;
    MetricsReport r = evaluate(recs, c, {1});
    CHECK(r.em == doctest::Approx(1.0));
    CHECK(r.f1 == doctest::Approx(1.0));
    CHECK(r.hits_at[1] == doctest::Approx(1.0));
    CHECK(r.matched_doc_histogram["1"] == 1);

    recs.push_back(record("q2", {"exodus"}, "", {}));
    MetricsReport half = evaluate(recs, c, {1});
    CHECK(half.em == doctest::Approx(0.5));
    CHECK(half.f1 == doctest::Approx(0.5));
    CHECK(half.hits_at[1] == doctest::Approx(0.5));
    CHECK(half.matched_doc_histogram["0"] == 1);
}

TEST_CASE("reference table agreement") {
    Corpus c = corpus3();
    std::ifstream in(std::string(PATHRET_FIXTURES) + "/metrics_reference.jsonl");
    REQUIRE(in.good());
    std::string line;
    std::size_t cases = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        std::string pred = j.at("pred").get<std::string>();
        std::vector<std::string> golds;
        for (const auto& g : j.at("golds")) golds.push_back(g.get<std::string>());
        CHECK_MESSAGE(exact_match(pred, golds) == j.at("em").get<int>(), line);
        CHECK_MESSAGE(token_f1(pred, golds) ==
                          doctest::Approx(j.at("f1").get<double>()).epsilon(1e-9),
                      line);
        if (j.contains("docs")) {
            std::vector<DocId> docs;
            for (const auto& d : j.at("docs")) docs.push_back(d.get<DocId>());
            std::vector<EvalRecord> recs = {record("q", golds, pred, docs)};
            double hits = hits_at_k(recs, j.at("k").get<std::size_t>(), c);
            CHECK_MESSAGE(hits == doctest::Approx(j.at("hit").get<int>()), line);
        }
        ++cases;
    }
    CHECK(cases == 20);
}

TEST_CASE("em never exceeds f1 and hits@k is monotone") {
    Corpus c = corpus3();
    std::mt19937_64 rng(31);
    const char* words[] = {"ten", "commandments", "hebrew", "bible", "film", "twice", "exodus"};
    for (int trial = 0; trial < 200; ++trial) {
        auto phrase = [&] {
            std::string s;
            std::size_t n = 1 + rng() % 3;
            for (std::size_t i = 0; i < n; ++i) {
                if (!s.empty()) s += ' ';
                s += words[rng() % 7];
            }
            return s;
        };
        std::string pred = phrase();
        std::vector<std::string> golds = {phrase()};
        if (rng() % 2 == 0) golds.push_back(phrase());
        CHECK(exact_match(pred, golds) <= token_f1(pred, golds) + 1e-12);

        std::vector<DocId> docs;
        for (DocId d = 0; d < 3; ++d) {
            if (rng() % 2 == 0) docs.push_back(d);
        }
        std::vector<EvalRecord> recs = {record("q", golds, pred, docs)};
        double prev = 0.0;
        for (std::size_t k = 1; k <= 4; ++k) {
            double h = hits_at_k(recs, k, c);
            CHECK(h >= prev);
            prev = h;
        }
    }
}

TEST_CASE("evaluate is permutation invariant") {
    Corpus c = corpus3();
    std::vector<EvalRecord> recs = {
        record("q1", {"twice"}, "twice", {0}),
        record("q2", {"cecil demille"}, "cecil", {1}),
        record("q3", {"deuteronomy"}, "", {}),
    };
    MetricsReport a = evaluate(recs, c, {1, 2});
    std::reverse(recs.begin(), recs.end());
    MetricsReport b = evaluate(recs, c, {1, 2});
    CHECK(a.em == doctest::Approx(b.em));
    CHECK(a.f1 == doctest::Approx(b.f1));
    CHECK(a.hits_at[1] == doctest::Approx(b.hits_at[1]));
    CHECK(a.hits_at[2] == doctest::Approx(b.hits_at[2]));
    CHECK(a.matched_doc_histogram == b.matched_doc_histogram);
}

}  // TEST_SUITE
