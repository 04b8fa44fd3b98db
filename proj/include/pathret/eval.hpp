#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathret/corpus.hpp"

namespace pathret {

struct EvalRecord {
    std::string question;
    std::vector<std::string> gold_answers;
    std::optional<DocId> gold_doc_id;
    std::string predicted_answer;
    std::vector<DocId> predicted_docs;  // ascending doc-id order, evidence first
    std::size_t matched_doc_count = 0;
    bool used_fallback = false;
    bool failed = false;
};

struct MetricsReport {
    std::size_t count = 0;
    std::map<std::size_t, double> hits_at;  // k -> fraction
    double em = 0.0;
    double f1 = 0.0;
    double fallback_rate = 0.0;
    std::map<std::string, std::size_t> matched_doc_histogram;  // "0".."9", "10+"
};

// Open-QA answer normalization: lowercase, strip punctuation characters,
// drop articles (a/an/the), collapse whitespace.
std::string normalize_answer(const std::string& s);

// 1 iff the normalized prediction equals some normalized gold.
int exact_match(const std::string& pred, const std::vector<std::string>& golds);

// Max over golds of the token-level F1 on normalized whitespace tokens.
// Both empty -> 1, exactly one empty -> 0.
double token_f1(const std::string& pred, const std::vector<std::string>& golds);

/// Answer-presence test over documents, normalized the same way answers are.
class DocAnswerIndex {
public:
    explicit DocAnswerIndex(const Corpus& corpus) : corpus_(&corpus) {}
    bool doc_contains(DocId d, const std::string& normalized_answer) const;

private:
    const Corpus* corpus_;
    mutable std::map<DocId, std::vector<std::string>> cache_;
};

// Fraction of records whose top-k predicted documents include one containing
// a gold answer (or, in doc-id mode, the gold document itself). An empty
// predicted set scores 0.
double hits_at_k(const std::vector<EvalRecord>& records, std::size_t k, const Corpus& corpus,
                 bool doc_id_mode = false);

MetricsReport evaluate(const std::vector<EvalRecord>& records, const Corpus& corpus,
                       const std::vector<std::size_t>& ks, bool doc_id_mode = false);

// Joins a predictions file with its dataset (positional, question strings
// verified; mismatches are a DataError listing the questions).
std::vector<EvalRecord> load_eval_records(const std::string& predictions_path,
                                          const std::vector<QaRecord>& dataset,
                                          const Corpus& corpus);

std::string report_to_json(const MetricsReport& report);
std::string report_to_table(const MetricsReport& report);

}  // namespace pathret
