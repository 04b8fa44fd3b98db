#include "pathret/eval.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace pathret {

namespace {

std::vector<std::string> ws_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

bool is_article(const std::string& w) { return w == "a" || w == "an" || w == "the"; }

double pair_f1(const std::vector<std::string>& pred, const std::vector<std::string>& gold) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    std::map<std::string, std::size_t> cp, cg;
    for (const auto& w : pred) cp[w]++;
    for (const auto& w : gold) cg[w]++;
    std::size_t overlap = 0;
    for (const auto& [w, n] : cp) {
        auto it = cg.find(w);
        if (it != cg.end()) overlap += std::min(n, it->second);
    }
    if (overlap == 0) return 0.0;
    double p = static_cast<double>(overlap) / static_cast<double>(pred.size());
    double r = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * p * r / (p + r);
}

std::string histogram_bucket(std::size_t matched) {
    return matched >= 10 ? std::string("10+") : std::to_string(matched);
}

}  // namespace

std::string normalize_answer(const std::string& s) {
    std::string depunct;
    depunct.reserve(s.size());
    for (unsigned char c : s) {
        if (c < 0x80 && std::ispunct(c)) continue;
        depunct.push_back(static_cast<char>(std::tolower(c)));
    }
    std::string out;
    for (const std::string& w : ws_tokens(depunct)) {
        if (is_article(w)) continue;
        if (!out.empty()) out.push_back(' ');
        out += w;
    }
    return out;
}

int exact_match(const std::string& pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw std::invalid_argument("exact_match requires non-empty golds");
    std::string p = normalize_answer(pred);
    for (const std::string& g : golds) {
        if (p == normalize_answer(g)) return 1;
    }
    return 0;
}

double token_f1(const std::string& pred, const std::vector<std::string>& golds) {
    if (golds.empty()) throw std::invalid_argument("token_f1 requires non-empty golds");
    auto pt = ws_tokens(normalize_answer(pred));
    double best = 0.0;
    for (const std::string& g : golds) {
        best = std::max(best, pair_f1(pt, ws_tokens(normalize_answer(g))));
    }
    return best;
}

bool DocAnswerIndex::doc_contains(DocId d, const std::string& normalized_answer) const {
    if (normalized_answer.empty()) return false;
    auto it = cache_.find(d);
    if (it == cache_.end()) {
        const Document& doc = corpus_->doc(d);
        it = cache_.emplace(d, ws_tokens(normalize_answer(doc.raw_title + " " + doc.raw_body)))
                 .first;
    }
    const auto& toks = it->second;
    auto needle = ws_tokens(normalized_answer);
    if (needle.empty() || needle.size() > toks.size()) return false;
    for (std::size_t i = 0; i + needle.size() <= toks.size(); ++i) {
        if (std::equal(needle.begin(), needle.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) {
            return true;
        }
    }
    return false;
}

namespace {

bool record_hit(const EvalRecord& rec, std::size_t k, const DocAnswerIndex& docs,
                bool doc_id_mode) {
    std::size_t limit = std::min(k, rec.predicted_docs.size());
    for (std::size_t i = 0; i < limit; ++i) {
        DocId d = rec.predicted_docs[i];
        if (doc_id_mode) {
            if (!rec.gold_doc_id) {
                throw DataError("doc-id mode requires gold_doc_id for \"" + rec.question + "\"");
            }
            if (d == *rec.gold_doc_id) return true;
        } else {
            for (const std::string& g : rec.gold_answers) {
                if (docs.doc_contains(d, normalize_answer(g))) return true;
            }
        }
    }
    return false;
}

}  // namespace

double hits_at_k(const std::vector<EvalRecord>& records, std::size_t k, const Corpus& corpus,
                 bool doc_id_mode) {
    if (k < 1) throw std::invalid_argument("hits_at_k requires k >= 1");
    if (records.empty()) return 0.0;
    DocAnswerIndex docs(corpus);
    std::size_t hits = 0;
    for (const EvalRecord& rec : records) {
        if (!doc_id_mode && rec.gold_answers.empty()) {
            throw std::invalid_argument("hits_at_k requires gold answers");
        }
        if (record_hit(rec, k, docs, doc_id_mode)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(records.size());
}

MetricsReport evaluate(const std::vector<EvalRecord>& records, const Corpus& corpus,
                       const std::vector<std::size_t>& ks, bool doc_id_mode) {
    MetricsReport report;
    report.count = records.size();
    for (std::size_t b = 0; b < 10; ++b) report.matched_doc_histogram[std::to_string(b)] = 0;
    report.matched_doc_histogram["10+"] = 0;
    if (records.empty()) {
        for (std::size_t k : ks) report.hits_at[k] = 0.0;
        return report;
    }
    double em_sum = 0.0, f1_sum = 0.0;
    std::size_t fallbacks = 0;
    for (const EvalRecord& rec : records) {
        if (rec.gold_answers.empty()) {
            throw DataError("record without gold answers: \"" + rec.question + "\"");
        }
        em_sum += exact_match(rec.predicted_answer, rec.gold_answers);
        f1_sum += token_f1(rec.predicted_answer, rec.gold_answers);
        if (rec.used_fallback) ++fallbacks;
        report.matched_doc_histogram[histogram_bucket(rec.matched_doc_count)]++;
    }
    report.em = em_sum / static_cast<double>(records.size());
    report.f1 = f1_sum / static_cast<double>(records.size());
    report.fallback_rate = static_cast<double>(fallbacks) / static_cast<double>(records.size());
    for (std::size_t k : ks) report.hits_at[k] = hits_at_k(records, k, corpus, doc_id_mode);
    return report;
}

std::vector<EvalRecord> load_eval_records(const std::string& predictions_path,
                                          const std::vector<QaRecord>& dataset,
                                          const Corpus& corpus) {
    std::ifstream in(predictions_path);
    if (!in) throw DataError("cannot open predictions file: " + predictions_path);

    std::vector<EvalRecord> records;
    std::string line;
    std::size_t idx = 0;
    std::vector<std::string> mismatched;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("predictions line " + std::to_string(idx + 1) + ": " + e.what());
        }
        if (idx >= dataset.size()) {
            throw DataError("more predictions than dataset records");
        }
        const QaRecord& qa = dataset[idx];
        EvalRecord er;
        er.question = rec.at("question").get<std::string>();
        if (er.question != qa.question) mismatched.push_back(er.question);
        er.gold_answers = qa.answers;
        if (qa.gold_doc_id) er.gold_doc_id = corpus.resolve_external_id(*qa.gold_doc_id);
        er.predicted_answer = rec.value("answer", std::string{});
        if (rec.contains("docs")) {
            for (const auto& d : rec.at("docs")) er.predicted_docs.push_back(d.get<DocId>());
        }
        er.matched_doc_count = rec.value("matched_doc_count", std::size_t{0});
        er.used_fallback = rec.value("used_fallback", false);
        er.failed = rec.value("failed", false);
        records.push_back(std::move(er));
        ++idx;
    }
    if (idx != dataset.size()) {
        throw DataError("fewer predictions (" + std::to_string(idx) + ") than dataset records (" +
                        std::to_string(dataset.size()) + ")");
    }
    if (!mismatched.empty()) {
        std::string msg = "predictions do not align with dataset; mismatched questions:";
        for (std::size_t i = 0; i < mismatched.size() && i < 10; ++i) msg += " \"" + mismatched[i] + "\"";
        throw DataError(msg);
    }
    return records;
}

std::string report_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["count"] = report.count;
    for (const auto& [k, v] : report.hits_at) j["hits_at_" + std::to_string(k)] = v;
    j["em"] = report.em;
    j["f1"] = report.f1;
    j["fallback_rate"] = report.fallback_rate;
    j["matched_doc_histogram"] = report.matched_doc_histogram;
    return j.dump();
}

std::string report_to_table(const MetricsReport& report) {
    std::ostringstream out;
    out << "records          " << report.count << "\n";
    for (const auto& [k, v] : report.hits_at) {
        out << "hits@" << k << "          " << v << "\n";
    }
    out << "exact match      " << report.em << "\n";
    out << "token f1         " << report.f1 << "\n";
    out << "fallback rate    " << report.fallback_rate << "\n";
    out << "matched docs     ";
    for (const auto& [bucket, n] : report.matched_doc_histogram) {
        out << bucket << ":" << n << " ";
    }
    out << "\n";
    return out.str();
}

}  // namespace pathret
