#include "pathret/corpus.hpp"

#include <cctype>
#include <fstream>
#include <istream>

#include <json.hpp>

namespace pathret {

namespace {

bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;  // non-ASCII bytes stay inside words
}

char to_lower_ascii(unsigned char c) {
    return static_cast<char>(std::tolower(c));
}

}  // namespace

Vocabulary::Vocabulary() {
    surfaces_ = {"<pad>", "</s>", std::string(kKwSepSurface), std::string(kAnsSepSurface)};
    for (std::size_t i = 0; i < surfaces_.size(); ++i) {
        ids_.emplace(surfaces_[i], static_cast<TokenId>(i));
    }
}

TokenId Vocabulary::add(std::string_view surface) {
    auto it = ids_.find(std::string(surface));
    if (it != ids_.end()) return it->second;
    TokenId id = static_cast<TokenId>(surfaces_.size());
    surfaces_.emplace_back(surface);
    ids_.emplace(surfaces_.back(), id);
    return id;
}

std::optional<TokenId> Vocabulary::lookup(std::string_view surface) const {
    auto it = ids_.find(std::string(surface));
    if (it == ids_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocabulary::surface(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= surfaces_.size()) {
        throw DataError("unknown token id " + std::to_string(id));
    }
    return surfaces_[static_cast<std::size_t>(id)];
}

bool Vocabulary::is_prefix_of(const Vocabulary& other) const {
    if (size() > other.size()) return false;
    for (std::size_t i = 0; i < surfaces_.size(); ++i) {
        if (surfaces_[i] != other.surfaces_[i]) return false;
    }
    return true;
}

std::vector<std::pair<std::string, bool>> tokenize_words_with_case(std::string_view text) {
    std::vector<std::pair<std::string, bool>> out;
    std::string word;
    bool word_capitalized = false;
    auto flush = [&] {
        if (!word.empty()) {
            out.emplace_back(word, word_capitalized);
            word.clear();
            word_capitalized = false;
        }
    };
    for (unsigned char c : text) {
        if (c < 0x80 && std::isspace(c)) {
            flush();
        } else if (c < 0x80 && std::ispunct(c)) {
            flush();
            out.emplace_back(std::string(1, static_cast<char>(c)), false);
        } else if (is_word_char(c)) {
            if (word.empty()) word_capitalized = std::isupper(c) != 0;
            word.push_back(c < 0x80 ? to_lower_ascii(c) : static_cast<char>(c));
        } else {
            flush();  // control chars act as whitespace
        }
    }
    flush();
    return out;
}

std::vector<std::string> tokenize_words(std::string_view text) {
    std::vector<std::string> out;
    for (auto& [w, cap] : tokenize_words_with_case(text)) out.push_back(std::move(w));
    return out;
}

std::vector<TokenId> tokenize_extend(std::string_view text, Vocabulary& vocab) {
    std::vector<TokenId> ids;
    for (const auto& w : tokenize_words(text)) ids.push_back(vocab.add(w));
    return ids;
}

std::vector<TokenId> tokenize_lookup(std::string_view text, const Vocabulary& vocab) {
    std::vector<TokenId> ids;
    for (const auto& w : tokenize_words(text)) {
        auto id = vocab.lookup(w);
        ids.push_back(id.value_or(kPad));
    }
    return ids;
}

std::string detokenize(std::span<const TokenId> tokens, const Vocabulary& vocab) {
    std::string out;
    for (TokenId id : tokens) {
        if (is_reserved(id)) {
            throw DataError("reserved token id " + std::to_string(id) + " in detokenize");
        }
        if (!out.empty()) out.push_back(' ');
        out += vocab.surface(id);
    }
    return out;
}

std::vector<TokenId> Document::indexed_tokens(const Corpus& corpus) const {
    std::vector<TokenId> out;
    out.reserve(title.size() + body.size() + 1);
    if (!title.empty()) {
        out.insert(out.end(), title.begin(), title.end());
        auto period = corpus.vocabulary().lookup(".");
        if (period) out.push_back(*period);
    }
    out.insert(out.end(), body.begin(), body.end());
    return out;
}

std::optional<DocId> Corpus::resolve_external_id(std::string_view ext) const {
    auto it = ext_ids_.find(std::string(ext));
    if (it == ext_ids_.end()) return std::nullopt;
    return it->second;
}

Corpus ingest(std::istream& in) {
    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    bool any_title = false;
    std::vector<std::string> titles, bodies;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("title") || !rec.contains("text")) {
            throw DataError("line " + std::to_string(line_no) + ": record must have id/title/text");
        }
        Document doc;
        doc.doc_id = static_cast<DocId>(corpus.docs_.size());
        doc.external_id = rec.at("id").get<std::string>();
        doc.raw_title = rec.at("title").get<std::string>();
        doc.raw_body = rec.at("text").get<std::string>();
        if (!corpus.ext_ids_.emplace(doc.external_id, doc.doc_id).second) {
            throw DataError("line " + std::to_string(line_no) + ": duplicate document id \"" +
                            doc.external_id + "\"");
        }
        doc.title = tokenize_extend(doc.raw_title, corpus.vocab_);
        doc.body = tokenize_extend(doc.raw_body, corpus.vocab_);
        if (doc.body.empty()) {
            throw DataError("line " + std::to_string(line_no) + ": empty text for document \"" +
                            doc.external_id + "\"");
        }
        // Canonicalization must be idempotent for every ingested document.
        std::string canon = detokenize(doc.body, corpus.vocab_);
        if (tokenize_lookup(canon, corpus.vocab_) != doc.body) {
            throw DataError("line " + std::to_string(line_no) + ": tokenization does not round-trip");
        }
        if (!doc.title.empty()) any_title = true;
        corpus.docs_.push_back(std::move(doc));
    }
    if (any_title) corpus.vocab_.add(".");  // title/body joiner, see Document::indexed_tokens
    return corpus;
}

Corpus ingest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus file: " + path);
    return ingest(in);
}

std::vector<QaRecord> read_qa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file: " + path);
    std::vector<QaRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
        }
        QaRecord qa;
        qa.question = rec.at("question").get<std::string>();
        if (rec.contains("answers")) {
            for (const auto& a : rec.at("answers")) qa.answers.push_back(a.get<std::string>());
        }
        if (rec.contains("gold_doc_id") && !rec.at("gold_doc_id").is_null()) {
            qa.gold_doc_id = rec.at("gold_doc_id").get<std::string>();
        }
        if (rec.contains("gold_answer") && !rec.at("gold_answer").is_null()) {
            qa.gold_answer = rec.at("gold_answer").get<std::string>();
        }
        out.push_back(std::move(qa));
    }
    return out;
}

}  // namespace pathret
